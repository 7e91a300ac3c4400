use gad_core::volume::{
    downsample, effective_dims, extract_roi, generate_synthetic, halving_schedule,
    resolution_fraction, GridMeta, SyntheticKind, SyntheticSource, VolumeBlock, VolumeError,
};
use gad_core::VoxelBox;
use proptest::prelude::*;

fn block(dims: [usize; 3], channels: u8, samples: Vec<f64>) -> VolumeBlock {
    let meta = GridMeta::new("f", dims, channels);
    VolumeBlock::new(meta, VoxelBox::full(dims), 0, samples).unwrap()
}

/// Per-axis weight matrix `w[o][i]` after `k` pairwise halvings of `n`
/// voxels (odd trailing voxel carried over unchanged).
fn axis_weights(n: usize, k: u32) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut r = vec![0.0; n];
            r[i] = 1.0;
            r
        })
        .collect();
    for _ in 0..k {
        rows = rows
            .chunks(2)
            .map(|c| match c {
                [a, b] => a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect(),
                [a] => a.clone(),
                _ => unreachable!(),
            })
            .collect();
    }
    rows
}

/// Brute-force oracle: every output voxel is a separable weighted sum over
/// all source voxels.
fn box_filter_oracle(b: &VolumeBlock, q: i32) -> Vec<f64> {
    let dims = b.dims();
    let mut halvings = [0u32; 3];
    for axis in halving_schedule(dims, q.unsigned_abs()) {
        halvings[axis] += 1;
    }
    let w: Vec<_> = (0..3).map(|a| axis_weights(dims[a], halvings[a])).collect();
    let out_dims = effective_dims(dims, q).unwrap();
    assert_eq!(out_dims, [w[0].len(), w[1].len(), w[2].len()]);
    let ch = b.channels();
    let mut out = Vec::new();
    for z in 0..out_dims[2] {
        for y in 0..out_dims[1] {
            for x in 0..out_dims[0] {
                for c in 0..ch {
                    let mut sum = 0.0;
                    for zz in 0..dims[2] {
                        for yy in 0..dims[1] {
                            for xx in 0..dims[0] {
                                let wt = w[0][x][xx] * w[1][y][yy] * w[2][z][zz];
                                if wt != 0.0 {
                                    sum += wt * b.at(xx, yy, zz, c);
                                }
                            }
                        }
                    }
                    out.push(sum);
                }
            }
        }
    }
    out
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn pow2_dims() -> impl Strategy<Value = [usize; 3]> {
    [2u32..5, 2u32..5, 2u32..5].prop_map(|e| e.map(|k| 1usize << k))
}

fn random_block(dims: impl Strategy<Value = [usize; 3]>) -> impl Strategy<Value = VolumeBlock> {
    (dims, prop_oneof![Just(1u8), Just(3u8)]).prop_flat_map(|(d, ch)| {
        let n = d.iter().product::<usize>() * ch as usize;
        prop::collection::vec(-100.0f64..100.0, n).prop_map(move |s| block(d, ch, s))
    })
}

#[test]
fn quality_fractions() {
    assert_eq!(resolution_fraction(0).unwrap(), 1.0);
    assert_eq!(resolution_fraction(-8).unwrap(), 1.0 / 256.0);
    assert_eq!(resolution_fraction(-6).unwrap(), 1.0 / 64.0);
    assert_eq!(resolution_fraction(-4).unwrap(), 1.0 / 16.0);
    assert!(matches!(resolution_fraction(1), Err(VolumeError::InvalidQuality(1))));
}

#[test]
fn box_filter_on_4_cubed_ramp() {
    let b = block([4, 4, 4], 1, (0..64).map(f64::from).collect());
    let d = downsample(&b, -3).unwrap();
    assert_eq!(d.dims(), [2, 2, 2]);
    // Oracle by hand: mean of the eight corners of each 2x2x2 cell.
    let mut hand = Vec::new();
    for z in 0..2 {
        for y in 0..2 {
            for x in 0..2 {
                let mut s = 0.0;
                for (dx, dy, dz) in (0..8).map(|i| (i & 1, (i >> 1) & 1, i >> 2)) {
                    s += ((2 * x + dx) + 4 * (2 * y + dy) + 16 * (2 * z + dz)) as f64;
                }
                hand.push(s / 8.0);
            }
        }
    }
    assert_eq!(d.samples, hand);
    assert_eq!(d.samples, box_filter_oracle(&b, -3));
}

#[test]
fn extract_full_domain_is_verbatim() {
    let meta = GridMeta::new("salinity", [16, 8, 4], 1).with_timesteps(4, 24.0);
    let src = SyntheticSource::new(SyntheticKind::BasinSalinityScalar, meta.clone());
    let b = extract_roi(&src, &VoxelBox::full([16, 8, 4]), 0, 2).unwrap();
    assert_eq!(b.samples, generate_synthetic(SyntheticKind::BasinSalinityScalar, &meta, 2).samples);
}

#[test]
fn extract_rejects_bad_requests() {
    let meta = GridMeta::new("salinity", [16, 8, 4], 1).with_timesteps(4, 24.0);
    let src = SyntheticSource::new(SyntheticKind::BasinSalinityScalar, meta);
    let full = VoxelBox::full([16, 8, 4]);
    assert!(matches!(
        extract_roi(&src, &VoxelBox::new([0, 0, 0], [17, 8, 4]), 0, 0),
        Err(VolumeError::OutOfBounds { .. })
    ));
    assert!(matches!(extract_roi(&src, &full, 1, 0), Err(VolumeError::InvalidQuality(1))));
    assert!(matches!(
        extract_roi(&src, &full, 0, 4),
        Err(VolumeError::TimestepOutOfRange { t: 4, count: 4 })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn downsample_matches_brute_force(
        b in random_block([4usize..=16, 4usize..=16, 4usize..=16]),
        halvings in 1i32..7,
    ) {
        let d = downsample(&b, -halvings).unwrap();
        let oracle = box_filter_oracle(&b, -halvings);
        prop_assert_eq!(d.samples.len(), oracle.len());
        for (x, y) in d.samples.iter().zip(&oracle) {
            prop_assert!(rel_close(*x, *y, 1e-6), "{} vs {}", x, y);
        }
    }

    #[test]
    fn downsample_telescopes(b in random_block(pow2_dims()), q1 in -4i32..0, extra in 1i32..4) {
        let q2 = q1 - extra;
        let direct = downsample(&b, q2).unwrap();
        let stepped = downsample(&downsample(&b, q1).unwrap(), q2).unwrap();
        prop_assert_eq!(direct.dims(), stepped.dims());
        for (x, y) in direct.samples.iter().zip(&stepped.samples) {
            prop_assert!(rel_close(*x, *y, 1e-6));
        }
    }

    #[test]
    fn downsample_preserves_mean(b in random_block(pow2_dims()), h in 1i32..7) {
        let d = downsample(&b, -h).unwrap();
        let (m0, m1) = (b.mean(), d.mean());
        prop_assert!((m1 - m0).abs() <= 1e-6 * m0.abs().max(1e-9) + 1e-9, "{} vs {}", m0, m1);
    }

    #[test]
    fn extract_commutes_with_downsample(
        x0 in 0u32..16, y0 in 0u32..16, z0 in 0u32..8,
        w in 1u32..17, h in 1u32..17, d in 1u32..9,
        q in -6i32..=0, t in 0u32..6,
    ) {
        let meta = GridMeta::new("eddy", [32, 32, 16], 1).with_timesteps(6, 24.0);
        let src = SyntheticSource::new(SyntheticKind::RotatingEddyScalar, meta);
        let bbox = VoxelBox::new([x0, y0, z0], [x0 + w, y0 + h, z0 + d]);
        let direct = extract_roi(&src, &bbox, q, t).unwrap();
        let base = extract_roi(&src, &bbox, 0, t).unwrap();
        let via = if q == 0 { base } else { downsample(&base, q).unwrap() };
        prop_assert_eq!(direct, via);
    }

    #[test]
    fn quality_four_is_one_sixteenth(b in random_block(pow2_dims())) {
        let n0 = b.samples.len();
        let d = downsample(&b, -4).unwrap();
        prop_assert_eq!(d.samples.len() * 16, n0);
    }

    #[test]
    fn effective_dims_within_fraction_bounds(
        dims in [1usize..200, 1usize..200, 1usize..200], q in -10i32..=0,
    ) {
        let e = effective_dims(dims, q).unwrap();
        let ratio = e.iter().product::<usize>() as f64 / dims.iter().product::<usize>() as f64;
        let f = resolution_fraction(q).unwrap();
        // Axes already at one voxel cannot shrink further.
        if dims.iter().all(|&n| n >= 1 << q.unsigned_abs().min(20)) {
            prop_assert!(ratio >= f / 8.0 && ratio <= f * 8.0, "{:?} {:?} {}", dims, e, ratio);
        }
        prop_assert!(e.iter().all(|&n| n >= 1));
    }
}

#[test]
fn synthetic_is_bit_reproducible() {
    let meta = GridMeta::new("x", [24, 20, 6], 1).with_timesteps(12, 24.0);
    for kind in [
        SyntheticKind::RotatingEddyScalar,
        SyntheticKind::BasinSalinityScalar,
        SyntheticKind::VortexVelocity,
    ] {
        let a = generate_synthetic(kind, &meta, 5);
        let b = generate_synthetic(kind, &meta, 5);
        let bits = |v: &VolumeBlock| v.samples.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }
}
