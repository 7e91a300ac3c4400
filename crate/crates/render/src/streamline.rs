use gad_core::gad::StreamlineParams;
use gad_core::geom::{add, norm, scale, Vec3};
use gad_core::volume::VolumeBlock;
use gad_core::ClipBox;
use rayon::prelude::*;

/// Lines stop once the local speed drops below this.
pub const STAGNATION_SPEED: f64 = 1e-6;

/// Integral curve with the velocity magnitude recorded at each vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Streamline {
    pub vertices: Vec<Vec3>,
    pub speeds: Vec<f64>,
}

impl Streamline {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

pub trait VectorField {
    fn velocity(&self, p: Vec3) -> Vec3;
    fn contains(&self, p: Vec3) -> bool;
}

/// Trilinear interpolation of a three-channel block, valid inside its world bounds.
impl VectorField for VolumeBlock {
    fn velocity(&self, p: Vec3) -> Vec3 {
        let mut v = [0.0; 3];
        self.sample_world(p, &mut v);
        v
    }

    fn contains(&self, p: Vec3) -> bool {
        let (lo, hi) = self.meta.world_bounds();
        (0..3).all(|a| p[a] >= lo[a] && p[a] <= hi[a])
    }
}

/// Classical fourth-order Runge-Kutta from `seed` with fixed step `h`.
/// Stops after `max_steps`, when the next point leaves the field, or when
/// the speed at the current vertex falls below [`STAGNATION_SPEED`].
pub fn trace_from_seed<F: VectorField + ?Sized>(field: &F, seed: Vec3, h: f64, max_steps: u32) -> Streamline {
    let mut p = seed;
    let mut v = field.velocity(p);
    let mut line = Streamline {
        vertices: vec![p],
        speeds: vec![norm(v)],
    };
    for _ in 0..max_steps {
        if norm(v) < STAGNATION_SPEED {
            break;
        }
        let k1 = v;
        let k2 = field.velocity(add(p, scale(k1, 0.5 * h)));
        let k3 = field.velocity(add(p, scale(k2, 0.5 * h)));
        let k4 = field.velocity(add(p, scale(k3, h)));
        let mut slope = [0.0; 3];
        for a in 0..3 {
            slope[a] = (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]) / 6.0;
        }
        let next = add(p, scale(slope, h));
        if !field.contains(next) {
            break;
        }
        p = next;
        v = field.velocity(p);
        line.vertices.push(p);
        line.speeds.push(norm(v));
    }
    line
}

/// `n³` seeds at the cell centers of a uniform lattice over `[lo, hi]`, x fastest.
pub fn seed_lattice(lo: Vec3, hi: Vec3, n: u32) -> Vec<Vec3> {
    let n = n as usize;
    let at = |a: usize, i: usize| lo[a] + (i as f64 + 0.5) / n as f64 * (hi[a] - lo[a]);
    let mut seeds = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                seeds.push([at(0, i), at(1, j), at(2, k)]);
            }
        }
    }
    seeds
}

/// Seeds a `seed_density³` lattice inside the block (cut by `clip`,
/// normalized to the block bounds) and traces one line per seed. Stagnant
/// seeds yield single-vertex lines.
pub fn trace_streamlines(block: &VolumeBlock, params: &StreamlineParams, clip: Option<&ClipBox>) -> Vec<Streamline> {
    assert_eq!(block.channels(), 3, "streamlines need a three-channel block");
    let (blo, bhi) = block.meta.world_bounds();
    let (mut lo, mut hi) = (blo, bhi);
    if let Some(c) = clip {
        for a in 0..3 {
            lo[a] = blo[a] + c.min[a] * (bhi[a] - blo[a]);
            hi[a] = blo[a] + c.max[a] * (bhi[a] - blo[a]);
        }
    }
    seed_lattice(lo, hi, params.seed_density)
        .par_iter()
        .map(|&s| trace_from_seed(block, s, params.step_size, params.max_steps))
        .collect()
}
