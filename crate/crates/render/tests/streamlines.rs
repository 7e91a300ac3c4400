use gad_core::gad::{Camera, RenderState, StreamlineParams};
use gad_core::geom::{norm, Vec3};
use gad_core::volume::{GridMeta, VolumeBlock};
use gad_core::VoxelBox;
use gad_render::{
    color_by_speed, rasterize_lines, seed_lattice, trace_from_seed, trace_streamlines, Image,
    RenderSettings, Streamline, VectorField, View,
};

struct Rotation;

impl VectorField for Rotation {
    fn velocity(&self, p: Vec3) -> Vec3 {
        [-p[1], p[0], 0.0]
    }
    fn contains(&self, _: Vec3) -> bool {
        true
    }
}

fn vector_block(dims: [usize; 3], origin: Vec3, f: impl Fn(Vec3) -> Vec3) -> VolumeBlock {
    let mut meta = GridMeta::new("velocity", dims, 3);
    meta.origin = origin;
    let mut samples = Vec::new();
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                let c = [
                    origin[0] + x as f64 + 0.5,
                    origin[1] + y as f64 + 0.5,
                    origin[2] + z as f64 + 0.5,
                ];
                samples.extend_from_slice(&f(c));
            }
        }
    }
    VolumeBlock::new(meta, VoxelBox::full(dims), 0, samples).unwrap()
}

#[test]
fn zero_field_gives_seed_only_lines() {
    let block = vector_block([4, 4, 4], [0.0; 3], |_| [0.0; 3]);
    let params = StreamlineParams { seed_density: 3, step_size: 0.1, max_steps: 50 };
    let lines = trace_streamlines(&block, &params, None);
    assert_eq!(lines.len(), 27);
    for l in &lines {
        assert_eq!(l.vertices.len(), 1);
        assert_eq!(l.speeds, vec![0.0]);
    }
}

#[test]
fn constant_field_advances_by_step() {
    let block = vector_block([64, 4, 4], [0.0; 3], |_| [1.0, 0.0, 0.0]);
    let h = 1.0 / 64.0;
    let seed = [1.5, 2.0, 2.0];
    let line = trace_from_seed(&block, seed, h, 100);
    assert_eq!(line.len(), 101);
    for (k, v) in line.vertices.iter().enumerate() {
        assert_eq!(*v, [seed[0] + k as f64 * h, 2.0, 2.0]);
    }
    let line = trace_from_seed(&block, seed, 0.01, 100);
    for (k, v) in line.vertices.iter().enumerate() {
        assert!((v[0] - (seed[0] + k as f64 * 0.01)).abs() < 1e-12);
    }
}

#[test]
fn leaving_the_domain_stops_the_line() {
    let block = vector_block([8, 2, 2], [0.0; 3], |_| [1.0, 0.0, 0.0]);
    let line = trace_from_seed(&block, [0.5, 1.0, 1.0], 0.5, 1000);
    let last = line.vertices.last().unwrap();
    assert!(last[0] <= 8.0 && last[0] > 7.0);
    assert_eq!(line.len(), 16);
}

/// Analytic orbit: radius stays 1 for the exact solution.
#[test]
fn rk4_circular_orbit_radius() {
    let line = trace_from_seed(&Rotation, [1.0, 0.0, 0.0], 0.01, 629);
    assert_eq!(line.len(), 630);
    let drift = line
        .vertices
        .iter()
        .map(|v| (norm(*v) - 1.0).abs())
        .fold(0.0, f64::max);
    assert!(drift < 1e-6, "drift {drift}");
    let last = line.vertices.last().unwrap();
    let angle = last[1].atan2(last[0]);
    assert!((angle - (6.29f64 - std::f64::consts::TAU)).abs() < 1e-6);
}

#[test]
fn rk4_orbit_through_sampled_block() {
    // Cell centers on the half-integers; trilinear is exact on a linear field.
    let block = vector_block([8, 8, 2], [-4.0, -4.0, -1.0], |p| [-p[1], p[0], 0.0]);
    let line = trace_from_seed(&block, [1.0, 0.0, 0.0], 0.01, 629);
    assert_eq!(line.len(), 630);
    for (v, s) in line.vertices.iter().zip(&line.speeds) {
        assert!((norm(*v) - 1.0).abs() < 1e-6);
        assert!((s - 1.0).abs() < 1e-6, "speed {s}");
    }
}

#[test]
fn seed_lattice_is_cell_centred() {
    let seeds = seed_lattice([0.0; 3], [4.0, 2.0, 2.0], 2);
    assert_eq!(seeds.len(), 8);
    assert_eq!(seeds[0], [1.0, 0.5, 0.5]);
    assert_eq!(seeds[7], [3.0, 1.5, 1.5]);
}

#[test]
fn speed_coloring() {
    let line = Streamline { vertices: vec![[0.0; 3]; 3], speeds: vec![2.0, 4.0, 6.0] };
    let out = color_by_speed(vec![line], [2.0, 6.0]);
    assert_eq!(out[0].1, vec![[0.0, 0.0, 1.0], [1.0, 1.0, 1.0], [1.0, 0.0, 0.0]]);
}

fn state() -> RenderState {
    RenderState {
        frame_number: 0,
        camera: Camera::new([0.0, 0.0, 10.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]),
        bindings: vec![],
        bounding_box: VoxelBox::new([0, 0, 0], [1, 1, 1]),
        keyframe_index: 0,
    }
}

fn segment(a: Vec3, b: Vec3) -> Vec<(Streamline, Vec<[f64; 3]>)> {
    vec![(
        Streamline { vertices: vec![a, b], speeds: vec![1.0, 1.0] },
        vec![[1.0, 0.0, 0.0]; 2],
    )]
}

#[test]
fn empty_or_hidden_lines_leave_image() {
    let s = RenderSettings::default().with_size(32, 32);
    let base = Image::filled(32, 32, [0.1, 0.2, 0.3]);
    let mut img = base.clone();
    rasterize_lines(&mut img, &[], &state(), &s).unwrap();
    assert_eq!(img, base);
    rasterize_lines(&mut img, &segment([0.0, 0.0, 11.0], [1.0, 1.0, 12.0]), &state(), &s).unwrap();
    assert_eq!(img, base);
}

#[test]
fn visible_segment_marks_projected_path() {
    let s = RenderSettings::default().with_size(64, 48);
    let base = Image::filled(64, 48, [0.0; 3]);
    let mut img = base.clone();
    let (a, b) = ([-2.0, 1.0, 0.0], [3.0, -1.5, 2.0]);
    rasterize_lines(&mut img, &segment(a, b), &state(), &s).unwrap();

    // Independent pinhole projection: eye (0,0,10) looking down -z, fov 60.
    let project = |p: Vec3| {
        let z = 10.0 - p[2];
        let t = (30.0f64).to_radians().tan();
        let aspect = 64.0 / 48.0;
        let x = p[0] / (z * t * aspect);
        let y = p[1] / (z * t);
        ((x + 1.0) * 0.5 * 64.0, (1.0 - y) * 0.5 * 48.0)
    };
    let (pa, pb) = (project(a), project(b));
    let mut hits = 0;
    for k in 0..=20 {
        let f = k as f64 / 20.0;
        let x = (pa.0 + (pb.0 - pa.0) * f).floor() as u32;
        let y = (pa.1 + (pb.1 - pa.1) * f).floor() as u32;
        if img.pixel(x.min(63), y.min(47))[0] > 0 {
            hits += 1;
        }
    }
    assert!(hits >= 20, "{hits}");
    let changed = img.pixels.chunks(4).zip(base.pixels.chunks(4)).filter(|(a, b)| a != b).count();
    assert!(changed > 0);
    // 0.8 over black.
    let hit = img.pixels.chunks(4).find(|p| p[0] > 0).unwrap();
    assert_eq!(hit[0], 204);

    let v = View::new(&state().camera, 64, 48, 60.0).unwrap();
    let p = v.project(a).unwrap();
    assert!((p[0] - pa.0).abs() < 1e-9 && (p[1] - pa.1).abs() < 1e-9);
}

#[test]
fn partially_hidden_segment_is_clipped_not_dropped() {
    let s = RenderSettings::default().with_size(32, 32);
    let mut img = Image::filled(32, 32, [0.0; 3]);
    rasterize_lines(&mut img, &segment([0.0, 0.0, 0.0], [0.0, 0.0, 20.0]), &state(), &s).unwrap();
    assert!(img.pixels.chunks(4).any(|p| p[0] > 0));
}
