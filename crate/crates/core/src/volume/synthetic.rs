//! Analytic stand-ins for ocean model output. Every field is a pure function
//! of `(kind, meta, t)`, rounded to `f32` precision so blocks survive the
//! raw file format bit-exactly.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::roi::VolumeSource;
use super::{GridMeta, VolumeBlock, VolumeError};
use crate::geom::VoxelBox;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticKind {
    /// Warm Gaussian core orbiting the horizontal center once per
    /// `timestep_count` steps, fading with depth. Values in `[14, 30]`.
    RotatingEddyScalar,
    /// Salinity in `[33, 38]`: east-west and depth gradients plus a
    /// drifting high-salinity lens.
    BasinSalinityScalar,
    /// Solid-body rotation `(-(y - cy), x - cx, 0)` about the vertical axis
    /// through voxel `(nx/2, ny/2)`, with unit angular rate.
    VortexVelocity,
}

impl SyntheticKind {
    pub fn channels(self) -> u8 {
        match self {
            SyntheticKind::VortexVelocity => 3,
            _ => 1,
        }
    }

    /// Closed bounds of the values this kind can produce on `dims`.
    pub fn value_range(self, dims: [usize; 3]) -> [f64; 2] {
        match self {
            SyntheticKind::RotatingEddyScalar => [14.0, 30.0],
            SyntheticKind::BasinSalinityScalar => [33.0, 38.0],
            SyntheticKind::VortexVelocity => {
                let (cx, cy) = vortex_center(dims);
                let rx = cx.max(dims[0] as f64 - 1.0 - cx);
                let ry = cy.max(dims[1] as f64 - 1.0 - cy);
                [0.0, (rx * rx + ry * ry).sqrt()]
            }
        }
    }
}

fn vortex_center(dims: [usize; 3]) -> (f64, f64) {
    ((dims[0] / 2) as f64, (dims[1] / 2) as f64)
}

fn evaluate(kind: SyntheticKind, meta: &GridMeta, t: u32, p: [usize; 3], out: &mut [f64]) {
    let [nx, ny, nz] = meta.dims;
    let (x, y, z) = (p[0] as f64, p[1] as f64, p[2] as f64);
    let frac = |v: f64, n: usize| if n > 1 { v / (n - 1) as f64 } else { 0.0 };
    let phase = TAU * (t % meta.timestep_count.max(1)) as f64 / meta.timestep_count.max(1) as f64;
    let horiz = nx.min(ny) as f64;

    match kind {
        SyntheticKind::RotatingEddyScalar => {
            let cx = 0.5 * (nx as f64 - 1.0);
            let cy = 0.5 * (ny as f64 - 1.0);
            let orbit = 0.25 * horiz;
            let (bx, by) = (cx + orbit * phase.cos(), cy + orbit * phase.sin());
            let sigma = (0.08 * horiz).max(1.0);
            let d2 = (x - bx).powi(2) + (y - by).powi(2);
            let depth = (-frac(z, nz) * 2.0).exp();
            let v = 14.0 + 6.0 * frac(y, ny) + 10.0 * (-d2 / (2.0 * sigma * sigma)).exp() * depth;
            out[0] = quantize(v.clamp(14.0, 30.0));
        }
        SyntheticKind::BasinSalinityScalar => {
            let lx = (0.3 + 0.1 * phase.sin()) * nx as f64;
            let ly = 0.6 * ny as f64;
            let lz = 0.6 * nz as f64;
            let sh = (0.1 * horiz).max(1.0);
            let sz = (0.15 * nz as f64).max(1.0);
            let lens = (-((x - lx).powi(2) + (y - ly).powi(2)) / (2.0 * sh * sh)
                - (z - lz).powi(2) / (2.0 * sz * sz))
                .exp();
            let v = 33.0 + 2.0 * frac(x, nx) + 1.0 * frac(z, nz) + 2.0 * lens;
            out[0] = quantize(v.clamp(33.0, 38.0));
        }
        SyntheticKind::VortexVelocity => {
            let (cx, cy) = vortex_center(meta.dims);
            out[0] = quantize(-(y - cy));
            out[1] = quantize(x - cx);
            out[2] = 0.0;
        }
    }
}

#[inline]
fn quantize(v: f64) -> f64 {
    v as f32 as f64
}

fn generate_region(
    kind: SyntheticKind,
    meta: &GridMeta,
    t: u32,
    bbox: &VoxelBox,
    component: Option<usize>,
) -> Vec<f64> {
    let full_ch = kind.channels() as usize;
    let out_ch = if component.is_some() { 1 } else { full_ch };
    let mut samples = Vec::with_capacity(bbox.voxel_count() * out_ch);
    let mut v = [0.0; 3];
    for z in bbox.min[2]..bbox.max[2] {
        for y in bbox.min[1]..bbox.max[1] {
            for x in bbox.min[0]..bbox.max[0] {
                evaluate(kind, meta, t, [x as usize, y as usize, z as usize], &mut v);
                match component {
                    Some(c) => samples.push(v[c]),
                    None => samples.extend_from_slice(&v[..full_ch]),
                }
            }
        }
    }
    samples
}

/// Whole-domain block of `kind` at timestep `t` (quality 0). The channel
/// count comes from `kind`, not from `meta`.
pub fn generate_synthetic(kind: SyntheticKind, meta: &GridMeta, t: u32) -> VolumeBlock {
    let mut meta = meta.clone();
    meta.channels = kind.channels();
    let bbox = VoxelBox::full(meta.dims);
    let samples = generate_region(kind, &meta, t, &bbox, None);
    VolumeBlock {
        meta,
        bbox,
        quality: 0,
        samples,
    }
}

/// Synthetic field served region by region; optionally a single component
/// of a vector field (e.g. `u` of the vortex).
#[derive(Debug, Clone)]
pub struct SyntheticSource {
    kind: SyntheticKind,
    meta: GridMeta,
    component: Option<usize>,
}

impl SyntheticSource {
    pub fn new(kind: SyntheticKind, mut meta: GridMeta) -> Self {
        meta.channels = kind.channels();
        Self {
            kind,
            meta,
            component: None,
        }
    }

    /// One component of a vector kind, served as a scalar field.
    pub fn component(kind: SyntheticKind, mut meta: GridMeta, component: usize) -> Self {
        assert!(component < kind.channels() as usize, "component out of range");
        meta.channels = 1;
        Self {
            kind,
            meta,
            component: Some(component),
        }
    }

    pub fn kind(&self) -> SyntheticKind {
        self.kind
    }
}

impl VolumeSource for SyntheticSource {
    fn meta(&self) -> &GridMeta {
        &self.meta
    }

    fn read_region(&self, bbox: &VoxelBox, t: u32) -> Result<Vec<f64>, VolumeError> {
        Ok(generate_region(self.kind, &self.meta, t, bbox, self.component))
    }
}
