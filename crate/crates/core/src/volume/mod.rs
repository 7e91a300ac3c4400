//! Structured time-varying grids at multiple quality levels.
//!
//! Quality `q` is a non-positive integer; a block at quality `q` holds
//! `2^q` of the voxels of the base resolution, reached through `|q|`
//! successive axis halvings (largest axis first). Samples live in memory as
//! `f64` and on disk as little-endian `f32`, row-major with x fastest and
//! channels interleaved.

mod downsample;
mod quality;
pub mod raw;
mod roi;
mod synthetic;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::geom::{Vec3, VoxelBox};

pub use downsample::downsample;
pub use quality::{effective_dims, halving_schedule, resolution_fraction, QualityLevel};
pub use roi::{extract_roi, VolumeSource};
pub use synthetic::{generate_synthetic, SyntheticKind, SyntheticSource};

#[derive(Debug, thiserror::Error)]
pub enum VolumeError {
    #[error("invalid quality {0}: quality must be <= 0")]
    InvalidQuality(i32),
    #[error("requested quality {target} is not below block quality {current}")]
    QualityNotCoarser { current: i32, target: i32 },
    #[error("box {requested:?} outside grid dims {dims:?}")]
    OutOfBounds { requested: VoxelBox, dims: [usize; 3] },
    #[error("timestep {t} outside [0, {count})")]
    TimestepOutOfRange { t: u32, count: u32 },
    #[error("expected {expected} samples, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("i/o failure on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub dims: [usize; 3],
    pub channels: u8,
    /// World units per voxel along each axis.
    pub spacing: Vec3,
    /// World position of the lower corner of voxel (0, 0, 0).
    pub origin: Vec3,
    pub field_name: String,
    pub timestep_count: u32,
    pub timestep_stride_hours: f64,
}

impl GridMeta {
    /// Unit spacing at the origin, one timestep.
    pub fn new(field_name: impl Into<String>, dims: [usize; 3], channels: u8) -> Self {
        Self {
            dims,
            channels,
            spacing: [1.0; 3],
            origin: [0.0; 3],
            field_name: field_name.into(),
            timestep_count: 1,
            timestep_stride_hours: 24.0,
        }
    }

    pub fn with_timesteps(mut self, count: u32, stride_hours: f64) -> Self {
        self.timestep_count = count;
        self.timestep_stride_hours = stride_hours;
        self
    }

    pub fn is_valid(&self) -> bool {
        self.dims.iter().all(|&d| d >= 1)
            && self.spacing.iter().all(|&s| s > 0.0 && s.is_finite())
            && matches!(self.channels, 1 | 3)
            && self.timestep_count >= 1
            && self.timestep_stride_hours > 0.0
    }

    pub fn voxel_count(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn sample_count(&self) -> usize {
        self.voxel_count() * self.channels as usize
    }

    /// World-space extent `[origin, origin + dims * spacing]`.
    pub fn world_bounds(&self) -> (Vec3, Vec3) {
        let mut hi = self.origin;
        for a in 0..3 {
            hi[a] += self.dims[a] as f64 * self.spacing[a];
        }
        (self.origin, hi)
    }
}

/// Dense sub-grid of one field at one timestep and quality level.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeBlock {
    /// Geometry of the block itself: effective dims, spacing, world origin.
    pub meta: GridMeta,
    /// Region covered, in base-resolution voxels.
    pub bbox: VoxelBox,
    pub quality: i32,
    pub samples: Vec<f64>,
}

impl VolumeBlock {
    pub fn new(meta: GridMeta, bbox: VoxelBox, quality: i32, samples: Vec<f64>) -> Result<Self, VolumeError> {
        let block = Self {
            meta,
            bbox,
            quality,
            samples,
        };
        block.check()?;
        Ok(block)
    }

    pub fn check(&self) -> Result<(), VolumeError> {
        if self.quality > 0 {
            return Err(VolumeError::InvalidQuality(self.quality));
        }
        let expected = self.meta.sample_count();
        if self.samples.len() != expected {
            return Err(VolumeError::SizeMismatch {
                expected,
                found: self.samples.len(),
            });
        }
        if let Some(i) = self.samples.iter().position(|v| !v.is_finite()) {
            return Err(VolumeError::NonFinite(i));
        }
        Ok(())
    }

    pub fn dims(&self) -> [usize; 3] {
        self.meta.dims
    }

    pub fn channels(&self) -> usize {
        self.meta.channels as usize
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        let [nx, ny, _] = self.meta.dims;
        ((z * ny + y) * nx + x) * self.channels()
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize, z: usize, c: usize) -> f64 {
        self.samples[self.index(x, y, z) + c]
    }

    /// Trilinear lookup at a world position, treating samples as cell
    /// centers and clamping to the outermost centers. Writes `channels`
    /// values into `out`.
    pub fn sample_world(&self, p: Vec3, out: &mut [f64]) {
        let ch = self.channels();
        let mut i0 = [0usize; 3];
        let mut i1 = [0usize; 3];
        let mut f = [0.0f64; 3];
        for a in 0..3 {
            let n = self.meta.dims[a];
            let u = (p[a] - self.meta.origin[a]) / self.meta.spacing[a] - 0.5;
            let u = u.clamp(0.0, (n - 1) as f64);
            let lo = (u.floor() as usize).min(n - 1);
            i0[a] = lo;
            i1[a] = (lo + 1).min(n - 1);
            f[a] = u - lo as f64;
        }
        let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
        for (c, slot) in out.iter_mut().enumerate().take(ch) {
            let v = |x: usize, y: usize, z: usize| self.at(x, y, z, c);
            let c00 = lerp(v(i0[0], i0[1], i0[2]), v(i1[0], i0[1], i0[2]), f[0]);
            let c10 = lerp(v(i0[0], i1[1], i0[2]), v(i1[0], i1[1], i0[2]), f[0]);
            let c01 = lerp(v(i0[0], i0[1], i1[2]), v(i1[0], i0[1], i1[2]), f[0]);
            let c11 = lerp(v(i0[0], i1[1], i1[2]), v(i1[0], i1[1], i1[2]), f[0]);
            let c0 = lerp(c00, c10, f[1]);
            let c1 = lerp(c01, c11, f[1]);
            *slot = lerp(c0, c1, f[2]);
        }
    }

    pub fn min_max(&self) -> Option<(f64, f64)> {
        self.samples.iter().fold(None, |acc, &v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }

    pub fn mean(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Samples rounded through `f32`, as they would be after a disk or wire round trip.
    pub fn to_f32_precision(&self) -> Self {
        let mut out = self.clone();
        for v in &mut out.samples {
            *v = *v as f32 as f64;
        }
        out
    }

    pub fn byte_size(&self) -> usize {
        self.samples.len() * std::mem::size_of::<f64>()
    }
}
