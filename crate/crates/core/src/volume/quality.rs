use super::VolumeError;

/// Fraction of base-resolution voxels kept at quality `q`: `2^q`.
pub fn resolution_fraction(q: i32) -> Result<f64, VolumeError> {
    if q > 0 {
        return Err(VolumeError::InvalidQuality(q));
    }
    Ok(2f64.powi(q))
}

/// Axes halved, in order, when coarsening `dims` by `halvings` levels.
/// Each step picks the currently largest axis; ties go x, then y, then z.
pub fn halving_schedule(dims: [usize; 3], halvings: u32) -> Vec<usize> {
    let mut cur = dims;
    let mut axes = Vec::with_capacity(halvings as usize);
    for _ in 0..halvings {
        let mut axis = 0;
        for a in 1..3 {
            if cur[a] > cur[axis] {
                axis = a;
            }
        }
        cur[axis] = cur[axis].div_ceil(2);
        axes.push(axis);
    }
    axes
}

/// Dims after `|q|` halvings of `base`.
pub fn effective_dims(base: [usize; 3], q: i32) -> Result<[usize; 3], VolumeError> {
    if q > 0 {
        return Err(VolumeError::InvalidQuality(q));
    }
    let mut dims = base;
    for axis in halving_schedule(base, q.unsigned_abs()) {
        dims[axis] = dims[axis].div_ceil(2);
    }
    Ok(dims)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityLevel {
    pub q: i32,
    pub effective_dims: [usize; 3],
    pub voxel_fraction: f64,
}

impl QualityLevel {
    pub fn new(base: [usize; 3], q: i32) -> Result<Self, VolumeError> {
        Ok(Self {
            q,
            effective_dims: effective_dims(base, q)?,
            voxel_fraction: resolution_fraction(q)?,
        })
    }
}
