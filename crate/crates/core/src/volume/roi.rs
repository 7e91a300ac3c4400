use super::{downsample, GridMeta, VolumeBlock, VolumeError};
use crate::geom::VoxelBox;

/// Anything that can hand out full-resolution regions of a time-varying field.
pub trait VolumeSource {
    /// Base-resolution geometry of the whole field.
    fn meta(&self) -> &GridMeta;

    /// Row-major samples of `bbox` at timestep `t`, quality 0. Callers have
    /// already checked that `bbox` and `t` are in range.
    fn read_region(&self, bbox: &VoxelBox, t: u32) -> Result<Vec<f64>, VolumeError>;
}

/// Cuts `bbox` out of timestep `t` and coarsens it to quality `q`.
pub fn extract_roi(
    source: &dyn VolumeSource,
    bbox: &VoxelBox,
    q: i32,
    t: u32,
) -> Result<VolumeBlock, VolumeError> {
    if q > 0 {
        return Err(VolumeError::InvalidQuality(q));
    }
    let base = source.meta();
    if bbox.is_empty() || !VoxelBox::full(base.dims).contains_box(bbox) {
        return Err(VolumeError::OutOfBounds {
            requested: *bbox,
            dims: base.dims,
        });
    }
    if t >= base.timestep_count {
        return Err(VolumeError::TimestepOutOfRange {
            t,
            count: base.timestep_count,
        });
    }

    let mut meta = base.clone();
    meta.dims = bbox.extent();
    for a in 0..3 {
        meta.origin[a] = base.origin[a] + bbox.min[a] as f64 * base.spacing[a];
    }
    let samples = source.read_region(bbox, t)?;
    let full = VolumeBlock::new(meta, *bbox, 0, samples)?;
    if q == 0 {
        Ok(full)
    } else {
        downsample(&full, q)
    }
}

/// A single full-resolution block serves as a one-timestep source.
impl VolumeSource for VolumeBlock {
    fn meta(&self) -> &GridMeta {
        &self.meta
    }

    fn read_region(&self, bbox: &VoxelBox, _t: u32) -> Result<Vec<f64>, VolumeError> {
        let ch = self.channels();
        let mut out = Vec::with_capacity(bbox.voxel_count() * ch);
        for z in bbox.min[2]..bbox.max[2] {
            for y in bbox.min[1]..bbox.max[1] {
                let row = self.index(bbox.min[0] as usize, y as usize, z as usize);
                let len = bbox.extent()[0] * ch;
                out.extend_from_slice(&self.samples[row..row + len]);
            }
        }
        Ok(out)
    }
}
