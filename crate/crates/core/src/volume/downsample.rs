use super::quality::halving_schedule;
use super::{VolumeBlock, VolumeError};

/// Coarsens `block` to `target_q` by successive pairwise box averages, one
/// axis per level. A trailing voxel on an odd axis is copied through.
pub fn downsample(block: &VolumeBlock, target_q: i32) -> Result<VolumeBlock, VolumeError> {
    if target_q > 0 {
        return Err(VolumeError::InvalidQuality(target_q));
    }
    if target_q >= block.quality {
        return Err(VolumeError::QualityNotCoarser {
            current: block.quality,
            target: target_q,
        });
    }
    let halvings = (block.quality - target_q) as u32;
    let channels = block.channels();
    let mut dims = block.meta.dims;
    let mut data = block.samples.clone();
    let mut scratch = Vec::new();
    let mut spacing = block.meta.spacing;

    for axis in halving_schedule(dims, halvings) {
        let old = dims[axis];
        let new = old.div_ceil(2);
        let mut out_dims = dims;
        out_dims[axis] = new;
        halve_axis(&data, dims, channels, axis, &mut scratch);
        std::mem::swap(&mut data, &mut scratch);
        spacing[axis] *= old as f64 / new as f64;
        dims = out_dims;
    }

    let mut meta = block.meta.clone();
    meta.dims = dims;
    meta.spacing = spacing;
    Ok(VolumeBlock {
        meta,
        bbox: block.bbox,
        quality: target_q,
        samples: data,
    })
}

fn halve_axis(src: &[f64], dims: [usize; 3], ch: usize, axis: usize, dst: &mut Vec<f64>) {
    let mut out_dims = dims;
    out_dims[axis] = dims[axis].div_ceil(2);
    let [ox, oy, oz] = out_dims;
    let [nx, ny, _] = dims;
    dst.clear();
    dst.resize(ox * oy * oz * ch, 0.0);

    let src_index = |x: usize, y: usize, z: usize| ((z * ny + y) * nx + x) * ch;
    let n = dims[axis];
    let mut o = 0;
    for z in 0..oz {
        for y in 0..oy {
            for x in 0..ox {
                let mut p = [x, y, z];
                p[axis] *= 2;
                let a = src_index(p[0], p[1], p[2]);
                if p[axis] + 1 < n {
                    p[axis] += 1;
                    let b = src_index(p[0], p[1], p[2]);
                    for c in 0..ch {
                        dst[o + c] = 0.5 * (src[a + c] + src[b + c]);
                    }
                } else {
                    dst[o..o + ch].copy_from_slice(&src[a..a + ch]);
                }
                o += ch;
            }
        }
    }
}
