use gad_core::gad::{eval_tf, RenderState, SceneDataBinding, TransferFunction};
use gad_core::geom::{add, scale, Vec3};
use gad_core::volume::VolumeBlock;
use gad_core::{ClipBox, VoxelBox};
use rayon::prelude::*;

use crate::image::{to_u8, Image};
use crate::view::View;
use crate::{RenderError, RenderSettings};

/// Entry and exit distances of a ray through the box `[lo, hi]`, clamped to
/// start at the origin. `None` when the ray misses.
pub fn ray_box(origin: Vec3, dir: Vec3, lo: Vec3, hi: Vec3) -> Option<(f64, f64)> {
    let (mut t0, mut t1) = (0.0f64, f64::INFINITY);
    for a in 0..3 {
        if dir[a] == 0.0 {
            if origin[a] < lo[a] || origin[a] > hi[a] {
                return None;
            }
            continue;
        }
        let inv = 1.0 / dir[a];
        let (mut near, mut far) = ((lo[a] - origin[a]) * inv, (hi[a] - origin[a]) * inv);
        if near > far {
            std::mem::swap(&mut near, &mut far);
        }
        t0 = t0.max(near);
        t1 = t1.min(far);
    }
    (t1 > t0).then_some((t0, t1))
}

/// World-space box a ray is restricted to: the block bounds, cut by the
/// keyframe bounding box and the binding's clip box (normalized to the block).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slab {
    pub lo: Vec3,
    pub hi: Vec3,
}

impl Slab {
    pub fn new(block: &VolumeBlock, bbox: Option<&VoxelBox>, clip: Option<&ClipBox>) -> Option<Self> {
        let (mut lo, mut hi) = block.meta.world_bounds();
        let (blo, bhi) = (lo, hi);
        if let Some(c) = clip {
            for a in 0..3 {
                let e = bhi[a] - blo[a];
                lo[a] = blo[a] + c.min[a] * e;
                hi[a] = blo[a] + c.max[a] * e;
            }
        }
        if let Some(b) = bbox {
            for a in 0..3 {
                lo[a] = lo[a].max(b.min[a] as f64);
                hi[a] = hi[a].min(b.max[a] as f64);
            }
        }
        (0..3).all(|a| lo[a] < hi[a]).then_some(Self { lo, hi })
    }
}

/// Front-to-back accumulation along one ray. `color` is premultiplied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayResult {
    pub color: [f64; 3],
    pub alpha: f64,
    pub samples: u32,
}

impl RayResult {
    pub const EMPTY: RayResult = RayResult {
        color: [0.0; 3],
        alpha: 0.0,
        samples: 0,
    };

    /// Composites the remaining transmittance over `background`.
    pub fn over(&self, background: [f64; 3]) -> [f64; 3] {
        let k = 1.0 - self.alpha;
        [
            self.color[0] + k * background[0],
            self.color[1] + k * background[1],
            self.color[2] + k * background[2],
        ]
    }
}

/// Marches one ray through `slab`, sampling at the midpoint of each step.
///
/// A final partial step of length `r` is sampled at its own midpoint with
/// opacity corrected for `r`, so the total path length is honored exactly.
/// Per-sample opacity is corrected as `1 - (1 - a)^(len / reference_step)`.
#[allow(clippy::too_many_arguments)]
pub fn trace_ray(
    block: &VolumeBlock,
    tf: &TransferFunction,
    slab: &Slab,
    origin: Vec3,
    dir: Vec3,
    step: f64,
    reference_step: f64,
    termination: f64,
) -> RayResult {
    let Some((t0, t1)) = ray_box(origin, dir, slab.lo, slab.hi) else {
        return RayResult::EMPTY;
    };
    let length = t1 - t0;
    let full = (length / step).floor() as u64;
    let rest = length - full as f64 * step;
    let mut acc = RayResult::EMPTY;
    let mut value = [0.0];
    let mut sample = |t: f64, len: f64, acc: &mut RayResult| {
        block.sample_world(add(origin, scale(dir, t)), &mut value);
        let (c, a) = eval_tf(tf, value[0]);
        acc.samples += 1;
        if a <= 0.0 {
            return;
        }
        let a = if len == reference_step {
            a
        } else {
            1.0 - (1.0 - a).powf(len / reference_step)
        };
        let w = (1.0 - acc.alpha) * a;
        for k in 0..3 {
            acc.color[k] += w * c[k];
        }
        acc.alpha += w;
        debug_assert!((0.0..=1.0 + 1e-12).contains(&acc.alpha));
    };
    for k in 0..full {
        if acc.alpha >= termination {
            return acc;
        }
        sample(t0 + (k as f64 + 0.5) * step, step, &mut acc);
    }
    if rest > step * 1e-9 && acc.alpha < termination {
        sample(t0 + full as f64 * step + 0.5 * rest, rest, &mut acc);
    }
    acc
}

fn min_spacing(block: &VolumeBlock) -> f64 {
    block.meta.spacing.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Ray-marches `block` through `binding`'s transfer function and composites
/// it over the current contents of `target`.
pub fn composite_volume(
    view: &View,
    binding: &SceneDataBinding,
    block: &VolumeBlock,
    bbox: Option<&VoxelBox>,
    settings: &RenderSettings,
    target: &mut Image,
) -> Result<(), RenderError> {
    if block.channels() != 1 {
        return Err(RenderError::InvalidState(format!(
            "volume rendering needs a scalar block, got {} channels",
            block.channels()
        )));
    }
    let Some(slab) = Slab::new(block, bbox, binding.clip_box.as_ref()) else {
        return Ok(());
    };
    let reference = min_spacing(block);
    let step = settings.sample_step.unwrap_or(0.5 * reference);
    let tf = &binding.transfer_function;
    let width = target.width as usize;

    let shade_row = |(j, row): (usize, &mut [u8])| {
        for i in 0..width {
            let dir = view.ray(i as f64 + 0.5, j as f64 + 0.5);
            let r = trace_ray(block, tf, &slab, view.eye, dir, step, reference, settings.early_termination_alpha);
            if r.alpha <= 0.0 {
                continue;
            }
            let px = &mut row[i * 4..i * 4 + 4];
            let bg = [px[0] as f64 / 255.0, px[1] as f64 / 255.0, px[2] as f64 / 255.0];
            let rgb = r.over(bg);
            let old_a = px[3] as f64 / 255.0;
            px[0] = to_u8(rgb[0]);
            px[1] = to_u8(rgb[1]);
            px[2] = to_u8(rgb[2]);
            px[3] = to_u8(r.alpha + (1.0 - r.alpha) * old_a);
        }
    };
    if settings.parallel {
        target
            .pixels
            .par_chunks_mut(width * 4)
            .enumerate()
            .for_each(shade_row);
    } else {
        target.pixels.chunks_mut(width * 4).enumerate().for_each(shade_row);
    }
    Ok(())
}

/// Renders the first volume binding of `state` over the background.
pub fn raymarch(state: &RenderState, block: &VolumeBlock, settings: &RenderSettings) -> Result<Image, RenderError> {
    settings.validate()?;
    let view = View::new(&state.camera, settings.width, settings.height, settings.fov_y)?;
    let mut img = Image::filled(settings.width, settings.height, settings.background);
    for p in img.pixels.chunks_exact_mut(4) {
        p[3] = 0;
    }
    if let Some(binding) = state.bindings.iter().find(|b| b.streamline_params.is_none()) {
        composite_volume(&view, binding, block, Some(&state.bounding_box), settings, &mut img)?;
    }
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ray_box_axis_aligned() {
        let hit = ray_box([0.5, 0.5, 10.0], [0.0, 0.0, -1.0], [0.0; 3], [1.0; 3]).unwrap();
        assert_eq!(hit, (9.0, 10.0));
        assert!(ray_box([2.0, 0.5, 10.0], [0.0, 0.0, -1.0], [0.0; 3], [1.0; 3]).is_none());
    }

    #[test]
    fn ray_starting_inside_enters_at_zero() {
        let hit = ray_box([0.5; 3], [1.0, 0.0, 0.0], [0.0; 3], [1.0; 3]).unwrap();
        assert_eq!(hit, (0.0, 0.5));
    }
}
