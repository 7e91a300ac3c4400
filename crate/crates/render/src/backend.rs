use gad_core::gad::{RenderState, SceneDataBinding};
use gad_core::volume::VolumeBlock;

use crate::image::Image;
use crate::lines::{color_by_speed, rasterize_lines};
use crate::raymarch::composite_volume;
use crate::streamline::trace_streamlines;
use crate::view::View;
use crate::{RenderError, RenderSettings};

/// One binding of a frame together with its loaded block.
#[derive(Debug, Clone, Copy)]
pub struct Layer<'a> {
    pub binding: &'a SceneDataBinding,
    pub block: &'a VolumeBlock,
    /// Physical value range of the data entry, used to normalize line speeds.
    pub value_range: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct FrameInput<'a> {
    pub state: &'a RenderState,
    pub layers: Vec<Layer<'a>>,
}

/// Something that can turn one resolved frame into pixels. Implementations
/// must be deterministic for identical inputs.
pub trait RendererBackend: Send + Sync {
    fn name(&self) -> &str;
    fn supports_streamlines(&self) -> bool;
    /// Draws the frame into `target`, which is reused across frames and
    /// must be fully overwritten.
    fn render_frame(
        &self,
        frame: &FrameInput<'_>,
        settings: &RenderSettings,
        target: &mut Image,
    ) -> Result<(), RenderError>;
}

/// CPU ray marcher plus RK4 streamline overlay.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReferenceBackend;

impl RendererBackend for ReferenceBackend {
    fn name(&self) -> &str {
        "reference"
    }

    fn supports_streamlines(&self) -> bool {
        true
    }

    fn render_frame(
        &self,
        frame: &FrameInput<'_>,
        settings: &RenderSettings,
        target: &mut Image,
    ) -> Result<(), RenderError> {
        if target.width != settings.width || target.height != settings.height {
            return Err(RenderError::InvalidSettings("frame buffer size does not match settings".into()));
        }
        target.fill(settings.background);
        for p in target.pixels.chunks_exact_mut(4) {
            p[3] = 0;
        }
        let state = frame.state;
        let view = View::new(&state.camera, settings.width, settings.height, settings.fov_y)?;

        // Volumes in binding order, each composited over what is already drawn.
        for layer in frame.layers.iter().filter(|l| l.binding.streamline_params.is_none()) {
            composite_volume(&view, layer.binding, layer.block, Some(&state.bounding_box), settings, target)?;
        }
        for layer in frame.layers.iter() {
            let Some(params) = &layer.binding.streamline_params else {
                continue;
            };
            let lines = trace_streamlines(layer.block, params, layer.binding.clip_box.as_ref());
            let range = speed_range(layer.value_range, &lines);
            let colored = color_by_speed(lines, range);
            rasterize_lines(target, &colored, state, settings)?;
        }
        Ok(())
    }
}

fn speed_range(declared: [f64; 2], lines: &[crate::Streamline]) -> [f64; 2] {
    if declared[0] < declared[1] && declared[0] >= 0.0 {
        return declared;
    }
    let (lo, hi) = lines
        .iter()
        .flat_map(|l| l.speeds.iter().copied())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo < hi {
        [lo, hi]
    } else {
        [0.0, 1.0]
    }
}
