//! Turns expanded GAD frames into images.
//!
//! The reference backend ray-marches scalar blocks front to back and draws
//! speed-colored streamlines over the result. World units are base-resolution
//! voxels; a block covers its keyframe's bounding box.

mod animation;
mod backend;
mod image;
mod lines;
mod raymarch;
mod streamline;
mod view;

use std::path::PathBuf;

pub use animation::{
    frame_file_name, load_keyframe_blocks, render_animation, AnimationOutput, OutputOptions,
    Residency, ResidencyStats,
};
pub use backend::{FrameInput, Layer, ReferenceBackend, RendererBackend};
pub use image::{write_image, Image, ImageFormat};
pub use lines::{color_by_speed, rasterize_lines, speed_color, LINE_OPACITY};
pub use raymarch::{composite_volume, raymarch, ray_box, trace_ray, RayResult, Slab};
pub use streamline::{
    seed_lattice, trace_from_seed, trace_streamlines, Streamline, VectorField, STAGNATION_SPEED,
};
pub use view::View;

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("missing block file {}", .0.display())]
    MissingBlock(PathBuf),
    #[error("backend failure: {0}")]
    BackendFailure(String),
    #[error("invalid render state: {0}")]
    InvalidState(String),
    #[error("invalid settings: {0}")]
    InvalidSettings(String),
    #[error(transparent)]
    Volume(#[from] gad_core::volume::VolumeError),
    #[error(transparent)]
    Gad(#[from] gad_core::gad::GadError),
    #[error("i/o failure on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RenderError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}

/// Default per-image memory budget: room for a 4096² RGBA frame.
pub const DEFAULT_MEMORY_BUDGET: usize = 4096 * 4096 * 4;

#[derive(Debug, Clone, PartialEq)]
pub struct RenderSettings {
    pub width: u32,
    pub height: u32,
    pub background: [f64; 3],
    /// World units between samples; `None` uses half the finest voxel spacing.
    pub sample_step: Option<f64>,
    pub early_termination_alpha: f64,
    pub fov_y: f64,
    pub memory_budget: usize,
    /// Render pixel rows on the rayon pool. Output is identical either way.
    pub parallel: bool,
}

impl Default for RenderSettings {
    fn default() -> Self {
        Self {
            width: 256,
            height: 256,
            background: [0.0; 3],
            sample_step: None,
            early_termination_alpha: 0.99,
            fov_y: 60.0,
            memory_budget: DEFAULT_MEMORY_BUDGET,
            parallel: true,
        }
    }
}

impl RenderSettings {
    pub fn with_size(mut self, width: u32, height: u32) -> Self {
        self.width = width;
        self.height = height;
        self
    }

    /// Output size used for production renders.
    pub fn production() -> Self {
        Self::default().with_size(2048, 2048)
    }

    pub fn validate(&self) -> Result<(), RenderError> {
        let bad = |m: &str| Err(RenderError::InvalidSettings(m.to_string()));
        if self.width == 0 || self.height == 0 {
            return bad("image size must be positive");
        }
        if (self.width as usize) * (self.height as usize) * 4 > self.memory_budget {
            return bad("image does not fit the memory budget");
        }
        if let Some(s) = self.sample_step {
            if !(s > 0.0 && s.is_finite()) {
                return bad("sample step must be positive");
            }
        }
        if !(self.early_termination_alpha > 0.0 && self.early_termination_alpha <= 1.0) {
            return bad("early termination alpha must lie in (0, 1]");
        }
        if !(self.fov_y > 0.0 && self.fov_y < 180.0) {
            return bad("fov_y must lie in (0, 180) degrees");
        }
        if self.background.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return bad("background must lie in [0, 1]");
        }
        Ok(())
    }
}
