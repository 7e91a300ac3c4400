//! Materialize-then-render, shared by the direct path, the chat loop and
//! the service.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use gad_access::{materialize, AnimationCache, AnimationId, AnimationSpec, DatasetClient, MaterializeOptions};
use gad_core::gad::parse_gad;
use gad_render::{render_animation, ImageFormat, OutputOptions, ReferenceBackend, RenderSettings, RendererBackend};

use crate::ScriptError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Fetching,
    Rendering,
}

/// `(stage, done, total)` callback.
pub type Progress = Arc<dyn Fn(Stage, usize, usize) + Send + Sync>;

pub fn no_progress() -> Progress {
    Arc::new(|_, _, _| {})
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub id: AnimationId,
    pub gad_root: PathBuf,
    pub frame_dir: PathBuf,
    pub frames: Vec<PathBuf>,
    pub cache_hit: bool,
}

/// Everything needed to turn a spec into frames.
#[derive(Clone)]
pub struct Pipeline {
    pub client: DatasetClient,
    pub cache: Arc<AnimationCache>,
    pub settings: RenderSettings,
    pub format: ImageFormat,
    pub backend: Arc<dyn RendererBackend>,
    pub materialize: MaterializeOptions,
    /// Frames of animation `id` go to `<output_root>/<id>/`.
    pub output_root: PathBuf,
}

impl std::fmt::Debug for Pipeline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Pipeline")
            .field("server", &self.client.base_url())
            .field("cache", &self.cache.root())
            .field("settings", &self.settings)
            .field("backend", &self.backend.name())
            .field("output_root", &self.output_root)
            .finish()
    }
}

impl Pipeline {
    pub fn new(client: DatasetClient, cache: Arc<AnimationCache>, output_root: impl Into<PathBuf>) -> Self {
        Self {
            client,
            cache,
            settings: RenderSettings::default(),
            format: ImageFormat::Png,
            backend: Arc::new(ReferenceBackend),
            materialize: MaterializeOptions::default(),
            output_root: output_root.into(),
        }
    }

    pub fn with_settings(mut self, settings: RenderSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn frame_dir(&self, id: &AnimationId) -> PathBuf {
        self.output_root.join(id.as_str())
    }

    /// Materializes `spec` (from the cache when possible) and renders it.
    pub async fn generate(&self, spec: &AnimationSpec, progress: Progress) -> Result<Generated, ScriptError> {
        spec.validate()?;
        self.settings.validate()?;
        let p = progress.clone();
        let fetch = move |done: usize, total: usize| p(Stage::Fetching, done, total);
        let m = materialize(spec, &self.client, &self.cache, &self.materialize, &fetch).await?;
        let frame_dir = self.frame_dir(&m.id);
        let frames = self.render_gad(&m.gad_root, &frame_dir, progress).await?;
        Ok(Generated {
            id: m.id,
            gad_root: m.gad_root,
            frame_dir,
            frames,
            cache_hit: m.cache_hit,
        })
    }

    /// Renders the GAD bundle at `gad_root` into `out_dir` off the async
    /// runtime.
    pub async fn render_gad(&self, gad_root: &Path, out_dir: &Path, progress: Progress) -> Result<Vec<PathBuf>, ScriptError> {
        let gad_root = gad_root.to_path_buf();
        let out = OutputOptions::new(out_dir.to_path_buf(), self.format);
        let settings = self.settings.clone();
        let backend = self.backend.clone();
        tokio::task::spawn_blocking(move || {
            let doc = parse_gad(&gad_root)?;
            let mut report = |done: usize, total: usize| progress(Stage::Rendering, done, total);
            let r = render_animation(&doc, &gad_root, &settings, backend.as_ref(), &out, &mut report)?;
            Ok(r.frames)
        })
        .await
        .map_err(|e| ScriptError::Task(e.to_string()))?
    }
}

/// Direct path: materialize and render `spec` with no model involved.
pub async fn basic_generate(spec: &AnimationSpec, pipeline: &Pipeline) -> Result<(AnimationId, PathBuf), ScriptError> {
    let g = pipeline.generate(spec, no_progress()).await?;
    Ok((g.id, g.frame_dir))
}
