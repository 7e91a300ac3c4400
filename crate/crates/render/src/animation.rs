use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use gad_core::gad::{expand_keyframes, DataEntry, GadDocument, Keyframe};
use gad_core::volume::{raw::read_raw, GridMeta, VolumeBlock};

use crate::backend::{FrameInput, Layer, RendererBackend};
use crate::image::{write_image, Image, ImageFormat};
use crate::{RenderError, RenderSettings};

pub fn frame_file_name(index: usize, format: ImageFormat) -> String {
    format!("frame_{index:05}.{}", format.extension())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputOptions {
    pub dir: PathBuf,
    pub format: ImageFormat,
}

impl OutputOptions {
    pub fn new(dir: impl Into<PathBuf>, format: ImageFormat) -> Self {
        Self {
            dir: dir.into(),
            format,
        }
    }
}

/// Byte counter for loaded volume blocks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Residency {
    current: usize,
    peak: usize,
}

impl Residency {
    pub fn acquire(&mut self, bytes: usize) {
        self.current += bytes;
        self.peak = self.peak.max(self.current);
    }

    pub fn release(&mut self, bytes: usize) {
        self.current = self.current.saturating_sub(bytes);
    }

    pub fn current(&self) -> usize {
        self.current
    }

    pub fn peak(&self) -> usize {
        self.peak
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ResidencyStats {
    /// Largest number of block bytes held at any moment.
    pub peak_block_bytes: usize,
    /// Largest sum of block bytes any single frame referenced.
    pub max_frame_working_set: usize,
    pub frame_buffer_bytes: usize,
    pub frame_buffer_allocations: usize,
}

impl ResidencyStats {
    pub fn peak_resident(&self) -> usize {
        self.peak_block_bytes + self.frame_buffer_bytes
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnimationOutput {
    pub frames: Vec<PathBuf>,
    pub stats: ResidencyStats,
}

/// Block quality recorded by the writer, if any.
fn entry_quality(entry: &DataEntry) -> i32 {
    entry
        .extra
        .get("quality")
        .and_then(|v| v.as_i64())
        .map(|q| q as i32)
        .unwrap_or(0)
}

fn load_block(entry: &DataEntry, kf: &Keyframe, gad_root: &Path) -> Result<VolumeBlock, RenderError> {
    let path = gad_root.join(&entry.path);
    if !path.is_file() {
        return Err(RenderError::MissingBlock(path));
    }
    let dims = entry.dims_usize();
    let bbox = kf.bounding_box;
    let mut meta = GridMeta::new(entry.field_name.clone(), dims, entry.channels);
    let extent = bbox.extent();
    for a in 0..3 {
        meta.origin[a] = bbox.min[a] as f64;
        meta.spacing[a] = extent[a] as f64 / dims[a] as f64;
    }
    let samples = read_raw(&path, meta.sample_count())?;
    Ok(VolumeBlock::new(meta, bbox, entry_quality(entry), samples)?)
}

/// Loads every block keyframe `k` references, keyed by data index. Each
/// block spans the keyframe's bounding box.
pub fn load_keyframe_blocks(
    doc: &GadDocument,
    k: usize,
    gad_root: &Path,
) -> Result<BTreeMap<usize, VolumeBlock>, RenderError> {
    let kf = &doc.keyframes[k];
    let mut blocks = BTreeMap::new();
    for b in &kf.scene_data {
        if blocks.contains_key(&b.data_index) {
            continue;
        }
        let entry = doc.data_list.get(b.data_index).ok_or_else(|| {
            RenderError::InvalidState(format!("data index {} out of range", b.data_index))
        })?;
        blocks.insert(b.data_index, load_block(entry, kf, gad_root)?);
    }
    Ok(blocks)
}

/// Renders every frame of `doc` one keyframe at a time.
///
/// Only the blocks of the keyframe being drawn are resident (frames in the
/// gap after a keyframe reuse them), and one frame buffer is allocated for
/// the whole run. `progress` receives `(frames_written, total)`.
pub fn render_animation(
    doc: &GadDocument,
    gad_root: impl AsRef<Path>,
    settings: &RenderSettings,
    backend: &dyn RendererBackend,
    out: &OutputOptions,
    progress: &mut dyn FnMut(usize, usize),
) -> Result<AnimationOutput, RenderError> {
    settings.validate()?;
    let gad_root = gad_root.as_ref();
    let states = expand_keyframes(doc)?;
    if !backend.supports_streamlines()
        && doc
            .keyframes
            .iter()
            .any(|k| k.scene_data.iter().any(|b| b.streamline_params.is_some()))
    {
        return Err(RenderError::BackendFailure(format!(
            "backend {} cannot draw streamlines",
            backend.name()
        )));
    }
    std::fs::create_dir_all(&out.dir).map_err(|e| RenderError::io(&out.dir, e))?;

    let mut frame = Image::new(settings.width, settings.height);
    let mut stats = ResidencyStats {
        frame_buffer_bytes: frame.byte_size(),
        frame_buffer_allocations: 1,
        ..Default::default()
    };
    let mut residency = Residency::default();
    let mut paths = Vec::with_capacity(states.len());
    let total = states.len();

    let mut i = 0;
    while i < states.len() {
        let k = states[i].keyframe_index;
        let blocks = load_keyframe_blocks(doc, k, gad_root)?;
        let held: usize = blocks.values().map(VolumeBlock::byte_size).sum();
        residency.acquire(held);

        while i < states.len() && states[i].keyframe_index == k {
            let state = &states[i];
            let mut layers = Vec::with_capacity(state.bindings.len());
            let mut working_set = 0;
            let mut counted = Vec::new();
            for b in &state.bindings {
                let block = &blocks[&b.data_index];
                if !counted.contains(&b.data_index) {
                    counted.push(b.data_index);
                    working_set += block.byte_size();
                }
                layers.push(Layer {
                    binding: b,
                    block,
                    value_range: doc.data_list[b.data_index].value_range,
                });
            }
            stats.max_frame_working_set = stats.max_frame_working_set.max(working_set);

            backend.render_frame(&FrameInput { state, layers }, settings, &mut frame)?;
            let path = out.dir.join(frame_file_name(i, out.format));
            paths.push(write_image(&frame, path)?);
            i += 1;
            progress(i, total);
        }

        drop(blocks);
        residency.release(held);
    }
    stats.peak_block_bytes = residency.peak();
    Ok(AnimationOutput { frames: paths, stats })
}
