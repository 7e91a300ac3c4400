//! Resolves an [`AnimationSpec`] into block files plus a GAD bundle in the
//! cache, fetching only what is not already on disk.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use futures::stream::{self, StreamExt, TryStreamExt};
use gad_core::gad::{
    parse_gad, serialize_gad, Camera, ControlPoint, DataEntry, DataType, Extra, GadDocument, Keyframe,
    SceneDataBinding, StreamlineParams, TransferFunction,
};
use gad_core::volume::{effective_dims, raw};
use gad_core::VoxelBox;

use crate::cache::{link_or_copy, write_atomic, AnimationCache};
use crate::client::{BlockRequest, DatasetClient};
use crate::dataset::{DatasetDescriptor, VELOCITY_COMPONENTS};
use crate::spec::{AnimationId, AnimationSpec};
use crate::AccessError;

pub const DEFAULT_CONCURRENCY: usize = 4;
pub const VELOCITY_FIELD: &str = "velocity";

#[derive(Debug, Clone, PartialEq)]
pub struct MaterializeOptions {
    /// Timesteps fetched at once.
    pub concurrency: usize,
}

impl Default for MaterializeOptions {
    fn default() -> Self {
        Self {
            concurrency: DEFAULT_CONCURRENCY,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Materialized {
    pub id: AnimationId,
    pub doc: GadDocument,
    pub gad_root: PathBuf,
    pub cache_hit: bool,
}

/// Camera on +z at 1.5 box diagonals from the box center, looking down -z.
pub fn default_camera(region: &VoxelBox) -> Camera {
    let c = region.center();
    Camera::new(
        [c[0], c[1], c[2] + 1.5 * region.diagonal()],
        [0.0, 0.0, -1.0],
        [0.0, 1.0, 0.0],
    )
}

/// Cool-to-warm ramp over `range`, transparent at the low end.
pub fn default_transfer_function(range: [f64; 2]) -> TransferFunction {
    let [lo, hi] = range;
    let stops = [
        (0.0, [0.23, 0.30, 0.75], 0.0),
        (0.25, [0.55, 0.69, 1.0], 0.02),
        (0.5, [0.87, 0.87, 0.87], 0.06),
        (0.75, [0.96, 0.6, 0.48], 0.15),
        (1.0, [0.71, 0.02, 0.15], 0.35),
    ];
    let points = stops
        .iter()
        .map(|&(f, c, a)| ControlPoint::new(if f == 1.0 { hi } else { lo + (hi - lo) * f }, c, a))
        .collect();
    TransferFunction::new(range, points)
}

/// Cached GAD for `spec` if present, else fetches and writes it. Callers
/// materializing the same id concurrently are serialized; the later one
/// sees a cache hit.
pub async fn materialize(
    spec: &AnimationSpec,
    client: &DatasetClient,
    cache: &AnimationCache,
    options: &MaterializeOptions,
    progress: &(dyn Fn(usize, usize) + Send + Sync),
) -> Result<Materialized, AccessError> {
    spec.validate()?;
    let id = spec.id();
    let _guard = cache.lock(&id).await;
    let gad_root = cache.animation_dir(&id);

    if cache.lookup(&id)?.is_some() {
        match parse_gad(&gad_root) {
            Ok(doc) => {
                let n = doc.keyframes.len();
                progress(n, n);
                return Ok(Materialized {
                    id,
                    doc,
                    gad_root,
                    cache_hit: true,
                });
            }
            Err(e) => {
                tracing::warn!(%id, error = %e, "cached GAD unreadable, rebuilding");
                cache.evict(&id)?;
            }
        }
    }

    let descriptor = client.dataset(&spec.dataset).await?;
    spec.validate_against(&descriptor)?;
    if spec.streamlines {
        for c in VELOCITY_COMPONENTS {
            if descriptor.field(c).is_none() {
                return Err(AccessError::NotFound(format!(
                    "dataset {} lacks velocity component {c}",
                    descriptor.name
                )));
            }
        }
    }
    match fs::remove_dir_all(&gad_root) {
        Ok(()) => {}
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
        Err(e) => return Err(AccessError::io(&gad_root, e)),
    }

    let timesteps = spec.time.timesteps();
    let total = timesteps.len();
    let done = AtomicUsize::new(0);
    progress(0, total);
    let fetched: Vec<TimestepFiles> = stream::iter(timesteps.iter().copied())
        .map(|t| {
            let done = &done;
            let gad_root = &gad_root;
            async move {
                let files = fetch_timestep(spec, t, client, cache, gad_root).await?;
                progress(done.fetch_add(1, Ordering::SeqCst) + 1, total);
                Ok::<_, AccessError>(files)
            }
        })
        .buffered(options.concurrency.max(1))
        .try_collect()
        .await?;

    let doc = build_document(spec, &descriptor, &fetched)?;
    let mut files: Vec<PathBuf> = Vec::new();
    for f in &fetched {
        files.push(PathBuf::from(&f.scalar_rel));
        if let Some((rel, _)) = &f.velocity {
            files.push(PathBuf::from(rel));
        }
    }
    for p in serialize_gad(&doc, &gad_root)? {
        files.push(p.strip_prefix(&gad_root).unwrap_or(&p).to_path_buf());
    }
    cache.insert(&id, &spec.dataset, &files)?;
    let doc = parse_gad(&gad_root)?;
    Ok(Materialized {
        id,
        doc,
        gad_root,
        cache_hit: false,
    })
}

struct TimestepFiles {
    scalar_rel: String,
    /// Relative path and peak speed of the interleaved velocity block.
    velocity: Option<(String, f64)>,
}

/// Samples of one component block, from the shared store or the server.
async fn component(
    spec: &AnimationSpec,
    field: &str,
    t: u32,
    client: &DatasetClient,
    cache: &AnimationCache,
) -> Result<(PathBuf, usize), AccessError> {
    let dims = effective_dims(spec.region.extent(), spec.quality).map_err(|e| AccessError::Protocol(e.to_string()))?;
    let n: usize = dims.iter().product();
    let path = cache.block_path(&spec.dataset, field, t, spec.quality, &spec.region);
    let cached = fs::metadata(&path).map(|m| m.len() == (n * 4) as u64).unwrap_or(false);
    if !cached {
        let block = client
            .fetch_block(&BlockRequest {
                dataset: spec.dataset.clone(),
                field: field.to_string(),
                t,
                quality: spec.quality,
                region: spec.region,
            })
            .await?;
        if block.dims() != dims || block.channels() != 1 {
            return Err(AccessError::Protocol(format!(
                "{field} t={t}: expected {dims:?}x1, server sent {:?}x{}",
                block.dims(),
                block.channels()
            )));
        }
        write_atomic(&path, &raw::encode_f32_le(&block.samples))?;
    }
    Ok((path, n))
}

async fn fetch_timestep(
    spec: &AnimationSpec,
    t: u32,
    client: &DatasetClient,
    cache: &AnimationCache,
    gad_root: &Path,
) -> Result<TimestepFiles, AccessError> {
    let (src, _) = component(spec, &spec.field, t, client, cache).await?;
    let scalar_rel = raw::block_file_name(&spec.field, t, spec.quality);
    link_or_copy(&src, &gad_root.join(&scalar_rel))?;

    let velocity = if spec.streamlines {
        let mut parts = Vec::with_capacity(3);
        for c in VELOCITY_COMPONENTS {
            let (p, n) = component(spec, c, t, client, cache).await?;
            parts.push(raw::read_raw(&p, n).map_err(|e| AccessError::Protocol(e.to_string()))?);
        }
        let n = parts[0].len();
        let mut interleaved = Vec::with_capacity(n * 3);
        let mut peak = 0.0f64;
        for i in 0..n {
            let v = [parts[0][i], parts[1][i], parts[2][i]];
            peak = peak.max((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt());
            interleaved.extend_from_slice(&v);
        }
        let rel = raw::block_file_name(VELOCITY_FIELD, t, spec.quality);
        write_atomic(&gad_root.join(&rel), &raw::encode_f32_le(&interleaved))?;
        Some((rel, peak))
    } else {
        None
    };
    Ok(TimestepFiles { scalar_rel, velocity })
}

fn build_document(
    spec: &AnimationSpec,
    descriptor: &DatasetDescriptor,
    fetched: &[TimestepFiles],
) -> Result<GadDocument, AccessError> {
    let dims = effective_dims(spec.region.extent(), spec.quality).map_err(|e| AccessError::Protocol(e.to_string()))?;
    let dims = dims.map(|d| d as u32);
    let range = descriptor
        .field(&spec.field)
        .map(|f| f.value_range)
        .ok_or_else(|| AccessError::NotFound(spec.field.clone()))?;
    let mut extra = Extra::new();
    extra.insert("quality".into(), spec.quality.into());
    let tf = default_transfer_function(range);
    let camera = default_camera(&spec.region);

    let mut data = Vec::new();
    let mut keyframes = Vec::new();
    for (i, f) in fetched.iter().enumerate() {
        let sid = data.len();
        data.push(DataEntry {
            id: sid,
            path: f.scalar_rel.clone(),
            dims,
            channels: 1,
            data_type: DataType::Structured,
            field_name: spec.field.clone(),
            value_range: range,
            extra: extra.clone(),
        });
        let mut scene = vec![SceneDataBinding::volume(sid, tf.clone())];
        if let Some((rel, peak)) = &f.velocity {
            let vid = data.len();
            let top = if *peak > 0.0 { *peak } else { 1.0 };
            data.push(DataEntry {
                id: vid,
                path: rel.clone(),
                dims,
                channels: 3,
                data_type: DataType::Streamline,
                field_name: VELOCITY_FIELD.to_string(),
                value_range: [0.0, top],
                extra: extra.clone(),
            });
            scene.push(SceneDataBinding::streamlines(
                vid,
                TransferFunction::constant([0.0, top], [1.0; 3], 1.0),
                StreamlineParams::default(),
            ));
        }
        keyframes.push(Keyframe {
            frame_range: [i as u32, i as u32],
            bounding_box: spec.region,
            camera: camera.clone(),
            per_frame_cameras: None,
            scene_data: scene,
            extra: Extra::new(),
        });
    }
    Ok(GadDocument::new(data, keyframes))
}
