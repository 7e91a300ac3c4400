use std::path::{Path as FsPath, PathBuf};

use axum::body::{Body, Bytes};
use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use gad_access::{AccessError, AnimationId, AnimationSpec};
use gad_core::gad::{parse_gad, serialize_gad};
use gad_render::{frame_file_name, ImageFormat};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::services::ServeDir;

use crate::bundle::{document_digest, link_data, GadBundle};
use crate::error::ApiError;
use crate::jobs::{AnimationJob, JobRecord, JobState, JobWork};
use crate::{chat, Shared};

const FRAME_CACHE_CONTROL: &str = "public, max-age=31536000, immutable";

pub(crate) fn app(state: Shared, ui_dir: Option<&FsPath>) -> Router {
    let api = Router::new()
        .route("/healthz", get(healthz))
        .route("/v1/datasets", get(datasets))
        .route("/v1/animations", post(create_animation))
        .route("/v1/animations/{id}", get(animation))
        .route("/v1/animations/{id}/frames/{n}", get(frame))
        .route("/v1/animations/{id}/gad", get(gad_bundle).post(export_gad))
        .route("/v1/chat/sessions", post(chat::create_session))
        .route("/v1/chat/sessions/{id}", get(chat::session))
        .route("/v1/chat/sessions/{id}/messages", post(chat::message))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(|| async { ApiError::not_found("no_such_endpoint", "no endpoint at this path") }),
    }
}

pub(crate) fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::validation("malformed_body", e.to_string()))
}

/// Reply to a submission: the job that now holds the id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmitResponse {
    pub job_id: String,
    pub state: JobState,
}

impl SubmitResponse {
    fn reply(job: AnimationJob) -> (StatusCode, Json<SubmitResponse>) {
        let status = if job.state == JobState::Done {
            StatusCode::OK
        } else {
            StatusCode::ACCEPTED
        };
        (status, Json(SubmitResponse { job_id: job.id, state: job.state }))
    }
}

async fn healthz(State(s): State<Shared>) -> Json<serde_json::Value> {
    let dataset_server = match s.health.list_datasets().await {
        Ok(d) => json!({"ok": true, "url": s.health.base_url(), "datasets": d.len()}),
        Err(e) => json!({"ok": false, "url": s.health.base_url(), "error": e.to_string()}),
    };
    let cache = json!({"ok": s.pipeline.cache.root().is_dir(), "root": s.pipeline.cache.root()});
    let jobs: serde_json::Map<String, serde_json::Value> = s
        .jobs
        .counts()
        .into_iter()
        .map(|(k, v)| (serde_json::to_value(k).unwrap().as_str().unwrap().to_string(), v.into()))
        .collect();
    Json(json!({"status": "ok", "dependencies": {"dataset_server": dataset_server, "cache": cache}, "jobs": jobs}))
}

async fn datasets(State(s): State<Shared>) -> Result<Json<serde_json::Value>, ApiError> {
    Ok(Json(serde_json::to_value(s.pipeline.client.list_datasets().await?).expect("descriptors serialize")))
}

async fn create_animation(State(s): State<Shared>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let spec: AnimationSpec = parse_body(&body)?;
    Ok(SubmitResponse::reply(submit_spec(&s, spec).await?))
}

/// Frames already on disk for a cached animation, if all are present.
fn rendered(s: &Shared, id: &AnimationId) -> Result<Option<usize>, ApiError> {
    if s.pipeline.cache.lookup(id)?.is_none() {
        return Ok(None);
    }
    let doc = parse_gad(s.pipeline.cache.animation_dir(id))?;
    let Some((first, last)) = doc.frame_span() else { return Ok(None) };
    let total = (last - first + 1) as usize;
    let dir = s.pipeline.frame_dir(id);
    let complete = (0..total).all(|i| dir.join(frame_file_name(i, s.pipeline.format)).is_file());
    Ok(complete.then_some(total))
}

/// Registers a finished job for `id` when its frames are already on disk.
fn adopt_rendered(s: &Shared, id: &AnimationId) -> Result<Option<AnimationJob>, ApiError> {
    let Some(frames) = rendered(s, id)? else { return Ok(None) };
    let record = JobRecord {
        job: AnimationJob::finished(id.as_str(), frames),
        frame_dir: s.pipeline.frame_dir(id),
        gad_root: Some(s.pipeline.cache.animation_dir(id)),
    };
    Ok(Some(s.jobs.claim(record).0))
}

pub(crate) async fn submit_spec(s: &Shared, spec: AnimationSpec) -> Result<AnimationJob, ApiError> {
    spec.validate().map_err(AccessError::from)?;
    let id = spec.id();
    if let Some(job) = s.jobs.snapshot(id.as_str()).filter(|j| j.state != JobState::Failed) {
        return Ok(job);
    }
    if let Some(job) = adopt_rendered(s, &id)? {
        return Ok(job);
    }
    let descriptor = s.pipeline.client.dataset(&spec.dataset).await?;
    spec.validate_against(&descriptor).map_err(AccessError::from)?;
    let record = JobRecord {
        job: AnimationJob::queued(id.as_str()),
        frame_dir: s.pipeline.frame_dir(&id),
        gad_root: None,
    };
    enqueue(s, record, JobWork::Spec(spec))
}

fn enqueue(s: &Shared, record: JobRecord, work: JobWork) -> Result<AnimationJob, ApiError> {
    let (job, new) = s.jobs.claim(record);
    if new {
        if let Err(e) = s.pool.submit(job.id.clone(), work) {
            s.jobs.update(&job.id, |r| r.job.fail(&e));
            return Err(e);
        }
        tracing::info!(job = %job.id, "job queued");
    }
    Ok(job)
}

fn record_for(s: &Shared, id: &str) -> Result<JobRecord, ApiError> {
    if let Some(r) = s.jobs.get(id) {
        return Ok(r);
    }
    if let Ok(aid) = id.parse::<AnimationId>() {
        if adopt_rendered(s, &aid)?.is_some() {
            if let Some(r) = s.jobs.get(id) {
                return Ok(r);
            }
        }
    }
    Err(ApiError::not_found("unknown_animation", format!("no animation job {id}")))
}

async fn animation(State(s): State<Shared>, Path(id): Path<String>) -> Result<Json<AnimationJob>, ApiError> {
    Ok(Json(record_for(&s, &id)?.job))
}

async fn frame(
    State(s): State<Shared>,
    Path((id, n)): Path<(String, String)>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let n: usize = n
        .parse()
        .map_err(|_| ApiError::validation("bad_frame_index", format!("{n:?} is not a frame index")))?;
    let r = record_for(&s, &id)?;
    if r.job.frame_total.is_some_and(|total| n >= total) {
        return Err(ApiError::new(
            StatusCode::RANGE_NOT_SATISFIABLE,
            "frame_out_of_range",
            format!("animation {id} has {} frames", r.job.frame_total.unwrap_or(0)),
        ));
    }
    if n >= r.job.frame_count {
        return Err(ApiError::not_found("frame_not_ready", format!("frame {n} of {id} is not rendered yet")));
    }
    let etag = format!("\"{id}/{n}\"");
    if headers.get(header::IF_NONE_MATCH).and_then(|v| v.to_str().ok()) == Some(etag.as_str()) {
        return Ok(StatusCode::NOT_MODIFIED.into_response());
    }
    let format = s.pipeline.format;
    let path = r.frame_dir.join(frame_file_name(n, format));
    let bytes = tokio::fs::read(&path)
        .await
        .map_err(|e| ApiError::internal(format!("reading {}: {e}", path.display())))?;
    let mut resp = Response::new(Body::from(bytes));
    let h = resp.headers_mut();
    let mime = match format {
        ImageFormat::Png => "image/png",
        ImageFormat::Ppm => "image/x-portable-pixmap",
    };
    h.insert(header::CONTENT_TYPE, HeaderValue::from_static(mime));
    h.insert(header::CACHE_CONTROL, HeaderValue::from_static(FRAME_CACHE_CONTROL));
    h.insert(header::ETAG, HeaderValue::from_str(&etag).map_err(|e| ApiError::internal(e.to_string()))?);
    Ok(resp)
}

/// Where the GAD documents of animation `id` live.
fn gad_root(s: &Shared, id: &str) -> Result<PathBuf, ApiError> {
    if let Some(root) = s.jobs.get(id).and_then(|r| r.gad_root) {
        return Ok(root);
    }
    if let Ok(aid) = id.parse::<AnimationId>() {
        if s.pipeline.cache.lookup(&aid)?.is_some() {
            return Ok(s.pipeline.cache.animation_dir(&aid));
        }
    }
    Err(ApiError::not_found("unknown_animation", format!("no GAD for animation {id}")))
}

async fn gad_bundle(State(s): State<Shared>, Path(id): Path<String>) -> Result<Json<GadBundle>, ApiError> {
    let doc = parse_gad(gad_root(&s, &id)?)?;
    Ok(Json(GadBundle::from_document(&doc)))
}

/// Takes an edited GAD for animation `id` and renders it. An unchanged
/// document resolves to the original animation.
async fn export_gad(State(s): State<Shared>, Path(id): Path<String>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let bundle: GadBundle = parse_body(&body)?;
    let source = gad_root(&s, &id)?;
    let doc = bundle.to_document()?;
    let original = parse_gad(&source)?.canonicalized();
    let base = id.split(".edit-").next().unwrap_or(&id).to_string();

    if doc == original {
        if let Ok(aid) = base.parse::<AnimationId>() {
            if let Some(entry) = s.pipeline.cache.lookup(&aid)? {
                let spec = AnimationId::parse(aid.as_str())
                    .map_err(AccessError::from)?
                    .into_spec(entry.dataset);
                return Ok(SubmitResponse::reply(submit_spec(&s, spec).await?));
            }
        }
        if let Some(job) = s.jobs.snapshot(&id).filter(|j| j.state != JobState::Failed) {
            return Ok(SubmitResponse::reply(job));
        }
    }

    let job_id = format!("{base}.edit-{}", document_digest(&doc));
    if let Some(job) = s.jobs.snapshot(&job_id).filter(|j| j.state != JobState::Failed) {
        return Ok(SubmitResponse::reply(job));
    }
    let dir = s.pipeline.output_root.join("exports").join(&job_id);
    let record = JobRecord {
        job: AnimationJob::queued(job_id.clone()),
        frame_dir: s.pipeline.output_root.join(&job_id),
        gad_root: Some(dir.clone()),
    };
    let (job, new) = s.jobs.claim(record);
    if !new {
        return Ok(SubmitResponse::reply(job));
    }
    let written = (|| {
        let _ = std::fs::remove_dir_all(&dir);
        link_data(&doc, &source, &dir)?;
        serialize_gad(&doc, &dir)?;
        s.pool.submit(job_id.clone(), JobWork::Gad(dir.clone()))
    })();
    if let Err(e) = written {
        s.jobs.update(&job_id, |r| r.job.fail(&e));
        return Err(e);
    }
    Ok(SubmitResponse::reply(job))
}

pub(crate) fn job_frames(s: &Shared, id: &str) -> Result<Vec<PathBuf>, ApiError> {
    let r = record_for(s, id)?;
    if r.job.state != JobState::Done {
        return Err(ApiError::validation(
            "job_not_done",
            format!("animation {id} is {:?}", r.job.state).to_lowercase(),
        ));
    }
    Ok((0..r.job.frame_count)
        .map(|i| r.frame_dir.join(frame_file_name(i, s.pipeline.format)))
        .collect())
}
