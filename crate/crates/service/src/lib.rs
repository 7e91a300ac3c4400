//! HTTP facade over the animation pipeline.
//!
//! ```text
//! GET  /healthz
//! GET  /v1/datasets
//! POST /v1/animations                      AnimationSpec -> {job_id, state}
//! GET  /v1/animations/{id}                 -> AnimationJob
//! GET  /v1/animations/{id}/frames/{n}      -> image
//! GET  /v1/animations/{id}/gad             -> GadBundle
//! POST /v1/animations/{id}/gad             GadBundle -> {job_id, state}
//! POST /v1/chat/sessions                   {dataset?} -> {session_id}
//! POST /v1/chat/sessions/{id}/messages     {text, action?} -> ChatResponse
//! GET  /v1/chat/sessions/{id}              -> SessionView
//! ```
//!
//! Bodies are JSON. Errors are [`ApiError`] bodies.

mod api;
mod bundle;
mod chat;
mod error;
mod jobs;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::AtomicU64;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use gad_access::{AnimationCache, DatasetClient, RetryPolicy};
use gad_render::RenderSettings;
use gad_scripting::{LlmClient, MockLlm, Pipeline};
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

pub use api::SubmitResponse;
pub use bundle::{document_digest, GadBundle};
pub use chat::{ChatAction, ChatRequest, ChatResponse, SessionCreated, SessionView};
pub use error::ApiError;
pub use jobs::{stage_progress, AnimationJob, JobState};

/// Animations rendered at once.
pub const DEFAULT_WORKERS: usize = 2;

#[derive(Clone)]
pub struct ServiceConfig {
    pub bind: SocketAddr,
    pub dataset_url: String,
    pub cache_root: PathBuf,
    /// Frames go to `<output_root>/<job id>/`, edited GADs to
    /// `<output_root>/exports/<job id>/`.
    pub output_root: PathBuf,
    pub llm: Arc<dyn LlmClient>,
    pub workers: usize,
    pub render: RenderSettings,
    /// Static files served for paths no endpoint claims.
    pub ui_dir: Option<PathBuf>,
}

impl ServiceConfig {
    pub fn new(dataset_url: impl Into<String>, cache_root: impl Into<PathBuf>, output_root: impl Into<PathBuf>) -> Self {
        Self {
            bind: SocketAddr::from(([127, 0, 0, 1], 0)),
            dataset_url: dataset_url.into(),
            cache_root: cache_root.into(),
            output_root: output_root.into(),
            llm: Arc::new(MockLlm::new()),
            workers: DEFAULT_WORKERS,
            render: RenderSettings::default(),
            ui_dir: None,
        }
    }
}

impl std::fmt::Debug for ServiceConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ServiceConfig")
            .field("bind", &self.bind)
            .field("dataset_url", &self.dataset_url)
            .field("cache_root", &self.cache_root)
            .field("output_root", &self.output_root)
            .field("workers", &self.workers)
            .field("ui_dir", &self.ui_dir)
            .finish()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        #[source]
        source: std::io::Error,
    },
    #[error("configuration: {0}")]
    Config(String),
}

pub(crate) struct AppState {
    pub pipeline: Pipeline,
    pub health: DatasetClient,
    pub jobs: Arc<jobs::JobTable>,
    pub pool: jobs::WorkerPool,
    pub sessions: Mutex<HashMap<String, Arc<tokio::sync::Mutex<chat::ChatState>>>>,
    pub next_session: AtomicU64,
    pub llm: Arc<dyn LlmClient>,
}

pub(crate) type Shared = Arc<AppState>;

fn build_state(config: &ServiceConfig) -> Result<Shared, ServeError> {
    let client = DatasetClient::new(&config.dataset_url).map_err(|e| ServeError::Config(e.to_string()))?;
    let health = DatasetClient::with_retry(
        &config.dataset_url,
        RetryPolicy {
            attempts: 1,
            timeout: Duration::from_secs(2),
            ..RetryPolicy::default()
        },
    )
    .map_err(|e| ServeError::Config(e.to_string()))?;
    let cache = AnimationCache::open(&config.cache_root).map_err(|e| ServeError::Config(e.to_string()))?;
    config.render.validate().map_err(|e| ServeError::Config(e.to_string()))?;
    let pipeline = Pipeline::new(client, Arc::new(cache), &config.output_root).with_settings(config.render.clone());
    let jobs = Arc::new(jobs::JobTable::default());
    let pool = jobs::WorkerPool::start(config.workers, pipeline.clone(), jobs.clone());
    Ok(Arc::new(AppState {
        pipeline,
        health,
        jobs,
        pool,
        sessions: Mutex::default(),
        next_session: AtomicU64::new(1),
        llm: config.llm.clone(),
    }))
}

/// A running service.
pub struct ServiceHandle {
    addr: SocketAddr,
    state: Shared,
    shutdown: Option<oneshot::Sender<()>>,
    task: JoinHandle<std::io::Result<()>>,
}

impl ServiceHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Stops accepting connections, fails queued jobs and waits for running
    /// jobs to finish. Returns the final state of every job.
    pub async fn shutdown(mut self) -> std::io::Result<Vec<AnimationJob>> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        let served = (&mut self.task).await;
        self.state.pool.shutdown().await;
        served.map_err(std::io::Error::other)??;
        Ok(self.state.jobs.all())
    }

    /// Serves until `signal` resolves, then shuts down gracefully.
    pub async fn run_until(self, signal: impl std::future::Future<Output = ()>) -> std::io::Result<Vec<AnimationJob>> {
        signal.await;
        self.shutdown().await
    }
}

/// Binds and starts serving. An unreachable dataset server is not fatal;
/// it shows up in `/healthz`.
pub async fn serve(config: ServiceConfig) -> Result<ServiceHandle, ServeError> {
    let state = build_state(&config)?;
    let listener = tokio::net::TcpListener::bind(config.bind)
        .await
        .map_err(|source| ServeError::Bind { addr: config.bind, source })?;
    let addr = listener.local_addr().map_err(|source| ServeError::Bind { addr: config.bind, source })?;
    let app = api::app(state.clone(), config.ui_dir.as_deref());
    let (tx, rx) = oneshot::channel::<()>();
    let task = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = rx.await;
            })
            .await
    });
    tracing::info!(%addr, "service listening");
    Ok(ServiceHandle {
        addr,
        state,
        shutdown: Some(tx),
        task,
    })
}
