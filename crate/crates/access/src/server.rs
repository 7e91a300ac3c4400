//! HTTP dataset server over a [`Catalog`].
//!
//! ```text
//! GET /v1/datasets
//! GET /v1/datasets/{name}
//! GET /v1/datasets/{name}/fields/{field}/block?t=..&q=..&box=x1,y1,z1,x2,y2,z2
//! ```
//!
//! Blocks come back as raw little-endian `f32` with `X-Dims: nx,ny,nz` and
//! `X-Channels` headers.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};
use std::sync::Arc;

use axum::body::Body;
use axum::extract::{Path, Query, Request, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use gad_core::volume::{raw, VolumeError};
use gad_core::VoxelBox;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

use crate::dataset::Catalog;

pub const HEADER_DIMS: &str = "x-dims";
pub const HEADER_CHANNELS: &str = "x-channels";
pub const HEADER_QUALITY: &str = "x-quality";

#[derive(Clone)]
struct ServerState {
    catalog: Arc<Catalog>,
    counters: Arc<Counters>,
}

#[derive(Default)]
struct Counters {
    requests: AtomicU64,
    block_requests: AtomicU64,
    fail_next: AtomicU32,
}

fn error(status: StatusCode, msg: impl Into<String>) -> Response {
    (status, Json(serde_json::json!({ "error": msg.into() }))).into_response()
}

pub fn router(catalog: Catalog) -> Router {
    router_with(ServerState {
        catalog: Arc::new(catalog),
        counters: Arc::default(),
    })
}

fn router_with(state: ServerState) -> Router {
    Router::new()
        .route("/v1/datasets", get(list))
        .route("/v1/datasets/{name}", get(describe))
        .route("/v1/datasets/{name}/fields/{field}/block", get(block))
        .layer(middleware::from_fn_with_state(state.clone(), count_and_fault))
        .with_state(state)
}

async fn count_and_fault(State(s): State<ServerState>, req: Request, next: Next) -> Response {
    s.counters.requests.fetch_add(1, Ordering::SeqCst);
    let injected = s
        .counters
        .fail_next
        .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |n| n.checked_sub(1))
        .is_ok();
    if injected {
        return error(StatusCode::SERVICE_UNAVAILABLE, "injected fault");
    }
    next.run(req).await
}

async fn list(State(s): State<ServerState>) -> Response {
    Json(s.catalog.descriptors()).into_response()
}

async fn describe(State(s): State<ServerState>, Path(name): Path<String>) -> Response {
    match s.catalog.get(&name) {
        Some(ds) => Json(ds.descriptor().clone()).into_response(),
        None => error(StatusCode::NOT_FOUND, format!("unknown dataset {name}")),
    }
}

struct BlockQuery {
    t: u32,
    q: i32,
    region: VoxelBox,
}

fn parse_query(q: &HashMap<String, String>) -> Result<BlockQuery, String> {
    let get = |k: &str| q.get(k).ok_or_else(|| format!("missing query parameter {k}"));
    let t = get("t")?.parse().map_err(|_| "t must be a non-negative integer".to_string())?;
    let quality: i32 = get("q")?.parse().map_err(|_| "q must be an integer".to_string())?;
    if quality > 0 {
        return Err(format!("quality {quality} must be <= 0"));
    }
    let coords: Vec<u32> = get("box")?
        .split(',')
        .map(|c| c.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| "box must be six non-negative integers".to_string())?;
    let [x1, y1, z1, x2, y2, z2]: [u32; 6] = coords
        .try_into()
        .map_err(|_| "box must be six non-negative integers".to_string())?;
    Ok(BlockQuery {
        t,
        q: quality,
        region: VoxelBox::new([x1, y1, z1], [x2, y2, z2]),
    })
}

async fn block(
    State(s): State<ServerState>,
    Path((name, field)): Path<(String, String)>,
    Query(params): Query<HashMap<String, String>>,
) -> Response {
    s.counters.block_requests.fetch_add(1, Ordering::SeqCst);
    let Some(ds) = s.catalog.get(&name) else {
        return error(StatusCode::NOT_FOUND, format!("unknown dataset {name}"));
    };
    if ds.descriptor().field(&field).is_none() {
        return error(StatusCode::NOT_FOUND, format!("dataset {name} has no field {field}"));
    }
    let bq = match parse_query(&params) {
        Ok(b) => b,
        Err(m) => return error(StatusCode::BAD_REQUEST, m),
    };
    let result = tokio::task::spawn_blocking(move || ds.extract(&field, &bq.region, bq.q, bq.t)).await;
    let block = match result {
        Ok(Ok(Some(b))) => b,
        Ok(Ok(None)) => return error(StatusCode::NOT_FOUND, "unknown field"),
        Ok(Err(e @ (VolumeError::OutOfBounds { .. } | VolumeError::TimestepOutOfRange { .. }))) => {
            return error(StatusCode::RANGE_NOT_SATISFIABLE, e.to_string())
        }
        Ok(Err(e @ VolumeError::InvalidQuality(_))) => return error(StatusCode::BAD_REQUEST, e.to_string()),
        Ok(Err(e)) => return error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        Err(e) => return error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    };
    let [nx, ny, nz] = block.dims();
    let bytes = raw::encode_f32_le(&block.samples);
    let mut resp = Response::new(Body::from(bytes));
    let h = resp.headers_mut();
    h.insert(header::CONTENT_TYPE, HeaderValue::from_static("application/octet-stream"));
    let hv = |s: String| HeaderValue::from_str(&s).expect("ascii header");
    h.insert(HEADER_DIMS, hv(format!("{nx},{ny},{nz}")));
    h.insert(HEADER_CHANNELS, hv(block.channels().to_string()));
    h.insert(HEADER_QUALITY, hv(block.quality.to_string()));
    resp
}

/// A running server. Dropping the handle without [`ServerHandle::shutdown`]
/// leaves the task running until the runtime stops.
pub struct ServerHandle {
    addr: SocketAddr,
    counters: Arc<Counters>,
    shutdown: Option<oneshot::Sender<()>>,
    task: JoinHandle<std::io::Result<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Requests received so far, including failed ones.
    pub fn request_count(&self) -> u64 {
        self.counters.requests.load(Ordering::SeqCst)
    }

    pub fn block_request_count(&self) -> u64 {
        self.counters.block_requests.load(Ordering::SeqCst)
    }

    /// Makes the next `n` requests fail with 503.
    pub fn fail_next(&self, n: u32) {
        self.counters.fail_next.store(n, Ordering::SeqCst);
    }

    pub async fn shutdown(mut self) -> std::io::Result<()> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        match (&mut self.task).await {
            Ok(r) => r,
            Err(e) => Err(std::io::Error::other(e)),
        }
    }

    /// Waits until the server stops on its own (or forever).
    pub async fn wait(self) -> std::io::Result<()> {
        let ServerHandle { task, shutdown, .. } = self;
        let _keep = shutdown;
        task.await.map_err(std::io::Error::other)?
    }
}

/// Binds `addr` (port 0 picks a free port) and serves `catalog`.
pub async fn spawn_dataset_server(catalog: Catalog, addr: SocketAddr) -> std::io::Result<ServerHandle> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    let addr = listener.local_addr()?;
    let state = ServerState {
        catalog: Arc::new(catalog),
        counters: Arc::default(),
    };
    let counters = state.counters.clone();
    let app = router_with(state);
    let (tx, rx) = oneshot::channel::<()>();
    let task = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = rx.await;
            })
            .await
    });
    tracing::info!(%addr, "dataset server listening");
    Ok(ServerHandle {
        addr,
        counters,
        shutdown: Some(tx),
        task,
    })
}
