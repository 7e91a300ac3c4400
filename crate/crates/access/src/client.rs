use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use gad_core::volume::{raw, GridMeta, VolumeBlock};
use gad_core::VoxelBox;
use reqwest::StatusCode;

use crate::dataset::DatasetDescriptor;
use crate::server::{HEADER_CHANNELS, HEADER_DIMS};
use crate::AccessError;

#[derive(Debug, Clone, PartialEq)]
pub struct RetryPolicy {
    /// Total attempts, including the first.
    pub attempts: u32,
    pub initial_backoff: Duration,
    pub multiplier: u32,
    pub timeout: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            attempts: 3,
            initial_backoff: Duration::from_millis(250),
            multiplier: 2,
            timeout: Duration::from_secs(30),
        }
    }
}

impl RetryPolicy {
    /// Delay before attempt `n` (1-based; attempt 1 has none).
    pub fn backoff(&self, n: u32) -> Duration {
        if n <= 1 {
            return Duration::ZERO;
        }
        self.initial_backoff * self.multiplier.saturating_pow(n - 2)
    }
}

/// One block to fetch.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockRequest {
    pub dataset: String,
    pub field: String,
    pub t: u32,
    pub quality: i32,
    pub region: VoxelBox,
}

impl BlockRequest {
    fn query(&self) -> [(&'static str, String); 3] {
        let [x1, y1, z1] = self.region.min;
        let [x2, y2, z2] = self.region.max;
        [
            ("t", self.t.to_string()),
            ("q", self.quality.to_string()),
            ("box", format!("{x1},{y1},{z1},{x2},{y2},{z2}")),
        ]
    }
}

/// HTTP client for a dataset server. Cheap to clone; clones share the
/// request counter.
#[derive(Debug, Clone)]
pub struct DatasetClient {
    base: String,
    http: reqwest::Client,
    retry: RetryPolicy,
    requests: Arc<AtomicU64>,
}

enum Attempt<T> {
    Done(T),
    Retry(AccessError),
}

impl DatasetClient {
    pub fn new(base_url: impl Into<String>) -> Result<Self, AccessError> {
        Self::with_retry(base_url, RetryPolicy::default())
    }

    pub fn with_retry(base_url: impl Into<String>, retry: RetryPolicy) -> Result<Self, AccessError> {
        let http = reqwest::Client::builder()
            .timeout(retry.timeout)
            .build()
            .map_err(|e| AccessError::Transport(e.to_string()))?;
        Ok(Self {
            base: base_url.into().trim_end_matches('/').to_string(),
            http,
            retry,
            requests: Arc::default(),
        })
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    /// HTTP requests sent by this client and its clones, retries included.
    pub fn request_count(&self) -> u64 {
        self.requests.load(Ordering::SeqCst)
    }

    async fn with_retries<T, F, Fut>(&self, what: &str, mut attempt: F) -> Result<T, AccessError>
    where
        F: FnMut() -> Fut,
        Fut: std::future::Future<Output = Result<Attempt<T>, AccessError>>,
    {
        let mut last = None;
        for n in 1..=self.retry.attempts.max(1) {
            let wait = self.retry.backoff(n);
            if !wait.is_zero() {
                tokio::time::sleep(wait).await;
            }
            self.requests.fetch_add(1, Ordering::SeqCst);
            match attempt().await? {
                Attempt::Done(v) => return Ok(v),
                Attempt::Retry(e) => {
                    tracing::warn!(what, attempt = n, error = %e, "retrying");
                    last = Some(e);
                }
            }
        }
        Err(last.unwrap_or_else(|| AccessError::Transport(format!("{what}: no attempts made"))))
    }

    async fn get(&self, url: &str, query: &[(&str, String)]) -> Result<Attempt<reqwest::Response>, AccessError> {
        match self.http.get(url).query(query).send().await {
            Ok(r) if r.status().is_success() => Ok(Attempt::Done(r)),
            Ok(r) => {
                let status = r.status();
                let body = r.text().await.unwrap_or_default();
                let msg = serde_json::from_str::<serde_json::Value>(&body)
                    .ok()
                    .and_then(|v| v.get("error").and_then(|e| e.as_str()).map(str::to_string))
                    .unwrap_or(body);
                let err = status_error(status, msg);
                if status.is_server_error() || status == StatusCode::TOO_MANY_REQUESTS {
                    Ok(Attempt::Retry(err))
                } else {
                    Err(err)
                }
            }
            Err(e) => Ok(Attempt::Retry(AccessError::Transport(e.to_string()))),
        }
    }

    pub async fn list_datasets(&self) -> Result<Vec<DatasetDescriptor>, AccessError> {
        let url = format!("{}/v1/datasets", self.base);
        self.with_retries("list datasets", || async {
            Ok(match self.get(&url, &[]).await? {
                Attempt::Done(r) => Attempt::Done(r.json().await.map_err(|e| AccessError::Protocol(e.to_string()))?),
                Attempt::Retry(e) => Attempt::Retry(e),
            })
        })
        .await
    }

    pub async fn dataset(&self, name: &str) -> Result<DatasetDescriptor, AccessError> {
        let url = format!("{}/v1/datasets/{name}", self.base);
        self.with_retries("describe dataset", || async {
            Ok(match self.get(&url, &[]).await? {
                Attempt::Done(r) => Attempt::Done(r.json().await.map_err(|e| AccessError::Protocol(e.to_string()))?),
                Attempt::Retry(e) => Attempt::Retry(e),
            })
        })
        .await
    }

    /// Fetches one block. The returned block's world origin is the box's
    /// lower corner and its spacing makes it span exactly the box.
    pub async fn fetch_block(&self, req: &BlockRequest) -> Result<VolumeBlock, AccessError> {
        let url = format!("{}/v1/datasets/{}/fields/{}/block", self.base, req.dataset, req.field);
        let query = req.query();
        let (dims, channels, bytes) = self
            .with_retries("fetch block", || async {
                let r = match self.get(&url, &query).await? {
                    Attempt::Done(r) => r,
                    Attempt::Retry(e) => return Ok(Attempt::Retry(e)),
                };
                let dims = parse_dims(r.headers().get(HEADER_DIMS))?;
                let channels: u8 = r
                    .headers()
                    .get(HEADER_CHANNELS)
                    .and_then(|v| v.to_str().ok())
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| AccessError::Protocol("missing or bad X-Channels header".into()))?;
                match r.bytes().await {
                    Ok(b) => Ok(Attempt::Done((dims, channels, b))),
                    Err(e) => Ok(Attempt::Retry(AccessError::Transport(e.to_string()))),
                }
            })
            .await?;
        let samples = raw::decode_f32_le(&bytes).map_err(|e| AccessError::Protocol(e.to_string()))?;
        let mut meta = GridMeta::new(req.field.clone(), dims, channels);
        let extent = req.region.extent();
        for a in 0..3 {
            meta.origin[a] = req.region.min[a] as f64;
            meta.spacing[a] = extent[a] as f64 / dims[a] as f64;
        }
        VolumeBlock::new(meta, req.region, req.quality, samples).map_err(|e| AccessError::Protocol(e.to_string()))
    }
}

fn parse_dims(v: Option<&reqwest::header::HeaderValue>) -> Result<[usize; 3], AccessError> {
    let bad = || AccessError::Protocol("missing or bad X-Dims header".into());
    let s = v.and_then(|v| v.to_str().ok()).ok_or_else(bad)?;
    let d: Vec<usize> = s.split(',').map(|p| p.trim().parse()).collect::<Result<_, _>>().map_err(|_| bad())?;
    d.try_into().map_err(|_| bad())
}

fn status_error(status: StatusCode, msg: String) -> AccessError {
    match status {
        StatusCode::NOT_FOUND => AccessError::NotFound(msg),
        StatusCode::RANGE_NOT_SATISFIABLE => AccessError::Range(msg),
        StatusCode::BAD_REQUEST => AccessError::BadRequest(msg),
        s => AccessError::Transport(format!("HTTP {s}: {msg}")),
    }
}
