#![allow(dead_code)]

use std::path::PathBuf;
use std::time::{Duration, Instant};

use gad_access::{spawn_dataset_server, AnimationSpec, Catalog, ServerHandle, SyntheticDataset, TimeRange};
use gad_core::VoxelBox;
use gad_render::RenderSettings;
use gad_service::{serve, AnimationJob, ApiError, JobState, ServiceConfig, ServiceHandle};
use serde_json::Value;

pub struct Rig {
    pub data: ServerHandle,
    pub service: ServiceHandle,
    pub http: reqwest::Client,
    pub dir: tempfile::TempDir,
}

pub fn config(data_url: &str, dir: &std::path::Path) -> ServiceConfig {
    let mut c = ServiceConfig::new(data_url, dir.join("cache"), dir.join("out"));
    c.render = RenderSettings::default().with_size(24, 24);
    c
}

pub async fn data_server() -> ServerHandle {
    spawn_dataset_server(Catalog::new().with(SyntheticDataset::mini_ocean()), "127.0.0.1:0".parse().unwrap())
        .await
        .unwrap()
}

pub async fn rig_with(f: impl FnOnce(&mut ServiceConfig)) -> Rig {
    let data = data_server().await;
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(&data.url(), dir.path());
    f(&mut c);
    let service = serve(c).await.unwrap();
    Rig { data, service, http: reqwest::Client::new(), dir }
}

pub async fn rig() -> Rig {
    rig_with(|_| {}).await
}

pub fn small_spec(days: u32, q: i32) -> AnimationSpec {
    AnimationSpec::new(VoxelBox::new([32, 32, 0], [96, 96, 16]), TimeRange::new(0, days - 1, 1), q, "temperature", false)
}

impl Rig {
    pub fn url(&self, path: &str) -> String {
        format!("{}{path}", self.service.url())
    }

    pub fn out(&self) -> PathBuf {
        self.dir.path().join("out")
    }

    pub async fn get(&self, path: &str) -> reqwest::Response {
        self.http.get(self.url(path)).send().await.unwrap()
    }

    pub async fn post(&self, path: &str, body: &impl serde::Serialize) -> reqwest::Response {
        self.http.post(self.url(path)).json(body).send().await.unwrap()
    }

    pub async fn post_raw(&self, path: &str, body: &'static str) -> reqwest::Response {
        self.http
            .post(self.url(path))
            .header("content-type", "application/json")
            .body(body)
            .send()
            .await
            .unwrap()
    }

    pub async fn job(&self, id: &str) -> AnimationJob {
        let r = self.get(&format!("/v1/animations/{id}")).await;
        assert_eq!(r.status(), 200);
        r.json().await.unwrap()
    }

    /// Polls until the job is terminal, returning every snapshot seen.
    pub async fn wait(&self, id: &str) -> Vec<AnimationJob> {
        let deadline = Instant::now() + Duration::from_secs(120);
        let mut seen = Vec::new();
        loop {
            let j = self.job(id).await;
            let terminal = j.state == JobState::Done || j.state == JobState::Failed;
            seen.push(j);
            if terminal {
                return seen;
            }
            assert!(Instant::now() < deadline, "job {id} did not finish");
            tokio::time::sleep(Duration::from_millis(5)).await;
        }
    }
}

pub async fn api_error(r: reqwest::Response) -> ApiError {
    let status = r.status().as_u16();
    let e: ApiError = r.json().await.unwrap();
    assert_eq!(e.http_status, status);
    assert!(!e.code.is_empty());
    e
}

pub fn json_of(v: &impl serde::Serialize) -> Value {
    serde_json::to_value(v).unwrap()
}
