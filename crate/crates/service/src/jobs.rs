//! Animation jobs: the table the endpoints read and the FIFO worker pool
//! that runs them.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

use gad_access::AnimationSpec;
use gad_scripting::{Pipeline, Progress, Stage};
use serde::{Deserialize, Serialize};
use tokio::sync::mpsc;
use tokio::task::JoinHandle;

use crate::error::ApiError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobState {
    Queued,
    Fetching,
    Rendering,
    Done,
    Failed,
}

impl JobState {
    fn rank(self) -> u8 {
        match self {
            JobState::Queued => 0,
            JobState::Fetching => 1,
            JobState::Rendering => 2,
            JobState::Done | JobState::Failed => 3,
        }
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, JobState::Done | JobState::Failed)
    }

    /// Forward along queued, fetching, rendering, then done. Any live job
    /// may fail.
    pub fn can_become(self, next: JobState) -> bool {
        match next {
            JobState::Failed => !self.is_terminal(),
            JobState::Done => self == JobState::Rendering,
            _ => next.rank() == self.rank() + 1,
        }
    }
}

/// Snapshot returned by `GET /v1/animations/{id}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnimationJob {
    pub id: String,
    pub state: JobState,
    pub progress: f64,
    /// Frames written so far.
    pub frame_count: usize,
    /// Frames the animation will have, once known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_total: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_code: Option<String>,
}

impl AnimationJob {
    pub fn queued(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            state: JobState::Queued,
            progress: 0.0,
            frame_count: 0,
            frame_total: None,
            error: None,
            error_code: None,
        }
    }

    /// An animation whose frames are already on disk.
    pub fn finished(id: impl Into<String>, frames: usize) -> Self {
        Self {
            state: JobState::Done,
            progress: 1.0,
            frame_count: frames,
            frame_total: Some(frames),
            ..Self::queued(id)
        }
    }

    /// Moves to `next` if the transition is allowed; returns whether it moved.
    pub fn advance(&mut self, next: JobState) -> bool {
        if self.state == next {
            return true;
        }
        if !self.state.can_become(next) {
            return false;
        }
        self.state = next;
        if next == JobState::Done {
            self.progress = 1.0;
        }
        true
    }

    /// Raises progress to `p`; lower values are ignored.
    pub fn report(&mut self, p: f64) {
        if !self.state.is_terminal() && p.is_finite() {
            self.progress = self.progress.max(p.clamp(0.0, 1.0));
        }
    }

    pub fn fail(&mut self, e: &ApiError) {
        if self.advance(JobState::Failed) {
            self.error = Some(e.message.clone());
            self.error_code = Some(e.code.clone());
        }
    }
}

/// Overall progress for `done` of `total` units in `stage`: fetching fills
/// the first half and rendering the second.
pub fn stage_progress(stage: Stage, done: usize, total: usize) -> f64 {
    let f = if total == 0 { 1.0 } else { done as f64 / total as f64 };
    match stage {
        Stage::Fetching => 0.5 * f,
        Stage::Rendering => 0.5 + 0.5 * f,
    }
}

#[derive(Debug, Clone)]
pub enum JobWork {
    /// Materialize and render a spec.
    Spec(AnimationSpec),
    /// Render an already written GAD bundle.
    Gad(PathBuf),
}

#[derive(Debug, Clone)]
pub(crate) struct JobRecord {
    pub job: AnimationJob,
    pub frame_dir: PathBuf,
    pub gad_root: Option<PathBuf>,
}

/// Shared job table.
#[derive(Default)]
pub(crate) struct JobTable {
    jobs: Mutex<HashMap<String, JobRecord>>,
}

impl JobTable {
    pub fn get(&self, id: &str) -> Option<JobRecord> {
        self.jobs.lock().unwrap().get(id).cloned()
    }

    pub fn snapshot(&self, id: &str) -> Option<AnimationJob> {
        self.get(id).map(|r| r.job)
    }

    pub fn update<R>(&self, id: &str, f: impl FnOnce(&mut JobRecord) -> R) -> Option<R> {
        self.jobs.lock().unwrap().get_mut(id).map(f)
    }

    /// Inserts `record` unless a live or finished job already holds `id`.
    /// Returns the job that now holds the id and whether it is new.
    pub fn claim(&self, record: JobRecord) -> (AnimationJob, bool) {
        let mut jobs = self.jobs.lock().unwrap();
        if let Some(existing) = jobs.get(&record.job.id) {
            if existing.job.state != JobState::Failed {
                return (existing.job.clone(), false);
            }
        }
        let job = record.job.clone();
        jobs.insert(job.id.clone(), record);
        (job, true)
    }

    pub fn all(&self) -> Vec<AnimationJob> {
        let mut v: Vec<_> = self.jobs.lock().unwrap().values().map(|r| r.job.clone()).collect();
        v.sort_by(|a, b| a.id.cmp(&b.id));
        v
    }

    pub fn counts(&self) -> HashMap<JobState, usize> {
        let mut out = HashMap::new();
        for r in self.jobs.lock().unwrap().values() {
            *out.entry(r.job.state).or_default() += 1;
        }
        out
    }
}

struct Queued {
    id: String,
    work: JobWork,
}

/// Bounded pool of workers draining one FIFO queue.
pub(crate) struct WorkerPool {
    tx: Mutex<Option<mpsc::UnboundedSender<Queued>>>,
    closing: Arc<AtomicBool>,
    workers: Mutex<Vec<JoinHandle<()>>>,
}

impl WorkerPool {
    pub fn start(size: usize, pipeline: Pipeline, table: Arc<JobTable>) -> Self {
        let (tx, rx) = mpsc::unbounded_channel::<Queued>();
        let rx = Arc::new(tokio::sync::Mutex::new(rx));
        let closing = Arc::new(AtomicBool::new(false));
        let workers = (0..size.max(1))
            .map(|_| {
                let rx = rx.clone();
                let pipeline = pipeline.clone();
                let table = table.clone();
                let closing = closing.clone();
                tokio::spawn(async move {
                    loop {
                        let next = rx.lock().await.recv().await;
                        let Some(q) = next else { break };
                        if closing.load(Ordering::SeqCst) {
                            let e = ApiError::new(
                                axum::http::StatusCode::SERVICE_UNAVAILABLE,
                                "shutting_down",
                                "service stopped before the job started",
                            );
                            table.update(&q.id, |r| r.job.fail(&e));
                            continue;
                        }
                        run_job(&q, &pipeline, &table).await;
                    }
                })
            })
            .collect();
        Self {
            tx: Mutex::new(Some(tx)),
            closing,
            workers: Mutex::new(workers),
        }
    }

    pub fn submit(&self, id: String, work: JobWork) -> Result<(), ApiError> {
        let tx = self.tx.lock().unwrap();
        let closed = || ApiError::new(axum::http::StatusCode::SERVICE_UNAVAILABLE, "shutting_down", "service is shutting down");
        tx.as_ref().ok_or_else(closed)?.send(Queued { id, work }).map_err(|_| closed())
    }

    /// Stops accepting work, fails jobs still queued and waits for running
    /// ones to finish.
    pub async fn shutdown(&self) {
        self.closing.store(true, Ordering::SeqCst);
        self.tx.lock().unwrap().take();
        let workers = std::mem::take(&mut *self.workers.lock().unwrap());
        for w in workers {
            let _ = w.await;
        }
    }
}

async fn run_job(q: &Queued, pipeline: &Pipeline, table: &Arc<JobTable>) {
    let id = q.id.clone();
    let t = table.clone();
    let progress: Progress = Arc::new(move |stage, done, total| {
        t.update(&id, |r| {
            let next = match stage {
                Stage::Fetching => JobState::Fetching,
                Stage::Rendering => JobState::Rendering,
            };
            if r.job.advance(next) {
                r.job.report(stage_progress(stage, done, total));
                if stage == Stage::Rendering {
                    r.job.frame_total = Some(total);
                    r.job.frame_count = r.job.frame_count.max(done);
                }
            }
        });
    });
    table.update(&q.id, |r| r.job.advance(JobState::Fetching));
    tracing::info!(job = %q.id, "job started");

    let result = match &q.work {
        JobWork::Spec(spec) => pipeline.generate(spec, progress.clone()).await.map(|g| (g.gad_root, g.frames.len())),
        JobWork::Gad(root) => {
            progress(Stage::Fetching, 1, 1);
            let frame_dir = table.get(&q.id).map(|r| r.frame_dir).unwrap_or_else(|| pipeline.output_root.join(&q.id));
            pipeline.render_gad(root, &frame_dir, progress.clone()).await.map(|f| (root.clone(), f.len()))
        }
    };
    match result {
        Ok((gad_root, frames)) => {
            table.update(&q.id, |r| {
                r.gad_root = Some(gad_root);
                r.job.advance(JobState::Rendering);
                r.job.frame_count = frames;
                r.job.frame_total = Some(frames);
                r.job.advance(JobState::Done);
            });
            tracing::info!(job = %q.id, frames, "job done");
        }
        Err(e) => {
            let e = ApiError::from(e);
            tracing::warn!(job = %q.id, error = %e, "job failed");
            table.update(&q.id, |r| r.job.fail(&e));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transitions() {
        use JobState::*;
        assert!(Queued.can_become(Fetching));
        assert!(Fetching.can_become(Rendering));
        assert!(Rendering.can_become(Done));
        assert!(!Queued.can_become(Done));
        assert!(!Queued.can_become(Rendering));
        assert!(!Fetching.can_become(Done));
        assert!(!Rendering.can_become(Fetching));
        assert!(!Done.can_become(Failed));
        assert!(!Failed.can_become(Queued));
        for s in [Queued, Fetching, Rendering] {
            assert!(s.can_become(Failed));
        }
    }

    #[test]
    fn progress_only_rises() {
        let mut j = AnimationJob::queued("a");
        j.advance(JobState::Fetching);
        j.report(0.3);
        j.report(0.1);
        assert_eq!(j.progress, 0.3);
        j.advance(JobState::Rendering);
        j.advance(JobState::Done);
        j.report(0.2);
        assert_eq!(j.progress, 1.0);
        assert!(!j.advance(JobState::Fetching));
    }

    #[test]
    fn stage_halves() {
        assert_eq!(stage_progress(Stage::Fetching, 0, 10), 0.0);
        assert_eq!(stage_progress(Stage::Fetching, 10, 10), 0.5);
        assert_eq!(stage_progress(Stage::Rendering, 5, 10), 0.75);
        assert_eq!(stage_progress(Stage::Rendering, 0, 0), 1.0);
    }
}
