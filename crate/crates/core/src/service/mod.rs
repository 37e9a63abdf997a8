//! HTTP service: interview sessions, portrait uploads, render jobs, gallery.
//!
//! State lives in memory and is mirrored to a [`Store`] after each change;
//! on startup everything is reloaded and unfinished jobs are queued again.

mod http;
mod jobs;
mod store;

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use time::OffsetDateTime;
use tokio::sync::mpsc;

use crate::dialogue::{DialogueEngine, DialogueState};
use crate::persona::{
    AdjectiveTable, BigFiveProfile, Categorization, StyleMap, StyleSpec, DEFAULT_DOMINANCE_BAND,
};

pub use http::router;
pub use store::{content_hash, is_valid_ref, Store};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    pub workers: usize,
    pub max_upload_bytes: usize,
    pub dominance_band: f64,
}

impl ServiceConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        Self {
            data_dir: data_dir.into(),
            workers: 2,
            max_upload_bytes: 10 * 1024 * 1024,
            dominance_band: DEFAULT_DOMINANCE_BAND,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionResource {
    pub id: String,
    #[serde(with = "time::serde::rfc3339")]
    pub created_at: OffsetDateTime,
    pub state: DialogueState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<BigFiveProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell: Option<Categorization>,
    #[serde(default)]
    pub adjectives: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Failed,
}

/// Content refs of the three phase outputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseRefs {
    pub preprocessed: String,
    pub base: String,
    #[serde(rename = "final")]
    pub final_ref: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderJob {
    pub id: String,
    pub session_id: String,
    pub portrait_ref: String,
    pub cell: Categorization,
    pub adjectives: Vec<String>,
    pub style: StyleSpec,
    pub seed: u64,
    pub rng: String,
    pub status: JobStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_outputs: Option<PhaseRefs>,
    #[serde(with = "time::serde::rfc3339")]
    pub created_at: OffsetDateTime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalleryEntry {
    pub id: String,
    pub portrait_ref: String,
    pub final_ref: String,
    pub cell: Categorization,
    pub adjectives: Vec<String>,
    #[serde(with = "time::serde::rfc3339")]
    pub created_at: OffsetDateTime,
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Shared handle to the running service.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    config: ServiceConfig,
    engine: DialogueEngine,
    styles: StyleMap,
    adjectives: AdjectiveTable,
    store: Store,
    /// The async mutex doubles as the per-session turn lock.
    sessions: Mutex<HashMap<String, Arc<tokio::sync::Mutex<SessionResource>>>>,
    jobs: Mutex<HashMap<String, RenderJob>>,
    gallery: Mutex<Vec<GalleryEntry>>,
    queue: mpsc::UnboundedSender<String>,
}

impl AppState {
    /// Loads persisted state and starts the render workers. Must be called
    /// inside a Tokio runtime.
    pub fn new(
        config: ServiceConfig,
        engine: DialogueEngine,
        styles: StyleMap,
        adjectives: AdjectiveTable,
    ) -> Result<Self, ServiceError> {
        let store = Store::open(&config.data_dir)?;
        let sessions = store
            .load_all::<SessionResource>("sessions")?
            .into_iter()
            .map(|s| (s.id.clone(), Arc::new(tokio::sync::Mutex::new(s))))
            .collect();
        let mut gallery: Vec<GalleryEntry> = store.load_all("gallery")?;
        sort_gallery(&mut gallery);
        let mut pending: Vec<RenderJob> = Vec::new();
        let mut jobs = HashMap::new();
        for mut job in store.load_all::<RenderJob>("jobs")? {
            if matches!(job.status, JobStatus::Queued | JobStatus::Running) {
                job.status = JobStatus::Queued;
                pending.push(job.clone());
            }
            jobs.insert(job.id.clone(), job);
        }
        pending.sort_by(|a, b| {
            a.created_at
                .cmp(&b.created_at)
                .then_with(|| a.id.cmp(&b.id))
        });

        let (tx, rx) = mpsc::unbounded_channel();
        let workers = config.workers.max(1);
        let state = Self {
            inner: Arc::new(Inner {
                config,
                engine,
                styles,
                adjectives,
                store,
                sessions: Mutex::new(sessions),
                jobs: Mutex::new(jobs),
                gallery: Mutex::new(gallery),
                queue: tx,
            }),
        };
        jobs::spawn_workers(state.clone(), rx, workers);
        for job in pending {
            tracing::info!(job = %job.id, "requeueing unfinished job");
            state.enqueue(job.id);
        }
        Ok(state)
    }

    /// Built-in script, lexicon, style map and adjective table.
    pub fn with_defaults(config: ServiceConfig) -> Result<Self, ServiceError> {
        Self::new(
            config,
            DialogueEngine::with_defaults(),
            StyleMap::builtin(),
            AdjectiveTable::builtin(),
        )
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.inner.config
    }

    pub fn store(&self) -> &Store {
        &self.inner.store
    }

    pub fn job(&self, id: &str) -> Option<RenderJob> {
        self.inner.jobs.lock().get(id).cloned()
    }

    pub fn gallery(&self) -> Vec<GalleryEntry> {
        self.inner.gallery.lock().clone()
    }

    fn session(&self, id: &str) -> Option<Arc<tokio::sync::Mutex<SessionResource>>> {
        self.inner.sessions.lock().get(id).cloned()
    }

    fn enqueue(&self, id: String) {
        // The receiver lives as long as the workers, which never exit first.
        let _ = self.inner.queue.send(id);
    }

    fn update_job(&self, job: &RenderJob) -> std::io::Result<()> {
        self.inner.store.save("jobs", &job.id, job)?;
        self.inner.jobs.lock().insert(job.id.clone(), job.clone());
        Ok(())
    }
}

/// Newest first; ids break timestamp ties so the order is total.
fn sort_gallery(g: &mut [GalleryEntry]) {
    g.sort_by(|a, b| {
        b.created_at
            .cmp(&a.created_at)
            .then_with(|| b.id.cmp(&a.id))
    });
}

/// Seeds stay below 2^53 so they survive a round trip through JavaScript.
fn fresh_seed() -> u64 {
    rand::random::<u64>() >> 11
}
