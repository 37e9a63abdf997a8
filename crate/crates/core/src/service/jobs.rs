//! Render workers. Each worker takes one job at a time off the shared queue
//! and runs it on the blocking pool.

use std::sync::Arc;

use time::OffsetDateTime;
use tokio::sync::{mpsc, Mutex};

use crate::render::{render_portrait, RasterImage};

use super::{sort_gallery, AppState, GalleryEntry, JobStatus, PhaseRefs, RenderJob};

pub(super) fn spawn_workers(state: AppState, rx: mpsc::UnboundedReceiver<String>, workers: usize) {
    let rx = Arc::new(Mutex::new(rx));
    for worker in 0..workers {
        let (state, rx) = (state.clone(), rx.clone());
        tokio::spawn(async move {
            loop {
                let Some(id) = rx.lock().await.recv().await else {
                    break;
                };
                let state = state.clone();
                let result = tokio::task::spawn_blocking(move || run_job(&state, &id)).await;
                if let Err(e) = result {
                    tracing::error!(worker, error = %e, "render worker task failed");
                }
            }
        });
    }
}

fn run_job(state: &AppState, id: &str) {
    let Some(mut job) = state.job(id) else {
        tracing::warn!(job = id, "queued job vanished");
        return;
    };
    if job.status != JobStatus::Queued {
        return;
    }
    job.status = JobStatus::Running;
    if let Err(e) = state.update_job(&job) {
        tracing::error!(job = id, error = %e, "cannot persist job");
    }
    let started = std::time::Instant::now();
    match execute(state, &job) {
        Ok(refs) => {
            let entry = GalleryEntry {
                id: job.id.clone(),
                portrait_ref: job.portrait_ref.clone(),
                final_ref: refs.final_ref.clone(),
                cell: job.cell,
                adjectives: job.adjectives.clone(),
                created_at: OffsetDateTime::now_utc(),
            };
            job.status = JobStatus::Done;
            job.phase_outputs = Some(refs);
            // Persist the job before listing it, so every listed entry has
            // its artifacts on disk.
            let saved = state
                .update_job(&job)
                .and_then(|_| state.store().save("gallery", &entry.id, &entry));
            match saved {
                Ok(()) => {
                    let mut g = state.inner.gallery.lock();
                    g.push(entry);
                    sort_gallery(&mut g);
                    tracing::info!(
                        job = id,
                        elapsed_ms = started.elapsed().as_millis() as u64,
                        "render done"
                    );
                }
                Err(e) => fail(state, job, format!("cannot persist result: {e}")),
            }
        }
        Err(message) => fail(state, job, message),
    }
}

fn fail(state: &AppState, mut job: RenderJob, message: String) {
    tracing::warn!(job = %job.id, error = %message, "render failed");
    job.status = JobStatus::Failed;
    job.error = Some(message);
    if let Err(e) = state.update_job(&job) {
        tracing::error!(job = %job.id, error = %e, "cannot persist failed job");
    }
}

fn execute(state: &AppState, job: &RenderJob) -> Result<PhaseRefs, String> {
    let store = state.store();
    let (path, _) = store
        .find_blob(&job.portrait_ref)
        .ok_or_else(|| format!("portrait {} not found", job.portrait_ref))?;
    let image = RasterImage::open(&path).map_err(|e| e.to_string())?;
    let render = render_portrait(&image, &job.style, job.seed, None).map_err(|e| e.to_string())?;
    let mut refs = Vec::with_capacity(3);
    for (i, out) in render.phase_outputs().into_iter().enumerate() {
        let png = out.encode_png().map_err(|e| e.to_string())?;
        refs.push(store.put_blob(&png, "png").map_err(|e| e.to_string())?);
        store
            .write_phase(&job.id, i + 1, &png)
            .map_err(|e| e.to_string())?;
    }
    let [preprocessed, base, final_ref]: [String; 3] = refs.try_into().expect("three phases");
    Ok(PhaseRefs {
        preprocessed,
        base,
        final_ref,
    })
}
