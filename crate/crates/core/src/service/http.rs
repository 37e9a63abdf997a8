use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Multipart, Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use time::OffsetDateTime;
use tower_http::cors::CorsLayer;
use tower_http::trace::TraceLayer;

use crate::assessment::assess_state;
use crate::dialogue::{AgentTurn, DialogueError, EmotionHint, Phase};
use crate::persona::{BigFiveProfile, Categorization};
use crate::render::{RasterImage, RenderError, MIN_DIMENSION, RNG_ALGORITHM};

use super::{fresh_seed, AppState, JobStatus, RenderJob, SessionResource};

/// Room for multipart framing on top of the image itself.
const MULTIPART_OVERHEAD: usize = 64 * 1024;

pub fn router(state: AppState) -> Router {
    let body_limit = state.config().max_upload_bytes + MULTIPART_OVERHEAD;
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/turns", post(post_turn))
        .route("/portraits", post(upload_portrait))
        .route("/render", post(create_render))
        .route("/jobs/{id}", get(get_job))
        .route("/gallery", get(get_gallery))
        .route("/artifacts/{ref}", get(get_artifact))
        .layer(DefaultBodyLimit::max(body_limit))
        // The studio page may be served from another origin; the API has no
        // credentials to protect.
        .layer(CorsLayer::permissive())
        .layer(TraceLayer::new_for_http())
        .with_state(state)
}

#[derive(Debug)]
struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        tracing::error!(error = %e, "internal error");
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Parses a JSON body; every malformed body is a 400. An empty body reads as
/// `{}` when `T` allows it.
fn parse_body<T: DeserializeOwned>(body: &[u8]) -> ApiResult<T> {
    let body = if body.iter().all(u8::is_ascii_whitespace) {
        &b"{}"[..]
    } else {
        body
    };
    serde_json::from_slice(body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("invalid JSON body: {e}")))
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    #[serde(default)]
    shuffle_seed: Option<u64>,
}

#[derive(Serialize)]
struct SessionCreated {
    session: SessionResource,
    turn: AgentTurn,
}

async fn create_session(
    State(state): State<AppState>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<SessionCreated>)> {
    let req: CreateSession = parse_body(&body)?;
    let (dialogue, turn) = state
        .inner
        .engine
        .start_session_with_order(req.shuffle_seed);
    let session = SessionResource {
        id: uuid::Uuid::new_v4().to_string(),
        created_at: OffsetDateTime::now_utc(),
        state: dialogue,
        profile: None,
        cell: None,
        adjectives: Vec::new(),
    };
    state
        .store()
        .save("sessions", &session.id, &session)
        .map_err(ApiError::internal)?;
    state.inner.sessions.lock().insert(
        session.id.clone(),
        Arc::new(tokio::sync::Mutex::new(session.clone())),
    );
    tracing::info!(session = %session.id, "session created");
    Ok((StatusCode::CREATED, Json(SessionCreated { session, turn })))
}

fn no_session(id: &str) -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, format!("no session {id}"))
}

async fn get_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Json<SessionResource>> {
    let session = state.session(&id).ok_or_else(|| no_session(&id))?;
    let snapshot = session.lock().await.clone();
    Ok(Json(snapshot))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TurnRequest {
    text: String,
    #[serde(default)]
    emotion_hint: Option<EmotionHint>,
}

#[derive(Serialize)]
struct TurnResponse {
    turn: AgentTurn,
    phase: Phase,
    #[serde(skip_serializing_if = "Option::is_none")]
    profile: Option<BigFiveProfile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cell: Option<Categorization>,
    #[serde(skip_serializing_if = "Option::is_none")]
    adjectives: Option<Vec<String>>,
}

async fn post_turn(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<TurnResponse>> {
    let session = state.session(&id).ok_or_else(|| no_session(&id))?;
    let req: TurnRequest = parse_body(&body)?;
    // Concurrent turns on one session are refused, never merged.
    let mut guard = session.try_lock().map_err(|_| {
        ApiError::new(
            StatusCode::CONFLICT,
            "another turn is in progress for this session",
        )
    })?;
    if guard.state.is_closed() {
        return Err(ApiError::new(StatusCode::CONFLICT, "session is closed"));
    }
    let mut next = guard.clone();
    let turn = state
        .inner
        .engine
        .user_turn(&mut next.state, &req.text, req.emotion_hint)
        .map_err(|e| match e {
            DialogueError::SessionClosed | DialogueError::InvalidState { .. } => {
                ApiError::new(StatusCode::CONFLICT, e.to_string())
            }
            DialogueError::Config(_) => ApiError::internal(e),
        })?;
    let closed = next.state.is_closed();
    if closed {
        let a = assess_state(
            &state.inner.engine,
            &next.state,
            state.config().dominance_band,
            &state.inner.adjectives,
        )
        .map_err(ApiError::internal)?;
        tracing::info!(session = %id, cell = %a.cell.label(), "session categorized");
        next.profile = Some(a.profile);
        next.cell = Some(a.cell);
        next.adjectives = a.adjectives;
    }
    state
        .store()
        .save("sessions", &id, &next)
        .map_err(ApiError::internal)?;
    *guard = next;
    Ok(Json(TurnResponse {
        turn,
        phase: guard.state.phase,
        profile: guard.profile.filter(|_| closed),
        cell: guard.cell.filter(|_| closed),
        adjectives: closed.then(|| guard.adjectives.clone()),
    }))
}

#[derive(Serialize)]
struct PortraitCreated {
    #[serde(rename = "ref")]
    portrait_ref: String,
    width: u32,
    height: u32,
}

async fn upload_portrait(
    State(state): State<AppState>,
    mut multipart: Multipart,
) -> ApiResult<(StatusCode, Json<PortraitCreated>)> {
    let max = state.config().max_upload_bytes;
    let too_large = || {
        ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            format!("portrait exceeds {max} bytes"),
        )
    };
    let bad_multipart = |e: axum::extract::multipart::MultipartError| {
        if e.status() == StatusCode::PAYLOAD_TOO_LARGE {
            too_large()
        } else {
            ApiError::new(StatusCode::BAD_REQUEST, e.body_text())
        }
    };
    let mut bytes = None;
    while let Some(field) = multipart.next_field().await.map_err(bad_multipart)? {
        if field.file_name().is_some() || field.name() == Some("image") {
            bytes = Some(field.bytes().await.map_err(bad_multipart)?);
            break;
        }
    }
    let bytes = bytes.ok_or_else(|| {
        ApiError::new(StatusCode::BAD_REQUEST, "multipart body has no image field")
    })?;
    if bytes.len() > max {
        return Err(too_large());
    }
    let image = RasterImage::decode(&bytes).map_err(|e| match e {
        RenderError::UnsupportedFormat(_) | RenderError::Decode(_) => {
            ApiError::new(StatusCode::UNSUPPORTED_MEDIA_TYPE, e.to_string())
        }
        other => ApiError::internal(other),
    })?;
    let (width, height) = image.dimensions();
    if width < MIN_DIMENSION || height < MIN_DIMENSION {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            format!("portrait is {width}x{height}; minimum is {MIN_DIMENSION}x{MIN_DIMENSION}"),
        ));
    }
    let ext = match image::guess_format(&bytes) {
        Ok(image::ImageFormat::Jpeg) => "jpg",
        _ => "png",
    };
    let portrait_ref = state
        .store()
        .put_blob(&bytes, ext)
        .map_err(ApiError::internal)?;
    Ok((
        StatusCode::CREATED,
        Json(PortraitCreated {
            portrait_ref,
            width,
            height,
        }),
    ))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RenderRequest {
    session_id: String,
    portrait_ref: String,
    #[serde(default)]
    seed: Option<u64>,
}

async fn create_render(
    State(state): State<AppState>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<RenderJob>)> {
    let req: RenderRequest = parse_body(&body)?;
    let session = state
        .session(&req.session_id)
        .ok_or_else(|| no_session(&req.session_id))?;
    let (cell, adjectives) = {
        let s = session.lock().await;
        match s.cell {
            Some(cell) => (cell, s.adjectives.clone()),
            None => {
                return Err(ApiError::new(
                    StatusCode::CONFLICT,
                    "session has not finished the interview",
                ))
            }
        }
    };
    if state.store().find_blob(&req.portrait_ref).is_none() {
        return Err(ApiError::new(
            StatusCode::NOT_FOUND,
            format!("no portrait {}", req.portrait_ref),
        ));
    }
    let job = RenderJob {
        id: uuid::Uuid::new_v4().to_string(),
        session_id: req.session_id,
        portrait_ref: req.portrait_ref,
        cell,
        adjectives,
        style: state.inner.styles.style_for(&cell).clone(),
        seed: req.seed.unwrap_or_else(fresh_seed),
        rng: RNG_ALGORITHM.to_string(),
        status: JobStatus::Queued,
        error: None,
        phase_outputs: None,
        created_at: OffsetDateTime::now_utc(),
    };
    state.update_job(&job).map_err(ApiError::internal)?;
    state.enqueue(job.id.clone());
    tracing::info!(job = %job.id, seed = job.seed, cell = %cell.label(), "render queued");
    Ok((StatusCode::ACCEPTED, Json(job)))
}

async fn get_job(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Json<RenderJob>> {
    state
        .job(&id)
        .map(Json)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no job {id}")))
}

async fn get_gallery(State(state): State<AppState>) -> Json<Vec<super::GalleryEntry>> {
    Json(state.gallery())
}

async fn get_artifact(State(state): State<AppState>, Path(r): Path<String>) -> ApiResult<Response> {
    let (path, mime) = state
        .store()
        .find_blob(&r)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no artifact {r}")))?;
    let bytes = tokio::fs::read(path).await.map_err(ApiError::internal)?;
    Ok((
        [
            (header::CONTENT_TYPE, mime),
            (header::CACHE_CONTROL, "public, max-age=31536000, immutable"),
        ],
        bytes,
    )
        .into_response())
}
