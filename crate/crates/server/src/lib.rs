//! HTTP/JSON front end for the community-detection engine.
//!
//! | method | path | body |
//! |---|---|---|
//! | GET | `/health` | |
//! | POST | `/v1/detect` | [`DetectRequest`] |
//! | POST | `/v1/oracle` | [`OracleRequest`] |
//! | POST | `/v1/bench` | [`BenchRequest`] |
//! | POST | `/v1/stream` | [`StreamRequest`] |
//! | POST | `/v1/sessions` | [`CreateSession`] |
//! | POST | `/v1/sessions/{id}/events` | [`PushEvents`] |
//! | GET | `/v1/sessions/{id}/assignment` | |
//! | GET | `/v1/sessions/{id}/stats` | |
//! | DELETE | `/v1/sessions/{id}` | |
//!
//! Chains run on the blocking pool; sessions are serialized by a per-session lock.

pub mod error;
pub mod ops;

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use mhcd_core::engine::RunStats;
use mhcd_core::protocol::*;
use tokio::net::TcpListener;

pub use error::ApiError;
use ops::Session;

type Shared<T> = Arc<Mutex<T>>;

#[derive(Clone, Default)]
pub struct AppState {
    sessions: Shared<BTreeMap<u64, Shared<Session>>>,
    next_id: Arc<AtomicU64>,
}

pub fn router() -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/v1/detect", post(detect))
        .route("/v1/oracle", post(oracle))
        .route("/v1/bench", post(bench))
        .route("/v1/stream", post(stream))
        .route("/v1/sessions", post(create_session))
        .route("/v1/sessions/{id}", axum::routing::delete(delete_session))
        .route("/v1/sessions/{id}/events", post(push_events))
        .route("/v1/sessions/{id}/assignment", get(session_assignment))
        .route("/v1/sessions/{id}/stats", get(session_stats))
        .with_state(AppState::default())
}

/// Serves [`router`] on an already bound listener until the task is dropped.
pub async fn serve(listener: TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router()).await
}

/// Binds `addr` and serves in a background task, returning the bound address.
pub async fn spawn(addr: SocketAddr) -> std::io::Result<SocketAddr> {
    let listener = TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    tokio::spawn(async move {
        if let Err(e) = serve(listener).await {
            tracing::error!("server stopped: {e}");
        }
    });
    Ok(local)
}

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
}

async fn health() -> Json<Health> {
    Json(Health {
        status: "ok".into(),
        version: env!("CARGO_PKG_VERSION").into(),
    })
}

async fn detect(body: Result<Json<DetectRequest>, JsonRejection>) -> Result<Json<DetectResponse>, ApiError> {
    let Json(req) = body?;
    tracing::debug!(proposal = ?req.config.proposal, "detect");
    blocking(move || Ok(ops::detect(req)?)).await.map(Json)
}

async fn oracle(body: Result<Json<OracleRequest>, JsonRejection>) -> Result<Json<OracleResponse>, ApiError> {
    let Json(req) = body?;
    blocking(move || Ok(ops::oracle(req)?)).await.map(Json)
}

async fn bench(body: Result<Json<BenchRequest>, JsonRejection>) -> Result<Json<BenchResponse>, ApiError> {
    let Json(req) = body?;
    blocking(move || Ok(ops::bench(req)?)).await.map(Json)
}

async fn stream(body: Result<Json<StreamRequest>, JsonRejection>) -> Result<Json<StreamResponse>, ApiError> {
    let Json(req) = body?;
    blocking(move || Ok(ops::stream(req)?)).await.map(Json)
}

async fn create_session(
    State(state): State<AppState>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> Result<(StatusCode, Json<SessionCreated>), ApiError> {
    let Json(req) = body?;
    let (session, initial) = blocking(move || Ok(Session::create(req)?)).await?;
    let id = state.next_id.fetch_add(1, Ordering::Relaxed) + 1;
    let created = SessionCreated {
        id,
        nodes: session.nodes(),
        edges: session.edges(),
        initial,
    };
    state
        .sessions
        .lock()
        .expect("session map poisoned")
        .insert(id, Arc::new(Mutex::new(session)));
    tracing::info!(id, "session created");
    Ok((StatusCode::CREATED, Json(created)))
}

fn session(state: &AppState, id: u64) -> Result<Shared<Session>, ApiError> {
    state
        .sessions
        .lock()
        .expect("session map poisoned")
        .get(&id)
        .cloned()
        .ok_or_else(|| ApiError::NotFound(format!("no session {id}")))
}

async fn push_events(
    State(state): State<AppState>,
    Path(id): Path<u64>,
    body: Result<Json<PushEvents>, JsonRejection>,
) -> Result<Json<EventsApplied>, ApiError> {
    let Json(req) = body?;
    let session = session(&state, id)?;
    blocking(move || {
        let mut s = session.lock().map_err(|_| ApiError::Internal("session poisoned".into()))?;
        Ok(s.push(&req.events)?)
    })
    .await
    .map(Json)
}

async fn session_assignment(
    State(state): State<AppState>,
    Path(id): Path<u64>,
) -> Result<Json<AssignmentResponse>, ApiError> {
    let session = session(&state, id)?;
    let assignment = session.lock().map_err(|_| ApiError::Internal("session poisoned".into()))?.assignment();
    Ok(Json(AssignmentResponse { assignment }))
}

async fn session_stats(State(state): State<AppState>, Path(id): Path<u64>) -> Result<Json<RunStats>, ApiError> {
    let session = session(&state, id)?;
    let stats = session.lock().map_err(|_| ApiError::Internal("session poisoned".into()))?.stats();
    Ok(Json(stats))
}

async fn delete_session(State(state): State<AppState>, Path(id): Path<u64>) -> Result<StatusCode, ApiError> {
    state
        .sessions
        .lock()
        .expect("session map poisoned")
        .remove(&id)
        .map(|_| StatusCode::NO_CONTENT)
        .ok_or_else(|| ApiError::NotFound(format!("no session {id}")))
}
