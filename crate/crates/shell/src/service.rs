//! JSON-over-HTTP session service for interactive games.

use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use shinohara_core::equilibrium::solve_phi;
use shinohara_core::game::Action;
use tokio::sync::{Mutex, RwLock};

use crate::session::{BotProfile, GameSession, SessionError, StateView};

type Sessions = RwLock<HashMap<String, Arc<Mutex<GameSession>>>>;

#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<Sessions>,
}

impl AppState {
    pub fn new() -> Self {
        Self::default()
    }

    pub async fn session_count(&self) -> usize {
        self.sessions.read().await.len()
    }
}

#[derive(Debug)]
pub enum ApiError {
    NotFound,
    Conflict(String),
    Unprocessable(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, msg) = match self {
            ApiError::NotFound => (StatusCode::NOT_FOUND, "unknown session".to_string()),
            ApiError::Conflict(m) => (StatusCode::CONFLICT, m),
            ApiError::Unprocessable(m) => (StatusCode::UNPROCESSABLE_ENTITY, m),
        };
        (status, Json(json!({ "error": msg }))).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::Finished => ApiError::Conflict(e.to_string()),
            SessionError::Invalid(m) => ApiError::Unprocessable(m),
        }
    }
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::Unprocessable(format!("invalid body: {e}")))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    players: usize,
    bot_profile: BotProfile,
    seed: Option<u64>,
}

#[derive(Serialize)]
struct CreateResponse {
    session_id: String,
    state: StateView,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionRequest {
    action: Action,
}

#[derive(Deserialize)]
struct PhiQuery {
    n: Option<String>,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/games", post(create_game))
        .route("/games/{id}", get(get_game).delete(delete_game))
        .route("/games/{id}/action", post(post_action))
        .route("/phi", get(phi))
        .with_state(state)
}

async fn create_game(State(app): State<AppState>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let req: CreateRequest = parse_body(&body)?;
    let id = uuid::Uuid::new_v4().to_string();
    let seed = req.seed.unwrap_or_else(rand::random);
    let session = GameSession::new(id.clone(), req.players, &req.bot_profile, seed)?;
    let response = CreateResponse {
        session_id: id.clone(),
        state: session.state_view(),
    };
    app.sessions
        .write()
        .await
        .insert(id, Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(response)))
}

async fn lookup(app: &AppState, id: &str) -> Result<Arc<Mutex<GameSession>>, ApiError> {
    app.sessions.read().await.get(id).cloned().ok_or(ApiError::NotFound)
}

async fn get_game(State(app): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    let session = lookup(&app, &id).await?;
    let view = session.lock().await.view();
    Ok(Json(view))
}

async fn post_action(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<impl IntoResponse, ApiError> {
    let session = lookup(&app, &id).await?;
    let req: ActionRequest = parse_body(&body)?;
    let outcome = session.lock().await.act(req.action)?;
    Ok(Json(outcome))
}

async fn delete_game(State(app): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    match app.sessions.write().await.remove(&id) {
        Some(_) => Ok(StatusCode::NO_CONTENT),
        None => Err(ApiError::NotFound),
    }
}

async fn phi(Query(q): Query<PhiQuery>) -> Result<impl IntoResponse, ApiError> {
    let raw = q.n.ok_or_else(|| ApiError::Unprocessable("missing query parameter n".into()))?;
    let n: usize = raw
        .parse()
        .map_err(|_| ApiError::Unprocessable(format!("n must be an integer, got `{raw}`")))?;
    let sol = solve_phi(n).map_err(|e| ApiError::Unprocessable(e.to_string()))?;
    Ok(Json(json!({ "n": sol.n, "phi": sol.phi })))
}

/// Bind `0.0.0.0:port` and serve until the process is stopped.
pub async fn serve(port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new())).await
}
