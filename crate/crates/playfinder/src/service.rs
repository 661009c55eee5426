//! JSON-over-HTTP front end for the pipeline.
//!
//! Domain outcomes (answers, clarifications, rejections, failures) are 200
//! responses; only malformed requests and protocol violations use error
//! statuses. Pipeline work runs on the blocking pool since the language
//! model backend may block on network I/O.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use playfinder_core::pipeline::Pipeline;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::json;

use crate::config::Settings;

#[derive(Clone)]
pub struct AppState {
    pub pipeline: Arc<Pipeline>,
    pub settings: Arc<Settings>,
}

#[derive(Debug, Deserialize)]
pub struct QueryBody {
    pub session_id: String,
    pub prompt: String,
}

#[derive(Debug, Deserialize)]
pub struct ClarifyBody {
    pub session_id: String,
    pub mention: String,
    pub chosen_id: i64,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/v1/query", post(query))
        .route("/v1/clarify", post(clarify))
        .route("/v1/session/:id", get(session))
        .route("/v1/trace/:id", get(trace))
        .route("/healthz", get(health))
        .with_state(state)
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, Response> {
    serde_json::from_slice(body).map_err(|e| error(StatusCode::BAD_REQUEST, format!("malformed body: {e}")))
}

fn non_empty(value: &str, name: &str) -> Result<(), Response> {
    if value.trim().is_empty() {
        Err(error(StatusCode::BAD_REQUEST, format!("{name} must not be empty")))
    } else {
        Ok(())
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, Response> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| error(StatusCode::INTERNAL_SERVER_ERROR, format!("pipeline task failed: {e}")))
}

async fn query(State(state): State<AppState>, body: Bytes) -> Response {
    let run = async {
        let q: QueryBody = parse(&body)?;
        non_empty(&q.session_id, "session_id")?;
        non_empty(&q.prompt, "prompt")?;
        let response = blocking(move || {
            let r = state.pipeline.handle(&q.session_id, &q.prompt);
            if let Err(e) = state.settings.persist_cache(&state.pipeline, &r) {
                tracing::warn!("could not save the cache: {e}");
            }
            r
        })
        .await?;
        tracing::info!(trace = %response.trace.trace_id, kind = ?response.kind(), "query");
        Ok::<_, Response>(Json(response).into_response())
    };
    run.await.unwrap_or_else(|r| r)
}

async fn clarify(State(state): State<AppState>, body: Bytes) -> Response {
    let run = async {
        let c: ClarifyBody = parse(&body)?;
        non_empty(&c.session_id, "session_id")?;
        let outcome = blocking(move || {
            let r = state.pipeline.handle_clarification(&c.session_id, &c.mention, c.chosen_id);
            if let Ok(r) = &r {
                if let Err(e) = state.settings.persist_cache(&state.pipeline, r) {
                    tracing::warn!("could not save the cache: {e}");
                }
            }
            r
        })
        .await?;
        Ok::<_, Response>(match outcome {
            Ok(r) => Json(r).into_response(),
            Err(e) => {
                let status = StatusCode::from_u16(e.status()).unwrap_or(StatusCode::CONFLICT);
                error(status, e.to_string())
            }
        })
    };
    run.await.unwrap_or_else(|r| r)
}

async fn session(State(state): State<AppState>, Path(id): Path<String>) -> Response {
    match state.pipeline.sessions().get(&id) {
        Some(s) => Json(s).into_response(),
        None => error(StatusCode::NOT_FOUND, format!("unknown session '{id}'")),
    }
}

async fn trace(State(state): State<AppState>, Path(id): Path<String>) -> Response {
    match state.pipeline.trace(&id) {
        Some(t) => Json(t).into_response(),
        None => error(StatusCode::NOT_FOUND, format!("no trace for '{id}'")),
    }
}

async fn health(State(state): State<AppState>) -> Response {
    match state.pipeline.store() {
        Some(store) => Json(json!({ "status": "ok", "plays": store.len() })).into_response(),
        None => (
            StatusCode::SERVICE_UNAVAILABLE,
            Json(json!({ "status": "store not ready" })),
        )
            .into_response(),
    }
}
