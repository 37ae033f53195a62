//! HTTP front of the session store.
//!
//! Routes:
//! - `POST /v1/sessions/{player_id}/{session_id}/batches`
//! - `POST /v1/sessions/{player_id}/{session_id}/close`
//! - `GET  /v1/healthz`
//!
//! Duplicate batches return 200 with the original acknowledgment; schema
//! problems return 400 naming the offending sample and field.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use thiserror::Error;

use crate::store::{SessionStore, StoreError};
use crate::wire::{BatchRequest, CloseRequest, ErrorBody, HealthBody};

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub listen: SocketAddr,
    pub storage_root: PathBuf,
    /// Largest accepted batch, in samples.
    pub max_batch_samples: usize,
}

impl ServerConfig {
    pub fn new(listen: SocketAddr, storage_root: impl Into<PathBuf>) -> Self {
        ServerConfig {
            listen,
            storage_root: storage_root.into(),
            max_batch_samples: 1000,
        }
    }
}

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("server io: {0}")]
    Io(#[from] std::io::Error),
}

pub struct AppState {
    pub store: Arc<SessionStore>,
    pub max_batch_samples: usize,
}

fn error_response(status: StatusCode, error: &str, detail: String) -> Response {
    (
        status,
        Json(ErrorBody {
            error: error.to_string(),
            detail,
        }),
    )
        .into_response()
}

fn store_error_response(err: StoreError) -> Response {
    match &err {
        StoreError::Schema { detail } => {
            error_response(StatusCode::BAD_REQUEST, "SchemaError", detail.clone())
        }
        StoreError::InvalidId(_) => {
            error_response(StatusCode::BAD_REQUEST, "SchemaError", err.to_string())
        }
        StoreError::UnknownSession { .. } => {
            error_response(StatusCode::NOT_FOUND, "UnknownSession", err.to_string())
        }
        StoreError::AlreadyClosed { .. } => {
            error_response(StatusCode::CONFLICT, "AlreadyClosed", err.to_string())
        }
        StoreError::NotSealed { .. } => {
            error_response(StatusCode::CONFLICT, "NotSealed", err.to_string())
        }
        StoreError::CorruptLog { .. } | StoreError::Storage { .. } => error_response(
            StatusCode::INTERNAL_SERVER_ERROR,
            "StorageError",
            err.to_string(),
        ),
    }
}

async fn post_batch(
    State(state): State<Arc<AppState>>,
    Path((player_id, session_id)): Path<(String, String)>,
    body: Result<Json<BatchRequest>, JsonRejection>,
) -> Response {
    let Json(req) = match body {
        Ok(b) => b,
        Err(rej) => {
            return error_response(StatusCode::BAD_REQUEST, "SchemaError", rej.body_text())
        }
    };
    if req.samples.len() > state.max_batch_samples {
        return error_response(
            StatusCode::BAD_REQUEST,
            "SchemaError",
            format!(
                "batch of {} samples exceeds limit {}",
                req.samples.len(),
                state.max_batch_samples
            ),
        );
    }
    let store = Arc::clone(&state.store);
    let result = tokio::task::spawn_blocking(move || {
        store.post_batch(&player_id, &session_id, req.seq, &req.samples)
    })
    .await
    .expect("store task");
    match result {
        Ok(ack) => (StatusCode::OK, Json(ack)).into_response(),
        Err(err) => store_error_response(err),
    }
}

async fn close_session(
    State(state): State<Arc<AppState>>,
    Path((player_id, session_id)): Path<(String, String)>,
    body: Result<Json<CloseRequest>, JsonRejection>,
) -> Response {
    let Json(req) = match body {
        Ok(b) => b,
        Err(rej) => {
            return error_response(StatusCode::BAD_REQUEST, "SchemaError", rej.body_text())
        }
    };
    let store = Arc::clone(&state.store);
    let result =
        tokio::task::spawn_blocking(move || store.close_session(&player_id, &session_id, req.skill))
            .await
            .expect("store task");
    match result {
        Ok(meta) => (
            StatusCode::OK,
            Json(crate::wire::CloseAck {
                player_id: meta.player_id,
                session_id: meta.session_id,
                skill: meta.skill,
                sample_count: meta.sample_count,
                batch_count: meta.batch_count,
            }),
        )
            .into_response(),
        Err(err) => store_error_response(err),
    }
}

async fn healthz() -> Json<HealthBody> {
    Json(HealthBody {
        status: "ok".to_string(),
    })
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route(
            "/v1/sessions/{player_id}/{session_id}/batches",
            post(post_batch),
        )
        .route(
            "/v1/sessions/{player_id}/{session_id}/close",
            post(close_session),
        )
        .route("/v1/healthz", get(healthz))
        .with_state(state)
}

async fn shutdown_signal() {
    let ctrl_c = async {
        tokio::signal::ctrl_c().await.ok();
    };
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut sig) => {
                sig.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    tokio::select! {
        _ = ctrl_c => {},
        _ = terminate => {},
    }
}

/// Serves on an already-bound listener until `ctrl_c`/SIGTERM. Used by the
/// CLI and by tests (which bind port 0 first).
pub async fn serve_on(
    listener: tokio::net::TcpListener,
    store: Arc<SessionStore>,
    max_batch_samples: usize,
) -> Result<(), ServeError> {
    let state = Arc::new(AppState {
        store,
        max_batch_samples,
    });
    tracing::info!(addr = %listener.local_addr()?, "gateway listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown_signal())
        .await?;
    Ok(())
}

/// Opens the store, binds, and serves until signaled.
pub async fn run_server(config: ServerConfig) -> Result<(), ServeError> {
    let store = Arc::new(SessionStore::open(&config.storage_root)?);
    let listener = tokio::net::TcpListener::bind(config.listen)
        .await
        .map_err(|source| ServeError::Bind {
            addr: config.listen,
            source,
        })?;
    serve_on(listener, store, config.max_batch_samples).await
}
