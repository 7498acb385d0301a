//! HTTP + WebSocket session service.
//!
//! Every session is owned by one blocking task that applies events in
//! arrival order. Handlers talk to it over a channel, readers get the last
//! published snapshot, and stream subscribers receive each frame message
//! through a broadcast channel, so frame indices on a stream only grow.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use shelfguide_core::catalog::CatalogError;
use shelfguide_core::simulator::{
    GuidanceSession, SessionConfig, SessionError, SessionEvent, SessionPhase, SessionServices, SessionSnapshot,
    PROTO_VERSION,
};
use tokio::sync::{broadcast, mpsc, oneshot, watch};

use crate::GatewayError;

/// Messages buffered per stream subscriber before it starts lagging.
const STREAM_CAPACITY: usize = 4096;

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    cfg: SessionConfig,
    services: SessionServices,
    sessions: RwLock<HashMap<String, SessionHandle>>,
    next_id: AtomicU64,
}

#[derive(Clone)]
struct SessionHandle {
    commands: mpsc::Sender<Command>,
    snapshot: watch::Receiver<SessionSnapshot>,
    stream: broadcast::Sender<Arc<str>>,
}

struct Command {
    event: SessionEvent,
    reply: oneshot::Sender<Result<EventAck, SessionError>>,
}

/// Reply to an accepted event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventAck {
    pub proto_version: u32,
    pub frame_idx: u64,
    pub phase: SessionPhase,
    /// Frame messages the event produced; they are on the stream.
    pub frames: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Created {
    pub proto_version: u32,
    pub id: String,
    pub phase: SessionPhase,
}

impl AppState {
    pub fn new(cfg: SessionConfig, services: SessionServices) -> Self {
        Self {
            inner: Arc::new(Inner {
                cfg,
                services,
                sessions: RwLock::new(HashMap::new()),
                next_id: AtomicU64::new(1),
            }),
        }
    }

    fn handle(&self, id: &str) -> Result<SessionHandle, ApiError> {
        self.inner
            .sessions
            .read()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(id.to_string()))
    }

    fn create(&self) -> Result<(String, SessionSnapshot), ApiError> {
        let session = GuidanceSession::new(self.inner.cfg.clone(), self.inner.services.clone())?;
        let n = self.inner.next_id.fetch_add(1, Ordering::Relaxed);
        let id = format!("s{n}");
        let snapshot = session.snapshot();
        let (cmd_tx, cmd_rx) = mpsc::channel(64);
        let (snap_tx, snap_rx) = watch::channel(snapshot.clone());
        let (stream_tx, _) = broadcast::channel(STREAM_CAPACITY);
        let owner_stream = stream_tx.clone();
        tokio::task::spawn_blocking(move || own_session(session, cmd_rx, snap_tx, owner_stream));
        self.inner.sessions.write().expect("session map poisoned").insert(
            id.clone(),
            SessionHandle {
                commands: cmd_tx,
                snapshot: snap_rx,
                stream: stream_tx,
            },
        );
        Ok((id, snapshot))
    }
}

/// The single writer of one session. Ends when every handle is dropped.
fn own_session(
    mut session: GuidanceSession,
    mut commands: mpsc::Receiver<Command>,
    snapshot: watch::Sender<SessionSnapshot>,
    stream: broadcast::Sender<Arc<str>>,
) {
    while let Some(Command { event, reply }) = commands.blocking_recv() {
        let result = session.apply(event).map(|messages| {
            for m in &messages {
                let text: Arc<str> = serde_json::to_string(m).expect("message serializes").into();
                // no subscribers is fine
                let _ = stream.send(text);
            }
            let snap = session.snapshot();
            let ack = EventAck {
                proto_version: PROTO_VERSION,
                frame_idx: snap.frame_idx,
                phase: snap.phase,
                frames: messages.len(),
            };
            snapshot.send_replace(snap);
            ack
        });
        let _ = reply.send(result);
    }
}

#[derive(Debug)]
pub enum ApiError {
    NotFound(String),
    BadRequest(String),
    Session(SessionError),
    Gone,
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        Self::Session(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::NotFound(id) => (
                StatusCode::NOT_FOUND,
                json!({"error": "session_not_found", "message": format!("no session {id}")}),
            ),
            ApiError::BadRequest(msg) => (StatusCode::BAD_REQUEST, json!({"error": "invalid_event", "message": msg})),
            ApiError::Gone => (
                StatusCode::INTERNAL_SERVER_ERROR,
                json!({"error": "session_stopped", "message": "session owner is gone"}),
            ),
            ApiError::Session(e) => {
                let message = e.to_string();
                match e {
                    SessionError::InvalidEvent(_) => {
                        (StatusCode::BAD_REQUEST, json!({"error": "invalid_event", "message": message}))
                    }
                    SessionError::Ambiguous { candidates } => (
                        StatusCode::CONFLICT,
                        json!({"error": "ambiguous", "message": message, "candidates": candidates}),
                    ),
                    SessionError::Catalog(CatalogError::SourceUnavailable(_)) => (
                        StatusCode::SERVICE_UNAVAILABLE,
                        json!({"error": "source_unavailable", "message": message}),
                    ),
                    SessionError::Catalog(_) => {
                        (StatusCode::UNPROCESSABLE_ENTITY, json!({"error": "catalog", "message": message}))
                    }
                    SessionError::Sim(_) => {
                        (StatusCode::INTERNAL_SERVER_ERROR, json!({"error": "simulation", "message": message}))
                    }
                }
            }
        };
        (status, Json(body)).into_response()
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(|| async { Json(json!({"status": "ok", "proto_version": PROTO_VERSION})) }))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session).delete(delete_session))
        .route("/sessions/{id}/events", post(post_event))
        .route("/sessions/{id}/stream", get(stream_session))
        .with_state(state)
}

async fn create_session(State(state): State<AppState>) -> Result<(StatusCode, Json<Created>), ApiError> {
    let (id, snap) = state.create()?;
    tracing::info!(%id, "session created");
    Ok((
        StatusCode::CREATED,
        Json(Created {
            proto_version: PROTO_VERSION,
            id,
            phase: snap.phase,
        }),
    ))
}

async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionSnapshot>, ApiError> {
    let handle = state.handle(&id)?;
    let snap = handle.snapshot.borrow().clone();
    Ok(Json(snap))
}

async fn delete_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    let removed = state.inner.sessions.write().expect("session map poisoned").remove(&id);
    match removed {
        Some(_) => Ok(StatusCode::NO_CONTENT),
        None => Err(ApiError::NotFound(id)),
    }
}

async fn post_event(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<EventAck>, ApiError> {
    let handle = state.handle(&id)?;
    let event: SessionEvent = serde_json::from_slice(&body).map_err(|e| ApiError::BadRequest(e.to_string()))?;
    let (tx, rx) = oneshot::channel();
    handle
        .commands
        .send(Command { event, reply: tx })
        .await
        .map_err(|_| ApiError::Gone)?;
    let ack = rx.await.map_err(|_| ApiError::Gone)??;
    Ok(Json(ack))
}

async fn stream_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
    ws: WebSocketUpgrade,
) -> Result<Response, ApiError> {
    let handle = state.handle(&id)?;
    // subscribe before the upgrade so nothing sent after this call is missed
    let rx = handle.stream.subscribe();
    Ok(ws.on_upgrade(move |socket| forward(socket, rx, id)))
}

async fn forward(mut socket: WebSocket, mut rx: broadcast::Receiver<Arc<str>>, id: String) {
    loop {
        tokio::select! {
            msg = rx.recv() => match msg {
                Ok(text) => {
                    if socket.send(Message::Text(text.as_ref().into())).await.is_err() {
                        break;
                    }
                }
                Err(broadcast::error::RecvError::Lagged(n)) => {
                    tracing::warn!(%id, skipped = n, "stream subscriber lagging");
                }
                Err(broadcast::error::RecvError::Closed) => break,
            },
            incoming = socket.recv() => match incoming {
                // clients only listen; pings are answered by axum
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => {}
            },
        }
    }
}

/// Binds and serves until the process is stopped.
pub async fn serve(addr: &str, state: AppState) -> Result<(), GatewayError> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|source| GatewayError::Bind { addr: addr.to_string(), source })?;
    tracing::info!(addr = %listener.local_addr()?, "serving");
    axum::serve(listener, router(state)).await?;
    Ok(())
}
