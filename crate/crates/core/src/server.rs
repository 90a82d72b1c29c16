//! HTTP front end for [`SessionService`]. Conversation replies are
//! newline-delimited JSON messages, one per line.
//!
//! | Method | Path | Body | Reply |
//! |---|---|---|---|
//! | GET | `/health` | | `ok` |
//! | GET | `/specs` | | JSON array of spec ids |
//! | POST | `/sessions` | `{"spec_id": ".."}` | messages |
//! | POST | `/sessions/{id}/events` | a `user_event` message | messages |
//! | GET | `/sessions/{id}/transcript` | | JSON transcript |
//! | GET | `/specs/{id}/sessions` | | JSON session summaries |
//! | GET | `/specs/{id}/verdict` | | JSON verdict |

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::bt::{Effect, UserEvent};
use crate::session::{Reply, ServiceError, SessionService, SessionStatus};

pub const NDJSON: &str = "application/x-ndjson";

/// One line of the conversation wire protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WireMessage {
    BotUtterance {
        node_id: String,
        text: String,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        choices: Vec<String>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        attachments: Vec<String>,
    },
    UserEvent {
        event: UserEvent,
    },
    SessionState {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        session_id: Option<String>,
        status: SessionStatus,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        waiting_node: Option<String>,
    },
    Error {
        code: String,
        detail: String,
    },
}

impl WireMessage {
    pub fn error(code: impl Into<String>, detail: impl Into<String>) -> Self {
        WireMessage::Error { code: code.into(), detail: detail.into() }
    }
}

/// Utterances of a reply followed by the session state.
pub fn reply_messages(reply: &Reply) -> Vec<WireMessage> {
    let mut out: Vec<WireMessage> = reply
        .turn
        .effects
        .iter()
        .filter_map(|e| match e {
            Effect::Utterance { node_id, text, choices, attachments } => Some(WireMessage::BotUtterance {
                node_id: node_id.clone(),
                text: text.clone(),
                choices: choices.clone(),
                attachments: attachments.clone(),
            }),
            _ => None,
        })
        .collect();
    out.push(WireMessage::SessionState {
        session_id: Some(reply.session_id.clone()),
        status: reply.turn.status,
        waiting_node: reply.turn.waiting_node.clone(),
    });
    out
}

pub fn encode_lines(messages: &[WireMessage]) -> String {
    messages.iter().map(|m| serde_json::to_string(m).expect("wire messages serialize") + "\n").collect()
}

fn ndjson(status: StatusCode, messages: &[WireMessage]) -> Response {
    (status, [(header::CONTENT_TYPE, NDJSON)], encode_lines(messages)).into_response()
}

fn status_for(e: &ServiceError) -> StatusCode {
    match e {
        ServiceError::UnknownSpec(_) | ServiceError::UnknownSession(_) => StatusCode::NOT_FOUND,
        ServiceError::SessionClosed { .. } | ServiceError::SessionNotWaiting(_) => StatusCode::CONFLICT,
        ServiceError::ChoiceOutOfRange { .. } | ServiceError::Verdict(_) => StatusCode::UNPROCESSABLE_ENTITY,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

struct ApiError(StatusCode, WireMessage);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError(status_for(&e), WireMessage::error(e.code(), e.to_string()))
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError(StatusCode::BAD_REQUEST, WireMessage::error("bad_request", e.body_text()))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        ndjson(self.0, &[self.1])
    }
}

type Shared = Arc<SessionService>;

#[derive(Debug, Deserialize)]
struct CreateSession {
    spec_id: String,
}

async fn health() -> &'static str {
    "ok"
}

async fn list_specs(State(svc): State<Shared>) -> Json<Vec<String>> {
    Json(svc.spec_ids().map(str::to_owned).collect())
}

async fn create_session(
    State(svc): State<Shared>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(body) = body?;
    let reply = svc.create_session(&body.spec_id)?;
    Ok(ndjson(StatusCode::CREATED, &reply_messages(&reply)))
}

async fn post_event(
    State(svc): State<Shared>,
    Path(id): Path<String>,
    body: Result<Json<WireMessage>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(message) = body?;
    let WireMessage::UserEvent { event } = message else {
        return Err(ApiError(
            StatusCode::BAD_REQUEST,
            WireMessage::error("bad_request", "expected a user_event message"),
        ));
    };
    let reply = svc.post_user_message(&id, event)?;
    Ok(ndjson(StatusCode::OK, &reply_messages(&reply)))
}

async fn transcript(State(svc): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(Json(svc.get_transcript(&id)?).into_response())
}

async fn sessions(State(svc): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    if svc.blueprint(&id).is_none() {
        return Err(ServiceError::UnknownSpec(id).into());
    }
    Ok(Json(svc.list_sessions(&id)).into_response())
}

async fn verdict(State(svc): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(Json(svc.aggregate_evaluations(&id)?).into_response())
}

pub fn router(service: Shared) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/specs", get(list_specs))
        .route("/specs/{id}/sessions", get(sessions))
        .route("/specs/{id}/verdict", get(verdict))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/events", post(post_event))
        .route("/sessions/{id}/transcript", get(transcript))
        .with_state(service)
}

/// Serves until the listener fails, expiring idle sessions every `sweep`.
pub async fn serve(service: Shared, addr: SocketAddr, sweep: Duration) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    let sweeper = service.clone();
    tokio::spawn(async move {
        let mut every = tokio::time::interval(sweep);
        loop {
            every.tick().await;
            for id in sweeper.expire_idle() {
                tracing::info!(session_id = %id, "session expired");
            }
        }
    });
    axum::serve(listener, router(service)).await
}
