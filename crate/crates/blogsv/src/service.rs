//! JSON-over-HTTP facade: submission, moderation queue, demand list and
//! notifications.
//!
//! Requests authenticate with a static API key in the `x-api-key` header
//! (or `Authorization: Bearer <key>`). Every response carries the lexicon
//! version in `x-lexicon-version`.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use blogsv_core::{evaluate_post, Decision, Part, PostVerdict, Reason, Thresholds};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::lexicon::{self, LexiconFiles, LexiconStore, StoreError};
use crate::queue::{self, EntryState, ModeratorAction, Page, QueueEntry, QueueError, QueueFilter, QueueStore};

pub const LEXICON_VERSION_HEADER: &str = "x-lexicon-version";
pub const API_KEY_HEADER: &str = "x-api-key";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Author,
    Moderator,
    Admin,
}

impl std::str::FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "author" => Ok(Role::Author),
            "moderator" => Ok(Role::Moderator),
            "admin" => Ok(Role::Admin),
            other => Err(format!("unknown role {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiActor {
    /// Actor id the key belongs to (the author name for author keys).
    pub id: String,
    pub role: Role,
}

#[derive(Debug, Error)]
pub enum KeyFileError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: expected `<key> <role> <actor>`: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

/// Static API keys.
#[derive(Debug, Clone, Default)]
pub struct ApiKeys {
    keys: HashMap<String, ApiActor>,
}

impl ApiKeys {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: impl Into<String>, role: Role, actor: impl Into<String>) {
        self.keys.insert(key.into(), ApiActor { id: actor.into(), role });
    }

    /// One key per line: `<key> <role> <actor>`; `#` starts a comment.
    pub fn parse(path: &Path, content: &str) -> Result<Self, KeyFileError> {
        let mut keys = ApiKeys::new();
        for (i, line) in content.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let malformed = |message: String| KeyFileError::Malformed {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [key, role, actor] = fields[..] else {
                return Err(malformed(format!("{} fields", fields.len())));
            };
            keys.insert(key, role.parse().map_err(malformed)?, actor);
        }
        Ok(keys)
    }

    pub fn load(path: &Path) -> Result<Self, KeyFileError> {
        let content = std::fs::read_to_string(path).map_err(|source| KeyFileError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(path, &content)
    }

    pub fn lookup(&self, key: &str) -> Option<&ApiActor> {
        self.keys.get(key)
    }
}

#[derive(Debug, Clone)]
pub struct AppState {
    pub lexicon: Arc<LexiconStore>,
    pub queue: Arc<QueueStore>,
    pub keys: Arc<ApiKeys>,
    pub thresholds: Thresholds,
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub port: u16,
    pub lexicon_dir: PathBuf,
    pub journal_dir: PathBuf,
    pub api_keys: PathBuf,
    pub thresholds: Thresholds,
}

impl AppState {
    /// Loads the lexicon and replays the queue journal.
    pub fn open(config: &ServiceConfig) -> anyhow::Result<Self> {
        let lexicon = LexiconStore::open(
            &LexiconFiles::in_dir(&config.lexicon_dir),
            config.journal_dir.join(lexicon::JOURNAL_FILE),
        )?;
        let queue = QueueStore::open(config.journal_dir.join(queue::JOURNAL_FILE))?;
        Ok(AppState {
            lexicon: Arc::new(lexicon),
            queue: Arc::new(queue),
            keys: Arc::new(ApiKeys::load(&config.api_keys)?),
            thresholds: config.thresholds,
        })
    }
}

/// Error body `{code, message}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        tracing::error!(error = %e, "request failed");
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "code": self.code, "message": self.message }))).into_response()
    }
}

impl From<QueueError> for ApiError {
    fn from(e: QueueError) -> Self {
        match e {
            QueueError::UnknownId(_) => ApiError::new(StatusCode::NOT_FOUND, "not_found", e.to_string()),
            QueueError::AlreadyResolved { .. } => {
                ApiError::new(StatusCode::CONFLICT, "already_resolved", e.to_string())
            }
            other => ApiError::internal(other),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::InvalidTerm(_) => ApiError::new(StatusCode::BAD_REQUEST, "invalid_term", e.to_string()),
            other => ApiError::internal(other),
        }
    }
}

fn authenticate(state: &AppState, headers: &HeaderMap, allowed: &[Role]) -> Result<ApiActor, ApiError> {
    let key = headers
        .get(API_KEY_HEADER)
        .and_then(|v| v.to_str().ok())
        .or_else(|| {
            headers
                .get(axum::http::header::AUTHORIZATION)
                .and_then(|v| v.to_str().ok())
                .and_then(|v| v.strip_prefix("Bearer "))
        })
        .ok_or_else(|| ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", "missing API key"))?;
    let actor = state
        .keys
        .lookup(key.trim())
        .cloned()
        .ok_or_else(|| ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", "invalid API key"))?;
    if !allowed.contains(&actor.role) {
        return Err(ApiError::new(
            StatusCode::FORBIDDEN,
            "forbidden",
            format!("role {:?} may not use this endpoint", actor.role),
        ));
    }
    Ok(actor)
}

const ANY_ROLE: &[Role] = &[Role::Author, Role::Moderator, Role::Admin];
const MODERATORS: &[Role] = &[Role::Moderator, Role::Admin];
const ADMINS: &[Role] = &[Role::Admin];

fn parse_json<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed JSON body: {e}")))
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> Result<T, ApiError> {
    q.map(|Query(v)| v).map_err(|e| ApiError::bad_request(e.body_text()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubmitRequest {
    pub author: String,
    #[serde(default)]
    pub title: Option<String>,
    #[serde(default)]
    pub body: Option<String>,
    #[serde(default)]
    pub comments: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubmissionStatus {
    Published,
    PublishedWithNotice,
    Pending,
    Rejected,
}

impl From<Decision> for SubmissionStatus {
    fn from(d: Decision) -> Self {
        match d {
            Decision::Publish => SubmissionStatus::Published,
            Decision::PublishNotify => SubmissionStatus::PublishedWithNotice,
            Decision::Pending => SubmissionStatus::Pending,
            Decision::Reject => SubmissionStatus::Rejected,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubmissionResult {
    pub post_id: String,
    pub status: SubmissionStatus,
    pub reason: Reason,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub queue_id: Option<String>,
    pub verdict: PostVerdict,
    pub lexicon_version: u64,
}

async fn submit_post(
    State(state): State<AppState>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Json<SubmissionResult>, ApiError> {
    let actor = authenticate(&state, &headers, ANY_ROLE)?;
    let req: SubmitRequest = parse_json(&body)?;
    if req.author.trim().is_empty() {
        return Err(ApiError::bad_request("author is required"));
    }
    if actor.role == Role::Author && req.author != actor.id {
        return Err(ApiError::new(
            StatusCode::FORBIDDEN,
            "forbidden",
            "authors may only submit under their own name",
        ));
    }
    let mut parts = Vec::new();
    parts.extend(req.title.filter(|t| !t.trim().is_empty()).map(Part::title));
    parts.extend(req.body.filter(|t| !t.trim().is_empty()).map(Part::body));
    parts.extend(
        req.comments
            .into_iter()
            .filter(|t| !t.trim().is_empty())
            .map(Part::comment),
    );
    if parts.is_empty() {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "empty_post",
            "post needs at least one non-empty part",
        ));
    }

    // one snapshot for the whole submission
    let snapshot = state.lexicon.snapshot();
    let verdict = evaluate_post(&parts, &snapshot, &state.thresholds).map_err(ApiError::internal)?;
    let reason = verdict.reason();
    let outcome = state.queue.submit(&req.author, parts, verdict.clone())?;
    Ok(Json(SubmissionResult {
        post_id: outcome.post_id,
        status: verdict.decision.into(),
        reason,
        queue_id: outcome.queue_id,
        lexicon_version: snapshot.version(),
        verdict,
    }))
}

async fn get_post(
    State(state): State<AppState>,
    headers: HeaderMap,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<queue::PostRecord>, ApiError> {
    authenticate(&state, &headers, ANY_ROLE)?;
    state
        .queue
        .post(&id)
        .map(Json)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("no post {id}")))
}

#[derive(Debug, Default, Deserialize)]
struct QueueQuery {
    state: Option<EntryState>,
    reason: Option<Reason>,
    since: Option<DateTime<Utc>>,
    until: Option<DateTime<Utc>>,
    offset: Option<usize>,
    limit: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct QueueListing {
    pub state: EntryState,
    pub entries: Vec<QueueEntry>,
}

async fn list_queue(
    State(state): State<AppState>,
    headers: HeaderMap,
    q: Result<Query<QueueQuery>, QueryRejection>,
) -> Result<Json<QueueListing>, ApiError> {
    authenticate(&state, &headers, MODERATORS)?;
    let q = query(q)?;
    let entry_state = q.state.unwrap_or(EntryState::Pending);
    let filter = QueueFilter {
        reason: q.reason,
        since: q.since,
        until: q.until,
    };
    let page = Page {
        offset: q.offset.unwrap_or(0),
        limit: q.limit.unwrap_or(usize::MAX),
    };
    Ok(Json(QueueListing {
        state: entry_state,
        entries: state.queue.list(entry_state, &filter, page),
    }))
}

#[derive(Debug, Default, Deserialize)]
struct ResolveRequest {
    note: Option<String>,
}

async fn resolve_entry(
    state: AppState,
    headers: HeaderMap,
    id: String,
    body: Bytes,
    action: ModeratorAction,
) -> Result<Json<QueueEntry>, ApiError> {
    let actor = authenticate(&state, &headers, MODERATORS)?;
    let req: ResolveRequest = if body.iter().all(u8::is_ascii_whitespace) {
        ResolveRequest::default()
    } else {
        parse_json(&body)?
    };
    Ok(Json(state.queue.resolve(&id, action, &actor.id, req.note)?))
}

async fn approve(
    State(state): State<AppState>,
    headers: HeaderMap,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Json<QueueEntry>, ApiError> {
    resolve_entry(state, headers, id, body, ModeratorAction::Approve).await
}

async fn reject(
    State(state): State<AppState>,
    headers: HeaderMap,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Json<QueueEntry>, ApiError> {
    resolve_entry(state, headers, id, body, ModeratorAction::Reject).await
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DemandList {
    pub version: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub changed: Option<bool>,
    pub terms: Vec<String>,
}

fn demand_list(snapshot: &blogsv_core::LexiconSnapshot, changed: Option<bool>) -> DemandList {
    DemandList {
        version: snapshot.version(),
        changed,
        terms: snapshot.demand().iter().map(|t| t.to_string()).collect(),
    }
}

async fn get_demand(State(state): State<AppState>, headers: HeaderMap) -> Result<Json<DemandList>, ApiError> {
    authenticate(&state, &headers, MODERATORS)?;
    Ok(Json(demand_list(&state.lexicon.snapshot(), None)))
}

#[derive(Debug, Deserialize)]
struct DemandRequest {
    term: String,
    #[serde(default)]
    note: String,
}

async fn add_demand(
    State(state): State<AppState>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Json<DemandList>, ApiError> {
    let actor = authenticate(&state, &headers, ADMINS)?;
    let req: DemandRequest = parse_json(&body)?;
    let m = state.lexicon.add_demand_term(&req.term, &req.note, &actor.id)?;
    Ok(Json(demand_list(&m.snapshot, Some(m.changed))))
}

async fn remove_demand(
    State(state): State<AppState>,
    headers: HeaderMap,
    UrlPath(term): UrlPath<String>,
) -> Result<Json<DemandList>, ApiError> {
    let actor = authenticate(&state, &headers, ADMINS)?;
    let m = state.lexicon.remove_demand_term(&term, "", &actor.id)?;
    Ok(Json(demand_list(&m.snapshot, Some(m.changed))))
}

#[derive(Debug, Deserialize)]
struct NotificationQuery {
    author: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct NotificationListing {
    pub notifications: Vec<queue::Notification>,
}

async fn list_notifications(
    State(state): State<AppState>,
    headers: HeaderMap,
    q: Result<Query<NotificationQuery>, QueryRejection>,
) -> Result<Json<NotificationListing>, ApiError> {
    let actor = authenticate(&state, &headers, ANY_ROLE)?;
    let q = query(q)?;
    let author = match actor.role {
        Role::Author => match q.author {
            Some(a) if a != actor.id => {
                return Err(ApiError::new(
                    StatusCode::FORBIDDEN,
                    "forbidden",
                    "authors may only read their own notifications",
                ))
            }
            _ => Some(actor.id),
        },
        Role::Moderator | Role::Admin => q.author,
    };
    Ok(Json(NotificationListing {
        notifications: state.queue.list_notifications(author.as_deref()),
    }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub lexicon_version: u64,
    pub queue_depth: usize,
}

async fn healthz(State(state): State<AppState>) -> Json<Health> {
    Json(Health {
        status: "ok".into(),
        lexicon_version: state.lexicon.snapshot().version(),
        queue_depth: state.queue.counts().pending,
    })
}

async fn fallback() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}

async fn stamp_version(State(state): State<AppState>, mut response: Response) -> Response {
    let version = state.lexicon.snapshot().version();
    response.headers_mut().insert(
        LEXICON_VERSION_HEADER,
        HeaderValue::from_str(&version.to_string()).expect("digits"),
    );
    response
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/v1/posts", post(submit_post))
        .route("/v1/posts/{id}", get(get_post))
        .route("/v1/queue", get(list_queue))
        .route("/v1/queue/{id}/approve", post(approve))
        .route("/v1/queue/{id}/reject", post(reject))
        .route("/v1/lexicon/demand", get(get_demand).post(add_demand))
        .route("/v1/lexicon/demand/{term}", delete(remove_demand))
        .route("/v1/notifications", get(list_notifications))
        .route("/v1/healthz", get(healthz))
        .fallback(fallback)
        .layer(axum::middleware::map_response_with_state(state.clone(), stamp_version))
        .with_state(state)
}

async fn shutdown_signal() {
    let interrupt = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending().await,
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = interrupt => {}
        _ = terminate => {}
    }
    tracing::info!("shutting down");
}

/// Serves until interrupted or terminated.
pub async fn serve(config: &ServiceConfig) -> anyhow::Result<()> {
    let state = AppState::open(config)?;
    let addr = SocketAddr::from(([0, 0, 0, 0], config.port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, lexicon_version = state.lexicon.snapshot().version(), "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown_signal())
        .await?;
    Ok(())
}
