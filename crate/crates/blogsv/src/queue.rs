//! Moderation queue, notification outbox and the journal behind both.
//!
//! Every state change is one journal line. The in-memory index is nothing
//! more than the fold of [`QueueStore::apply`] over the journal, so a restart
//! rebuilds exactly the state the previous process had acknowledged.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::RwLock;

use blogsv_core::{Decision, MatchKind, Part, PostVerdict, Reason};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::IdGenerator;
use crate::journal::{FaultPoint, Journal, JournalError};

pub const JOURNAL_FILE: &str = "queue-journal.ndjson";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryState {
    Pending,
    Approved,
    RejectedByModerator,
}

impl EntryState {
    pub fn is_terminal(&self) -> bool {
        !matches!(self, EntryState::Pending)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueEntry {
    pub id: String,
    pub author: String,
    pub parts: Vec<Part>,
    pub verdict: PostVerdict,
    /// What put the post in the queue: a demand term or the frequency band.
    pub reason: Reason,
    pub state: EntryState,
    pub submitted_at: DateTime<Utc>,
    pub resolved_at: Option<DateTime<Utc>>,
    pub moderator: Option<String>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeratorAction {
    Approve,
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NotificationKind {
    RejectedBlockedLink,
    RejectedFrequency,
    PublishedWithNotice,
    ModeratorRejected,
    ModeratorApproved,
    /// Optional courtesy notice on entering the queue; off by default.
    QueuedForReview,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Notification {
    pub id: String,
    pub author: String,
    pub kind: NotificationKind,
    pub message: String,
    pub created_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_id: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PostStatus {
    Published,
    PublishedWithNotice,
    Pending,
    Approved,
    RejectedByModerator,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedPost {
    pub id: String,
    pub author: String,
    pub parts: Vec<Part>,
    pub verdict: PostVerdict,
    pub status: PostStatus,
    pub published_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notification: Option<Notification>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnqueuePayload {
    pub entry: QueueEntry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notification: Option<Notification>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub id: String,
    pub action: ModeratorAction,
    pub moderator: String,
    pub note: Option<String>,
    pub resolved_at: DateTime<Utc>,
    pub notification: Notification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", content = "payload", rename_all = "snake_case")]
pub enum QueueEvent {
    Enqueue(EnqueuePayload),
    Resolve(Resolution),
    Notify(Notification),
    Publish(PublishedPost),
}

/// One journal line: `{ts, event, payload}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueRecord {
    pub ts: DateTime<Utc>,
    #[serde(flatten)]
    pub event: QueueEvent,
}

#[derive(Debug, Error)]
pub enum QueueError {
    #[error(transparent)]
    Journal(#[from] JournalError),
    #[error("only pending posts can be queued (decision was {0})")]
    NotPending(Decision),
    #[error("no queue entry {0}")]
    UnknownId(String),
    #[error("queue entry {id} is already resolved ({state:?})")]
    AlreadyResolved { id: String, state: EntryState },
    #[error("queue store is unusable after a failed journal write; reopen it")]
    Crashed,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueueConfig {
    /// Send a `queued_for_review` notice when a post enters the queue.
    pub courtesy_pending_notice: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueueFilter {
    pub reason: Option<Reason>,
    pub since: Option<DateTime<Utc>>,
    pub until: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Page {
    pub offset: usize,
    pub limit: usize,
}

impl Default for Page {
    fn default() -> Self {
        Page {
            offset: 0,
            limit: usize::MAX,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueueCounts {
    pub enqueued: usize,
    pub pending: usize,
    pub approved: usize,
    pub rejected_by_moderator: usize,
}

/// What a submission turned into.
#[derive(Debug, Clone, PartialEq)]
pub struct SubmissionOutcome {
    pub post_id: String,
    pub status: PostStatus,
    pub queue_id: Option<String>,
    pub notification: Option<Notification>,
}

/// A post as exposed by id: published directly or via the queue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostRecord {
    pub id: String,
    pub author: String,
    pub status: PostStatus,
    pub parts: Vec<Part>,
    pub verdict: PostVerdict,
}

#[derive(Debug)]
struct Inner {
    journal: Journal<QueueRecord>,
    ids: IdGenerator,
    entries: BTreeMap<String, QueueEntry>,
    published: BTreeMap<String, PublishedPost>,
    notifications: Vec<Notification>,
    history: Vec<QueueRecord>,
    crashed: bool,
}

impl Inner {
    fn apply(&mut self, record: QueueRecord) {
        match &record.event {
            QueueEvent::Enqueue(p) => {
                self.ids.observe(&p.entry.id);
                self.entries.insert(p.entry.id.clone(), p.entry.clone());
                if let Some(n) = &p.notification {
                    self.push_notification(n.clone());
                }
            }
            QueueEvent::Resolve(r) => {
                if let Some(e) = self.entries.get_mut(&r.id) {
                    e.state = match r.action {
                        ModeratorAction::Approve => EntryState::Approved,
                        ModeratorAction::Reject => EntryState::RejectedByModerator,
                    };
                    e.resolved_at = Some(r.resolved_at);
                    e.moderator = Some(r.moderator.clone());
                    e.note = r.note.clone();
                }
                self.push_notification(r.notification.clone());
            }
            QueueEvent::Notify(n) => self.push_notification(n.clone()),
            QueueEvent::Publish(p) => {
                self.ids.observe(&p.id);
                self.published.insert(p.id.clone(), p.clone());
                if let Some(n) = &p.notification {
                    self.push_notification(n.clone());
                }
            }
        }
        self.history.push(record);
    }

    fn push_notification(&mut self, n: Notification) {
        self.ids.observe(&n.id);
        if let Some(post) = &n.post_id {
            self.ids.observe(post);
        }
        self.notifications.push(n);
    }

    fn commit(&mut self, event: QueueEvent) -> Result<(), QueueError> {
        if self.crashed {
            return Err(QueueError::Crashed);
        }
        let record = QueueRecord { ts: Utc::now(), event };
        if let Err(e) = self.journal.append(&record) {
            self.crashed = true;
            return Err(e.into());
        }
        self.apply(record);
        Ok(())
    }

    fn notification(
        &mut self,
        author: &str,
        kind: NotificationKind,
        message: String,
        post_id: Option<String>,
    ) -> Notification {
        Notification {
            id: self.ids.next_id(),
            author: author.to_string(),
            kind,
            message,
            created_at: Utc::now(),
            post_id,
        }
    }
}

#[derive(Debug)]
pub struct QueueStore {
    inner: RwLock<Inner>,
    config: QueueConfig,
}

fn first_match(verdict: &PostVerdict, kind: MatchKind) -> Option<String> {
    verdict
        .part_verdicts
        .iter()
        .flat_map(|p| p.matches.iter())
        .find(|m| m.kind == kind)
        .map(|m| m.matched.clone())
}

impl QueueStore {
    /// Opens the journal at `path` and rebuilds the index from it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, QueueError> {
        Self::open_with(path, QueueConfig::default())
    }

    pub fn open_with(path: impl AsRef<Path>, config: QueueConfig) -> Result<Self, QueueError> {
        let (journal, records) = Journal::open(path)?;
        let mut inner = Inner {
            journal,
            ids: IdGenerator::new(),
            entries: BTreeMap::new(),
            published: BTreeMap::new(),
            notifications: Vec::new(),
            history: Vec::new(),
            crashed: false,
        };
        for record in records {
            inner.apply(record);
        }
        Ok(QueueStore {
            inner: RwLock::new(inner),
            config,
        })
    }

    fn read(&self) -> std::sync::RwLockReadGuard<'_, Inner> {
        self.inner.read().expect("queue lock")
    }

    fn write(&self) -> std::sync::RwLockWriteGuard<'_, Inner> {
        self.inner.write().expect("queue lock")
    }

    /// Makes the next journal append fail at `point`. Test hook.
    pub fn inject_fault(&self, point: FaultPoint) {
        self.write().journal.inject_fault(point);
    }

    pub fn new_id(&self) -> String {
        self.write().ids.next_id()
    }

    /// Records the outcome of an evaluated submission as a single journal
    /// line: a publish record, a queue entry, or a rejection notice.
    pub fn submit(
        &self,
        author: &str,
        parts: Vec<Part>,
        verdict: PostVerdict,
    ) -> Result<SubmissionOutcome, QueueError> {
        let mut inner = self.write();
        let post_id = inner.ids.next_id();
        let now = Utc::now();
        match verdict.decision {
            Decision::Reject => {
                let (kind, message) = match verdict.reason() {
                    Reason::BlockedLink => (
                        NotificationKind::RejectedBlockedLink,
                        format!(
                            "Your post was rejected: it links to a restricted site ({}).",
                            first_match(&verdict, MatchKind::Link).unwrap_or_default()
                        ),
                    ),
                    _ => (
                        NotificationKind::RejectedFrequency,
                        format!(
                            "Your post was rejected: slang frequency {:.2}% is above the allowed level.",
                            verdict.primary_part().stats.frequency_level
                        ),
                    ),
                };
                let n = inner.notification(author, kind, message, Some(post_id.clone()));
                inner.commit(QueueEvent::Notify(n.clone()))?;
                Ok(SubmissionOutcome {
                    post_id,
                    status: PostStatus::Rejected,
                    queue_id: None,
                    notification: Some(n),
                })
            }
            Decision::Pending => {
                let reason = verdict.reason();
                let notification = self.config.courtesy_pending_notice.then(|| {
                    inner.notification(
                        author,
                        NotificationKind::QueuedForReview,
                        "Your post is waiting for moderator approval.".to_string(),
                        Some(post_id.clone()),
                    )
                });
                let entry = QueueEntry {
                    id: post_id.clone(),
                    author: author.to_string(),
                    parts,
                    verdict,
                    reason,
                    state: EntryState::Pending,
                    submitted_at: now,
                    resolved_at: None,
                    moderator: None,
                    note: None,
                };
                inner.commit(QueueEvent::Enqueue(EnqueuePayload {
                    entry,
                    notification: notification.clone(),
                }))?;
                Ok(SubmissionOutcome {
                    post_id: post_id.clone(),
                    status: PostStatus::Pending,
                    queue_id: Some(post_id),
                    notification,
                })
            }
            Decision::Publish | Decision::PublishNotify => {
                let (status, notification) = if verdict.decision == Decision::PublishNotify {
                    let message = format!(
                        "Your post was published. It contains some slang ({:.2}%); please keep it civil.",
                        verdict.primary_part().stats.frequency_level
                    );
                    let n = inner.notification(
                        author,
                        NotificationKind::PublishedWithNotice,
                        message,
                        Some(post_id.clone()),
                    );
                    (PostStatus::PublishedWithNotice, Some(n))
                } else {
                    (PostStatus::Published, None)
                };
                inner.commit(QueueEvent::Publish(PublishedPost {
                    id: post_id.clone(),
                    author: author.to_string(),
                    parts,
                    verdict,
                    status,
                    published_at: now,
                    notification: notification.clone(),
                }))?;
                Ok(SubmissionOutcome {
                    post_id,
                    status,
                    queue_id: None,
                    notification,
                })
            }
        }
    }

    /// Adds a pending entry. The entry is durable before the id is returned.
    pub fn enqueue(&self, entry: QueueEntry) -> Result<String, QueueError> {
        if entry.verdict.decision != Decision::Pending {
            return Err(QueueError::NotPending(entry.verdict.decision));
        }
        let id = entry.id.clone();
        let mut inner = self.write();
        inner.commit(QueueEvent::Enqueue(EnqueuePayload {
            entry: QueueEntry {
                state: EntryState::Pending,
                resolved_at: None,
                ..entry
            },
            notification: None,
        }))?;
        Ok(id)
    }

    /// Approves or rejects a pending entry. First resolution wins; later
    /// attempts get [`QueueError::AlreadyResolved`] and change nothing.
    pub fn resolve(
        &self,
        id: &str,
        action: ModeratorAction,
        moderator: &str,
        note: Option<String>,
    ) -> Result<QueueEntry, QueueError> {
        let mut inner = self.write();
        let entry = inner
            .entries
            .get(id)
            .ok_or_else(|| QueueError::UnknownId(id.to_string()))?;
        if entry.state.is_terminal() {
            return Err(QueueError::AlreadyResolved {
                id: id.to_string(),
                state: entry.state,
            });
        }
        let author = entry.author.clone();
        let (kind, message) = match action {
            ModeratorAction::Approve => (
                NotificationKind::ModeratorApproved,
                "A moderator approved your post; it is now published.".to_string(),
            ),
            ModeratorAction::Reject => (
                NotificationKind::ModeratorRejected,
                match &note {
                    Some(n) => format!("A moderator rejected your post: {n}"),
                    None => "A moderator rejected your post.".to_string(),
                },
            ),
        };
        let notification = inner.notification(&author, kind, message, Some(id.to_string()));
        inner.commit(QueueEvent::Resolve(Resolution {
            id: id.to_string(),
            action,
            moderator: moderator.to_string(),
            note,
            resolved_at: Utc::now(),
            notification,
        }))?;
        Ok(inner.entries[id].clone())
    }

    /// Adds a notification to the outbox.
    pub fn emit_notification(&self, mut n: Notification) -> Result<String, QueueError> {
        let mut inner = self.write();
        if n.id.is_empty() {
            n.id = inner.ids.next_id();
        }
        let id = n.id.clone();
        inner.commit(QueueEvent::Notify(n))?;
        Ok(id)
    }

    /// Newest first; all authors when `author` is `None`.
    pub fn list_notifications(&self, author: Option<&str>) -> Vec<Notification> {
        let inner = self.read();
        let mut out: Vec<Notification> = inner
            .notifications
            .iter()
            .filter(|n| author.is_none_or(|a| n.author == a))
            .cloned()
            .collect();
        out.sort_by(|a, b| (b.created_at, &b.id).cmp(&(a.created_at, &a.id)));
        out
    }

    /// Entries in `state`, in submission order.
    pub fn list(&self, state: EntryState, filter: &QueueFilter, page: Page) -> Vec<QueueEntry> {
        let inner = self.read();
        let mut matching: Vec<&QueueEntry> = inner
            .entries
            .values()
            .filter(|e| e.state == state)
            .filter(|e| filter.reason.is_none_or(|r| e.reason == r))
            .filter(|e| filter.since.is_none_or(|t| e.submitted_at >= t))
            .filter(|e| filter.until.is_none_or(|t| e.submitted_at <= t))
            .collect();
        matching.sort_by(|a, b| (a.submitted_at, &a.id).cmp(&(b.submitted_at, &b.id)));
        matching
            .into_iter()
            .skip(page.offset)
            .take(page.limit)
            .cloned()
            .collect()
    }

    pub fn list_pending(&self, filter: &QueueFilter, page: Page) -> Vec<QueueEntry> {
        self.list(EntryState::Pending, filter, page)
    }

    pub fn entry(&self, id: &str) -> Option<QueueEntry> {
        self.read().entries.get(id).cloned()
    }

    pub fn post(&self, id: &str) -> Option<PostRecord> {
        let inner = self.read();
        if let Some(p) = inner.published.get(id) {
            return Some(PostRecord {
                id: p.id.clone(),
                author: p.author.clone(),
                status: p.status,
                parts: p.parts.clone(),
                verdict: p.verdict.clone(),
            });
        }
        inner.entries.get(id).map(|e| PostRecord {
            id: e.id.clone(),
            author: e.author.clone(),
            status: match e.state {
                EntryState::Pending => PostStatus::Pending,
                EntryState::Approved => PostStatus::Approved,
                EntryState::RejectedByModerator => PostStatus::RejectedByModerator,
            },
            parts: e.parts.clone(),
            verdict: e.verdict.clone(),
        })
    }

    pub fn counts(&self) -> QueueCounts {
        let inner = self.read();
        let mut c = QueueCounts {
            enqueued: inner.entries.len(),
            ..QueueCounts::default()
        };
        for e in inner.entries.values() {
            match e.state {
                EntryState::Pending => c.pending += 1,
                EntryState::Approved => c.approved += 1,
                EntryState::RejectedByModerator => c.rejected_by_moderator += 1,
            }
        }
        c
    }

    /// Every journal record applied so far, oldest first.
    pub fn history(&self) -> Vec<QueueRecord> {
        self.read().history.clone()
    }

    /// Snapshot of the full index, for comparing a live store with a replay.
    pub fn state(&self) -> QueueState {
        let inner = self.read();
        QueueState {
            entries: inner.entries.clone(),
            published: inner.published.clone(),
            notifications: inner.notifications.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueueState {
    pub entries: BTreeMap<String, QueueEntry>,
    pub published: BTreeMap<String, PublishedPost>,
    pub notifications: Vec<Notification>,
}
