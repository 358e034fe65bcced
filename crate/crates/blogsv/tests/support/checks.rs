//! Whole-scenario checks used both as integration tests and as acceptance
//! criteria. Each returns a short summary or a description of the failure.

use std::path::Path;

use axum::http::{Method, StatusCode};
use blogsv::journal::FaultPoint;
use blogsv::queue::{EntryState, ModeratorAction, QueueStore};
use blogsv::repro::bundled_lexicon;
use blogsv::service::Role;
use blogsv_core::{evaluate_post, Part, Thresholds};
use serde_json::json;

use super::harness::*;

#[derive(Debug, Clone, Copy)]
enum Endpoint {
    Submit,
    GetPost,
    ListQueue,
    Approve,
    Reject,
    GetDemand,
    AddDemand,
    RemoveDemand,
    Notifications,
    Health,
}

const ENDPOINTS: [Endpoint; 10] = [
    Endpoint::Submit,
    Endpoint::GetPost,
    Endpoint::ListQueue,
    Endpoint::Approve,
    Endpoint::Reject,
    Endpoint::GetDemand,
    Endpoint::AddDemand,
    Endpoint::RemoveDemand,
    Endpoint::Notifications,
    Endpoint::Health,
];

impl Endpoint {
    fn allowed(self) -> Option<&'static [Role]> {
        use Role::*;
        match self {
            Endpoint::Submit | Endpoint::GetPost | Endpoint::Notifications => Some(&[Author, Moderator, Admin]),
            Endpoint::ListQueue | Endpoint::Approve | Endpoint::Reject | Endpoint::GetDemand => {
                Some(&[Moderator, Admin])
            }
            Endpoint::AddDemand | Endpoint::RemoveDemand => Some(&[Admin]),
            Endpoint::Health => None,
        }
    }
}

async fn pending_id(h: &Harness) -> String {
    let r = h.submit(AUTHOR_KEY, "alice", "t", PENDING_BODY).await;
    r.body["queue_id"].as_str().expect("pending submission").to_string()
}

async fn hit(h: &Harness, ep: Endpoint, key: Option<&str>, actor: &str) -> Reply {
    match ep {
        Endpoint::Submit => {
            h.call(
                Method::POST,
                "/v1/posts",
                key,
                Some(json!({"author": actor, "body": BENIGN_BODY})),
            )
            .await
        }
        Endpoint::GetPost => {
            let id = pending_id(h).await;
            h.call(Method::GET, &format!("/v1/posts/{id}"), key, None).await
        }
        Endpoint::ListQueue => h.call(Method::GET, "/v1/queue?state=pending", key, None).await,
        Endpoint::Approve => {
            let id = pending_id(h).await;
            h.call(Method::POST, &format!("/v1/queue/{id}/approve"), key, None)
                .await
        }
        Endpoint::Reject => {
            let id = pending_id(h).await;
            h.call(
                Method::POST,
                &format!("/v1/queue/{id}/reject"),
                key,
                Some(json!({"note": "no"})),
            )
            .await
        }
        Endpoint::GetDemand => h.call(Method::GET, "/v1/lexicon/demand", key, None).await,
        Endpoint::AddDemand => {
            h.call(Method::POST, "/v1/lexicon/demand", key, Some(json!({"term": "flood"})))
                .await
        }
        Endpoint::RemoveDemand => h.call(Method::DELETE, "/v1/lexicon/demand/flood", key, None).await,
        Endpoint::Notifications => h.call(Method::GET, "/v1/notifications", key, None).await,
        Endpoint::Health => h.call(Method::GET, "/v1/healthz", key, None).await,
    }
}

/// Every endpoint under every role, without a key, and with an unknown key.
pub async fn role_matrix() -> Result<String, String> {
    let h = Harness::new();
    let mut failures = Vec::new();
    let mut checked = 0;
    for ep in ENDPOINTS {
        for (role, key, actor) in ROLE_KEYS {
            let r = hit(&h, ep, Some(key), actor).await;
            let allowed = ep.allowed().is_none_or(|roles| roles.contains(&role));
            let ok = if allowed {
                r.status.is_success()
            } else {
                r.status == StatusCode::FORBIDDEN && r.body["code"] == "forbidden"
            };
            if !ok || !r.headers.contains_key("x-lexicon-version") {
                failures.push(format!("{ep:?} as {role:?}: {} {}", r.status, r.body));
            }
            checked += 1;
        }
        for key in [None, Some("not-a-key")] {
            let r = hit(&h, ep, key, "alice").await;
            let ok = match ep.allowed() {
                None => r.status.is_success(),
                Some(_) => r.status == StatusCode::UNAUTHORIZED && r.body["code"] == "unauthorized",
            };
            if !ok {
                failures.push(format!("{ep:?} with key {key:?}: {}", r.status));
            }
            checked += 1;
        }
    }
    if failures.is_empty() {
        Ok(format!("{checked} endpoint/credential pairs"))
    } else {
        Err(failures.join("; "))
    }
}

/// Submissions interrupted at each journal fault point leave either no trace
/// or a complete record after restart.
pub async fn submission_atomicity() -> Result<String, String> {
    let cases = [
        ("publish", BENIGN_BODY),
        ("notice", NOTICE_BODY),
        ("pending", PENDING_BODY),
        ("reject", REJECT_BODY),
    ];
    let mut runs = 0;
    for point in [FaultPoint::BeforeWrite, FaultPoint::TornWrite, FaultPoint::AfterWrite] {
        for (label, body) in cases {
            let mut h = Harness::new();
            let before = h.state.queue.state();
            h.state.queue.inject_fault(point);
            let r = h.submit(AUTHOR_KEY, "alice", "t", body).await;
            if r.status != StatusCode::INTERNAL_SERVER_ERROR {
                return Err(format!("{point:?}/{label}: crashed submission answered {}", r.status));
            }
            let again = h.submit(AUTHOR_KEY, "alice", "t", BENIGN_BODY).await;
            if again.status.is_success() {
                return Err(format!("{point:?}/{label}: crashed store accepted a later write"));
            }

            h.restart();
            let after = h.state.queue.state();
            let history = h.state.queue.history();
            match point {
                FaultPoint::BeforeWrite | FaultPoint::TornWrite => {
                    if after != before || !history.is_empty() {
                        return Err(format!("{point:?}/{label}: partial submission survived restart"));
                    }
                }
                FaultPoint::AfterWrite => {
                    if history.len() != 1 {
                        return Err(format!(
                            "{point:?}/{label}: expected one durable record, found {}",
                            history.len()
                        ));
                    }
                    let complete = match label {
                        "publish" => after.published.len() == 1,
                        "notice" => after.published.len() == 1 && after.notifications.len() == 1,
                        "pending" => after.entries.len() == 1,
                        _ => after.notifications.len() == 1,
                    };
                    if !complete {
                        return Err(format!("{point:?}/{label}: durable record incomplete after restart"));
                    }
                }
            }
            let fresh = h.submit(AUTHOR_KEY, "alice", "t", body).await;
            if !fresh.status.is_success() {
                return Err(format!("{point:?}/{label}: restarted service refused a submission"));
            }
            runs += 1;
        }
    }
    Ok(format!("{runs} crash/restart runs"))
}

fn pending_parts(i: usize) -> Vec<Part> {
    vec![
        Part::title(format!("entry {i}")),
        Part::body(format!(
            "idiot garden river morning coffee market bicycle library window number{i}"
        )),
    ]
}

/// Enqueue 100, resolve 40, restart, and compare the replayed index.
pub fn queue_durability(dir: &Path) -> Result<String, String> {
    let path = dir.join("queue.ndjson");
    let lexicon = bundled_lexicon();
    let thresholds = Thresholds::default();
    let live = QueueStore::open(&path).map_err(|e| e.to_string())?;
    let mut ids = Vec::new();
    for i in 0..100 {
        let parts = pending_parts(i);
        let verdict = evaluate_post(&parts, &lexicon, &thresholds).map_err(|e| e.to_string())?;
        let outcome = live
            .submit(&format!("author{}", i % 7), parts, verdict)
            .map_err(|e| e.to_string())?;
        ids.push(outcome.queue_id.ok_or("submission was not queued")?);
    }
    for (n, id) in ids.iter().take(40).enumerate() {
        let action = if n % 3 == 0 {
            ModeratorAction::Reject
        } else {
            ModeratorAction::Approve
        };
        live.resolve(id, action, "mod1", Some(format!("note {n}")))
            .map_err(|e| e.to_string())?;
    }
    if live.resolve(&ids[0], ModeratorAction::Approve, "mod2", None).is_ok() {
        return Err("second resolution was accepted".into());
    }
    let state = live.state();
    let counts = live.counts();
    drop(live);

    let replayed = QueueStore::open(&path).map_err(|e| e.to_string())?;
    if replayed.state() != state {
        return Err("replayed state differs from the live state".into());
    }
    let c = replayed.counts();
    if c != counts || c.enqueued != 100 || c.pending != 60 || c.approved + c.rejected_by_moderator != 40 {
        return Err(format!("counts after replay: {c:?}"));
    }
    if c.enqueued != c.pending + c.approved + c.rejected_by_moderator {
        return Err("conservation violated".into());
    }
    for (n, id) in ids.iter().enumerate() {
        let state = replayed.entry(id).ok_or("entry lost")?.state;
        let want = match n {
            n if n >= 40 => EntryState::Pending,
            n if n % 3 == 0 => EntryState::RejectedByModerator,
            _ => EntryState::Approved,
        };
        if state != want {
            return Err(format!("entry {n} replayed as {state:?}, expected {want:?}"));
        }
    }

    // A crash after the append but before the index update loses nothing.
    replayed.inject_fault(FaultPoint::AfterWrite);
    if replayed
        .resolve(&ids[50], ModeratorAction::Approve, "mod1", None)
        .is_ok()
    {
        return Err("faulted resolution reported success".into());
    }
    drop(replayed);
    let recovered = QueueStore::open(&path).map_err(|e| e.to_string())?;
    if recovered.entry(&ids[50]).map(|e| e.state) != Some(EntryState::Approved) {
        return Err("resolution durable before the crash was not recovered".into());
    }
    Ok(format!(
        "100 enqueued, 40 resolved ({} approved, {} rejected), replay identical",
        c.approved, c.rejected_by_moderator
    ))
}
