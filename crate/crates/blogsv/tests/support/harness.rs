//! An in-process service over a temporary lexicon directory and journal.

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{HeaderMap, Method, Request, StatusCode};
use blogsv::lexicon::{self, save_lexicon, LexiconFiles, LexiconStore};
use blogsv::queue::{self, QueueStore};
use blogsv::repro::bundled_lexicon;
use blogsv::service::{router, ApiKeys, AppState, Role};
use blogsv_core::Thresholds;
use http_body_util::BodyExt;
use serde_json::Value;
use tempfile::TempDir;
use tower::ServiceExt;

pub const AUTHOR_KEY: &str = "key-alice";
pub const OTHER_AUTHOR_KEY: &str = "key-bob";
pub const MODERATOR_KEY: &str = "key-mod";
pub const ADMIN_KEY: &str = "key-admin";

pub const ROLE_KEYS: [(Role, &str, &str); 3] = [
    (Role::Author, AUTHOR_KEY, "alice"),
    (Role::Moderator, MODERATOR_KEY, "mod1"),
    (Role::Admin, ADMIN_KEY, "root"),
];

pub struct Harness {
    pub dir: TempDir,
    pub state: AppState,
}

#[derive(Debug)]
pub struct Reply {
    pub status: StatusCode,
    pub headers: HeaderMap,
    pub body: Value,
}

fn keys() -> ApiKeys {
    let mut keys = ApiKeys::new();
    keys.insert(AUTHOR_KEY, Role::Author, "alice");
    keys.insert(OTHER_AUTHOR_KEY, Role::Author, "bob");
    keys.insert(MODERATOR_KEY, Role::Moderator, "mod1");
    keys.insert(ADMIN_KEY, Role::Admin, "root");
    keys
}

impl Harness {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().expect("tempdir");
        let files = LexiconFiles::in_dir(dir.path());
        save_lexicon(&files, &bundled_lexicon()).expect("write lexicon");
        let state = Self::open_state(dir.path().to_path_buf());
        Harness { dir, state }
    }

    fn open_state(root: PathBuf) -> AppState {
        let files = LexiconFiles::in_dir(&root);
        AppState {
            lexicon: Arc::new(LexiconStore::open(&files, root.join(lexicon::JOURNAL_FILE)).expect("lexicon store")),
            queue: Arc::new(QueueStore::open(root.join(queue::JOURNAL_FILE)).expect("queue store")),
            keys: Arc::new(keys()),
            thresholds: Thresholds::default(),
        }
    }

    /// Simulates a process restart: fresh stores replayed from the same files.
    pub fn restart(&mut self) {
        self.state = Self::open_state(self.dir.path().to_path_buf());
    }

    pub async fn call(&self, method: Method, uri: &str, key: Option<&str>, body: Option<Value>) -> Reply {
        let mut req = Request::builder().method(method).uri(uri);
        if let Some(key) = key {
            req = req.header("x-api-key", key);
        }
        let body = match body {
            Some(v) => {
                req = req.header("content-type", "application/json");
                Body::from(v.to_string())
            }
            None => Body::empty(),
        };
        self.send(req.body(body).expect("request")).await
    }

    pub async fn send(&self, req: Request<Body>) -> Reply {
        let resp = router(self.state.clone()).oneshot(req).await.expect("infallible");
        let status = resp.status();
        let headers = resp.headers().clone();
        let bytes = resp.into_body().collect().await.expect("body").to_bytes();
        let body = if bytes.is_empty() {
            Value::Null
        } else {
            serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
        };
        Reply { status, headers, body }
    }

    pub async fn submit(&self, key: &str, author: &str, title: &str, body: &str) -> Reply {
        self.call(
            Method::POST,
            "/v1/posts",
            Some(key),
            Some(serde_json::json!({ "author": author, "title": title, "body": body })),
        )
        .await
    }
}

/// A body with one slang word in ten examined words: 10%, pending.
pub const PENDING_BODY: &str = "idiot garden river morning coffee market bicycle library window season";
/// A body with a restricted link.
pub const REJECT_BODY: &str = "read this https://www.casino-spin.example/win now";
/// One slang word in fifty: 2%, published with a notice.
pub const NOTICE_BODY: &str = "idiot a b c d e f g h i j k l m n o p q r s t u v w x y z aa bb cc dd ee ff gg hh ii jj kk ll mm nn oo pp qq rr ss tt uu vv ww";
pub const BENIGN_BODY: &str = "a quiet walk along the river in the morning";

pub fn runtime() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()
        .expect("runtime")
}
