//! List files on disk and the versioned lexicon store.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use blogsv_core::{LexiconError, LexiconSnapshot, ListKind, ListSource, Term, TermError};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::journal::{Journal, JournalError};

pub const SLANG_FILE: &str = "slang.txt";
pub const DEMAND_FILE: &str = "demand.txt";
pub const STOP_FILE: &str = "stopwords.txt";
pub const LINKS_FILE: &str = "blocked_links.txt";
pub const JOURNAL_FILE: &str = "lexicon-journal.ndjson";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error("invalid term: {0}")]
    InvalidTerm(#[from] TermError),
    #[error(transparent)]
    Journal(#[from] JournalError),
}

/// Paths of the four list files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconFiles {
    pub slang: PathBuf,
    pub demand: PathBuf,
    pub stop: PathBuf,
    pub links: PathBuf,
}

impl LexiconFiles {
    /// The standard file names inside `dir`.
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        LexiconFiles {
            slang: dir.join(SLANG_FILE),
            demand: dir.join(DEMAND_FILE),
            stop: dir.join(STOP_FILE),
            links: dir.join(LINKS_FILE),
        }
    }
}

fn read(path: &Path) -> Result<String, StoreError> {
    fs::read_to_string(path).map_err(|source| StoreError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), StoreError> {
    let err = |source| StoreError::Write {
        path: path.to_path_buf(),
        source,
    };
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(err)?;
    fs::rename(&tmp, path).map_err(err)
}

/// Reads the four list files into a version-1 snapshot.
pub fn load_lexicon(files: &LexiconFiles) -> Result<LexiconSnapshot, StoreError> {
    let slang = read(&files.slang)?;
    let demand = read(&files.demand)?;
    let stop = read(&files.stop)?;
    let links = read(&files.links)?;
    let name = |p: &Path| p.display().to_string();
    let (n_slang, n_demand, n_stop, n_links) = (
        name(&files.slang),
        name(&files.demand),
        name(&files.stop),
        name(&files.links),
    );
    Ok(LexiconSnapshot::parse(
        ListSource::new(&n_slang, &slang),
        ListSource::new(&n_demand, &demand),
        ListSource::new(&n_stop, &stop),
        ListSource::new(&n_links, &links),
    )?)
}

/// Like [`load_lexicon`], with the version advanced by the mutations recorded
/// in the journal at `journal_path`. The journal is only read: a missing file
/// counts as empty and a torn last line is ignored.
pub fn load_versioned(files: &LexiconFiles, journal_path: &Path) -> Result<LexiconSnapshot, StoreError> {
    let snapshot = load_lexicon(files)?;
    let mutations = match fs::read_to_string(journal_path) {
        Ok(text) => text
            .split_inclusive('\n')
            .filter(|l| l.ends_with('\n') && !l.trim().is_empty())
            .count(),
        Err(e) if e.kind() == io::ErrorKind::NotFound => 0,
        Err(source) => {
            return Err(StoreError::Read {
                path: journal_path.to_path_buf(),
                source,
            })
        }
    };
    Ok(snapshot.with_version(1 + mutations as u64))
}

/// Writes all four lists in their file formats.
pub fn save_lexicon(files: &LexiconFiles, snapshot: &LexiconSnapshot) -> Result<(), StoreError> {
    let (slang, demand, stop, links) = snapshot.render_files();
    for path in [&files.slang, &files.demand, &files.stop, &files.links] {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|source| StoreError::Write {
                path: parent.to_path_buf(),
                source,
            })?;
        }
    }
    write_atomic(&files.slang, &slang)?;
    write_atomic(&files.demand, &demand)?;
    write_atomic(&files.stop, &stop)?;
    write_atomic(&files.links, &links)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LexiconOp {
    Add,
    Remove,
}

/// One line of the lexicon journal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconRecord {
    pub ts: DateTime<Utc>,
    pub op: LexiconOp,
    pub list: ListKind,
    pub term: Term,
    pub note: String,
    pub actor: String,
}

/// Result of a demand-list mutation.
#[derive(Debug, Clone)]
pub struct Mutation {
    pub snapshot: Arc<LexiconSnapshot>,
    /// False when the call was a no-op (term already present or absent).
    pub changed: bool,
}

#[derive(Debug)]
struct Persistence {
    demand_path: PathBuf,
    journal: Journal<LexiconRecord>,
}

/// Single-writer, many-reader holder of the current snapshot.
///
/// Readers clone an `Arc` of the current snapshot and keep a consistent view
/// for as long as they hold it. Mutations build a new snapshot and swap it in.
#[derive(Debug)]
pub struct LexiconStore {
    current: RwLock<Arc<LexiconSnapshot>>,
    writer: Mutex<Option<Persistence>>,
}

impl LexiconStore {
    /// A store without persistence.
    pub fn in_memory(snapshot: LexiconSnapshot) -> Self {
        LexiconStore {
            current: RwLock::new(Arc::new(snapshot)),
            writer: Mutex::new(None),
        }
    }

    /// Loads the list files and appends mutations to `journal_path`. Demand
    /// changes are written back to the demand file.
    pub fn open(files: &LexiconFiles, journal_path: impl AsRef<Path>) -> Result<Self, StoreError> {
        // Only changing mutations are journaled, so the record count gives
        // the number of versions since the files were first loaded.
        let (journal, records) = Journal::<LexiconRecord>::open(journal_path)?;
        let snapshot = load_lexicon(files)?.with_version(1 + records.len() as u64);
        Ok(LexiconStore {
            current: RwLock::new(Arc::new(snapshot)),
            writer: Mutex::new(Some(Persistence {
                demand_path: files.demand.clone(),
                journal,
            })),
        })
    }

    pub fn snapshot(&self) -> Arc<LexiconSnapshot> {
        self.current.read().expect("lexicon lock").clone()
    }

    pub fn add_demand_term(&self, raw: &str, note: &str, actor: &str) -> Result<Mutation, StoreError> {
        let term = Term::new(raw)?;
        self.mutate(LexiconOp::Add, term, note, actor)
    }

    pub fn remove_demand_term(&self, raw: &str, note: &str, actor: &str) -> Result<Mutation, StoreError> {
        let term = Term::new(raw)?;
        self.mutate(LexiconOp::Remove, term, note, actor)
    }

    fn mutate(&self, op: LexiconOp, term: Term, note: &str, actor: &str) -> Result<Mutation, StoreError> {
        let mut writer = self.writer.lock().expect("lexicon writer lock");
        let current = self.snapshot();
        let next = match op {
            LexiconOp::Add => current.with_demand_added(&term),
            LexiconOp::Remove => current.with_demand_removed(&term),
        };
        let Some(next) = next else {
            return Ok(Mutation {
                snapshot: current,
                changed: false,
            });
        };
        if let Some(p) = writer.as_mut() {
            let (_, demand, _, _) = next.render_files();
            write_atomic(&p.demand_path, &demand)?;
            p.journal.append(&LexiconRecord {
                ts: Utc::now(),
                op,
                list: ListKind::Demand,
                term,
                note: note.to_string(),
                actor: actor.to_string(),
            })?;
        }
        let next = Arc::new(next);
        *self.current.write().expect("lexicon lock") = next.clone();
        Ok(Mutation {
            snapshot: next,
            changed: true,
        })
    }
}
