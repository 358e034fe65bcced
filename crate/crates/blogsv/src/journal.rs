//! Append-only newline-delimited JSON journals.
//!
//! Each record is one line, written with a single `write_all` and synced
//! before the append returns. On open, a trailing line without its newline
//! (a write torn by a crash) is truncated away; any other unparsable line is
//! an error.

use std::fs::{File, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::marker::PhantomData;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JournalError {
    #[error("journal {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("journal {path}:{line}: corrupt record: {source}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("journal {path}: simulated crash")]
    Crashed { path: PathBuf },
}

/// Where an injected crash interrupts the next append. Test hook.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultPoint {
    /// Nothing reaches the file.
    BeforeWrite,
    /// Half of the line reaches the file.
    TornWrite,
    /// The full line is durable but the caller never learns it.
    AfterWrite,
}

#[derive(Debug)]
pub struct Journal<R> {
    path: PathBuf,
    file: File,
    fault: Option<FaultPoint>,
    _record: PhantomData<fn() -> R>,
}

impl<R: Serialize + DeserializeOwned> Journal<R> {
    /// Opens (creating if needed) the journal and replays its records.
    pub fn open(path: impl AsRef<Path>) -> Result<(Self, Vec<R>), JournalError> {
        let path = path.as_ref().to_path_buf();
        let io_err = |source| JournalError::Io {
            path: path.clone(),
            source,
        };
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(io_err)?;
        }
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(&path)
            .map_err(io_err)?;
        let mut buf = Vec::new();
        file.read_to_end(&mut buf).map_err(io_err)?;

        let complete = buf.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
        if complete < buf.len() {
            tracing::warn!(path = %path.display(), dropped = buf.len() - complete, "truncating torn journal tail");
            file.set_len(complete as u64).map_err(io_err)?;
            file.seek(SeekFrom::End(0)).map_err(io_err)?;
        }

        let mut records = Vec::new();
        for (i, line) in buf[..complete].split(|&b| b == b'\n').enumerate() {
            if line.iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            let record = serde_json::from_slice(line).map_err(|source| JournalError::Corrupt {
                path: path.clone(),
                line: i + 1,
                source,
            })?;
            records.push(record);
        }
        Ok((
            Journal {
                path,
                file,
                fault: None,
                _record: PhantomData,
            },
            records,
        ))
    }

    pub fn append(&mut self, record: &R) -> Result<(), JournalError> {
        let mut line = serde_json::to_vec(record).expect("journal records serialize");
        line.push(b'\n');
        let io_err = |source| JournalError::Io {
            path: self.path.clone(),
            source,
        };
        match self.fault.take() {
            Some(FaultPoint::BeforeWrite) => return Err(self.crashed()),
            Some(FaultPoint::TornWrite) => {
                self.file.write_all(&line[..line.len() / 2]).map_err(io_err)?;
                self.file.sync_data().map_err(io_err)?;
                return Err(self.crashed());
            }
            Some(FaultPoint::AfterWrite) => {
                self.file.write_all(&line).map_err(io_err)?;
                self.file.sync_data().map_err(io_err)?;
                return Err(self.crashed());
            }
            None => {}
        }
        self.file.write_all(&line).map_err(io_err)?;
        self.file.sync_data().map_err(io_err)
    }

    /// Makes the next append fail at `point`.
    pub fn inject_fault(&mut self, point: FaultPoint) {
        self.fault = Some(point);
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn crashed(&self) -> JournalError {
        JournalError::Crashed {
            path: self.path.clone(),
        }
    }
}
