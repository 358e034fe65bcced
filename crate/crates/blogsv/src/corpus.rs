//! File corpora and batch reports.
//!
//! A post file holds the title on its first line, a blank line, then the
//! body.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use blogsv_core::{
    evaluate_post, extract_links, Decision, FrequencyStats, LexiconSnapshot, MatchKind, Part, PostVerdict, Reason,
    Thresholds,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusPost {
    pub id: String,
    pub parts: Vec<Part>,
}

impl CorpusPost {
    pub fn parse(id: impl Into<String>, content: &str) -> Self {
        let content = content.strip_prefix('\u{feff}').unwrap_or(content);
        let (title, rest) = content.split_once('\n').unwrap_or((content, ""));
        let body = rest
            .strip_prefix("\r\n")
            .or_else(|| rest.strip_prefix('\n'))
            .unwrap_or(rest);
        CorpusPost {
            id: id.into(),
            parts: vec![Part::title(title.trim_end_matches('\r')), Part::body(body)],
        }
    }
}

/// Reads every `*.txt` file in `dir`, ordered by file name.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusPost>, CorpusError> {
    let read_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CorpusError::Read { path, source }
    };
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(read_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "txt"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|path| {
            let content = std::fs::read_to_string(&path).map_err(read_err(&path))?;
            let id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok(CorpusPost::parse(id, &content))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionCounts {
    pub publish: usize,
    pub publish_notify: usize,
    pub pending: usize,
    pub reject: usize,
}

impl DecisionCounts {
    pub fn add(&mut self, d: Decision) {
        *self.slot(d) += 1;
    }

    pub fn get(&self, d: Decision) -> usize {
        match d {
            Decision::Publish => self.publish,
            Decision::PublishNotify => self.publish_notify,
            Decision::Pending => self.pending,
            Decision::Reject => self.reject,
        }
    }

    fn slot(&mut self, d: Decision) -> &mut usize {
        match d {
            Decision::Publish => &mut self.publish,
            Decision::PublishNotify => &mut self.publish_notify,
            Decision::Pending => &mut self.pending,
            Decision::Reject => &mut self.reject,
        }
    }

    pub fn total(&self) -> usize {
        self.publish + self.publish_notify + self.pending + self.reject
    }

    /// Published with or without a notice.
    pub fn published(&self) -> usize {
        self.publish + self.publish_notify
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRow {
    pub id: String,
    pub decision: Decision,
    pub reason: Reason,
    /// Stats of the part that decided the post.
    pub stats: FrequencyStats,
    pub links: usize,
    pub blocked_links: usize,
}

impl CorpusRow {
    pub fn from_verdict(id: &str, parts: &[Part], verdict: &PostVerdict) -> Self {
        CorpusRow {
            id: id.to_string(),
            decision: verdict.decision,
            reason: verdict.reason(),
            stats: verdict.primary_part().stats,
            links: parts.iter().map(|p| extract_links(&p.text).len()).sum(),
            blocked_links: verdict
                .part_verdicts
                .iter()
                .flat_map(|p| &p.matches)
                .filter(|m| m.kind == MatchKind::Link)
                .count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub size: usize,
    pub lexicon_version: u64,
    pub totals: DecisionCounts,
    pub rows: Vec<CorpusRow>,
}

impl CorpusReport {
    /// Recounts decisions from the rows.
    pub fn recount(&self) -> DecisionCounts {
        let mut c = DecisionCounts::default();
        for r in &self.rows {
            c.add(r.decision);
        }
        c
    }

    /// 2 if anything was rejected, 1 if anything is pending, else 0.
    pub fn exit_code(&self) -> i32 {
        if self.totals.reject > 0 {
            2
        } else if self.totals.pending > 0 {
            1
        } else {
            0
        }
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<16} {:<15} {:<13} {:>6} {:>7} {:>8} {:>6} {:>8} {:>6}",
            "post", "decision", "reason", "total", "omitted", "examined", "slang", "freq", "links"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<16} {:<15} {:<13} {:>6} {:>7} {:>8} {:>6} {:>8.2} {:>3}/{:<2}",
                r.id,
                r.decision.as_str(),
                r.reason.as_str(),
                r.stats.total_tokens,
                r.stats.omitted,
                r.stats.examined,
                r.stats.slang_count,
                r.stats.frequency_level,
                r.blocked_links,
                r.links,
            );
        }
        let t = &self.totals;
        let _ = writeln!(
            out,
            "\n{} posts: {} publish, {} publish_notify, {} pending, {} reject",
            self.size, t.publish, t.publish_notify, t.pending, t.reject
        );
        out
    }
}

/// Evaluates every post; rows keep corpus order.
pub fn evaluate_corpus(posts: &[CorpusPost], snapshot: &LexiconSnapshot, thresholds: &Thresholds) -> CorpusReport {
    let rows: Vec<CorpusRow> = posts
        .par_iter()
        .map(|p| {
            let verdict = evaluate_post(&p.parts, snapshot, thresholds).expect("corpus posts have parts");
            CorpusRow::from_verdict(&p.id, &p.parts, &verdict)
        })
        .collect();
    let mut totals = DecisionCounts::default();
    for r in &rows {
        totals.add(r.decision);
    }
    CorpusReport {
        size: rows.len(),
        lexicon_version: snapshot.version(),
        totals,
        rows,
    }
}
