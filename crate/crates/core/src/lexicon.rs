//! The dictionary database: slang, demand-based, stop-word and
//! restricted-link lists, bundled into immutable versioned snapshots.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write as _};
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::term::{Term, TermError};
use crate::textproc::{normalize_host, NormalizedUrl};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexiconError {
    #[error("{file}:{line}: {message}")]
    Malformed { file: String, line: usize, message: String },
    #[error(
        "{term:?} is listed both as slang ({slang_file}:{slang_line}) and as a stop word ({stop_file}:{stop_line})"
    )]
    SlangStopOverlap {
        term: String,
        slang_file: String,
        slang_line: usize,
        stop_file: String,
        stop_line: usize,
    },
    #[error("invalid term: {0}")]
    InvalidTerm(#[from] TermError),
    #[error("invalid link pattern {pattern:?}: {message}")]
    InvalidLinkPattern { pattern: String, message: String },
}

/// Which list a journal record or error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ListKind {
    Slang,
    Demand,
    Stop,
    Links,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopCategory {
    AuxVerb,
    Preposition,
    Article,
    Connective,
    Pronoun,
    #[default]
    Other,
}

impl StopCategory {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopCategory::AuxVerb => "aux_verb",
            StopCategory::Preposition => "preposition",
            StopCategory::Article => "article",
            StopCategory::Connective => "connective",
            StopCategory::Pronoun => "pronoun",
            StopCategory::Other => "other",
        }
    }
}

impl FromStr for StopCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "aux_verb" => StopCategory::AuxVerb,
            "preposition" => StopCategory::Preposition,
            "article" => StopCategory::Article,
            "connective" => StopCategory::Connective,
            "pronoun" => StopCategory::Pronoun,
            "other" => StopCategory::Other,
            _ => return Err(alloc::format!("unknown stop-word category {s:?}")),
        })
    }
}

/// A word omitted before frequency computation. The category is informative.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StopWord {
    pub term: Term,
    pub category: StopCategory,
}

/// A restricted site: a host, optionally narrowed to a path prefix.
///
/// A pattern covers its host and every subdomain of it. A path prefix
/// matches whole segments, so `/adult` covers `/adult` and `/adult/x` but
/// not `/adultery`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LinkPattern {
    pub host: String,
    pub path_prefix: Option<String>,
}

impl LinkPattern {
    /// Parses `host` or `host/path-prefix` (no scheme, no port).
    pub fn parse(raw: &str) -> Result<Self, LexiconError> {
        let invalid = |message: &str| LexiconError::InvalidLinkPattern {
            pattern: String::from(raw),
            message: String::from(message),
        };
        let raw_trimmed = raw.trim();
        if raw_trimmed.contains("://") {
            return Err(invalid("scheme not allowed"));
        }
        let (host, path) = match raw_trimmed.find('/') {
            Some(i) => (&raw_trimmed[..i], &raw_trimmed[i..]),
            None => (raw_trimmed, ""),
        };
        if host.contains(':') {
            return Err(invalid("port not allowed"));
        }
        let host = normalize_host(host).map_err(|e| invalid(&e.to_string()))?;
        if path.contains(['?', '#']) || path.chars().any(char::is_whitespace) {
            return Err(invalid("path prefix must be a plain path"));
        }
        let path = path.trim_end_matches('/');
        Ok(LinkPattern {
            host,
            path_prefix: (!path.is_empty()).then(|| String::from(path)),
        })
    }

    pub fn host_matches(&self, host: &str) -> bool {
        host == self.host
            || (host.len() > self.host.len()
                && host.ends_with(self.host.as_str())
                && host.as_bytes()[host.len() - self.host.len() - 1] == b'.')
    }

    pub fn path_matches(&self, path: &str) -> bool {
        match &self.path_prefix {
            None => true,
            Some(prefix) => {
                path.starts_with(prefix.as_str())
                    && (path.len() == prefix.len() || path.as_bytes()[prefix.len()] == b'/')
            }
        }
    }

    pub fn matches(&self, url: &NormalizedUrl) -> bool {
        self.host_matches(&url.host) && self.path_matches(&url.path)
    }

    fn path_len(&self) -> usize {
        self.path_prefix.as_ref().map_or(0, String::len)
    }
}

impl fmt::Display for LinkPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.host)?;
        if let Some(p) = &self.path_prefix {
            f.write_str(p)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenClass {
    Slang,
    Demand,
    Stop,
    Plain,
}

/// Named contents of one list file.
#[derive(Debug, Clone, Copy)]
pub struct ListSource<'a> {
    pub name: &'a str,
    pub content: &'a str,
}

impl<'a> ListSource<'a> {
    pub fn new(name: &'a str, content: &'a str) -> Self {
        ListSource { name, content }
    }

    /// Yields `(line number, content)` with comments and blank lines removed.
    fn entries(&self) -> impl Iterator<Item = (usize, &'a str)> {
        self.content.lines().enumerate().filter_map(|(i, line)| {
            let line = line.split('#').next().unwrap_or("");
            let line = line.trim_matches(|c: char| c == ' ' || c == '\r' || c == '\u{feff}');
            (!line.trim().is_empty()).then_some((i + 1, line))
        })
    }

    fn malformed(&self, line: usize, message: impl Into<String>) -> LexiconError {
        LexiconError::Malformed {
            file: String::from(self.name),
            line,
            message: message.into(),
        }
    }
}

/// Parses a one-term-per-line list. Returns each term with the first line
/// it appeared on.
pub fn parse_term_list(src: &ListSource<'_>) -> Result<BTreeMap<Term, usize>, LexiconError> {
    let mut out = BTreeMap::new();
    for (line, entry) in src.entries() {
        let term = Term::new(entry).map_err(|e| src.malformed(line, e.to_string()))?;
        out.entry(term).or_insert(line);
    }
    Ok(out)
}

/// Parses `term[TAB category]` lines.
pub fn parse_stop_list(src: &ListSource<'_>) -> Result<BTreeMap<Term, (StopCategory, usize)>, LexiconError> {
    let mut out = BTreeMap::new();
    for (line, entry) in src.entries() {
        let (word, category) = match entry.split_once('\t') {
            Some((w, c)) => {
                let cat = c.trim().parse::<StopCategory>().map_err(|e| src.malformed(line, e))?;
                (w, cat)
            }
            None => (entry, StopCategory::Other),
        };
        let term = Term::new(word).map_err(|e| src.malformed(line, e.to_string()))?;
        out.entry(term).or_insert((category, line));
    }
    Ok(out)
}

pub fn parse_link_list(src: &ListSource<'_>) -> Result<BTreeSet<LinkPattern>, LexiconError> {
    let mut out = BTreeSet::new();
    for (line, entry) in src.entries() {
        let pattern = LinkPattern::parse(entry).map_err(|e| src.malformed(line, e.to_string()))?;
        out.insert(pattern);
    }
    Ok(out)
}

/// An immutable, versioned view of all four lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconSnapshot {
    version: u64,
    slang: BTreeSet<Term>,
    demand: BTreeSet<Term>,
    stop: BTreeMap<Term, StopCategory>,
    blocked_links: BTreeSet<LinkPattern>,
    // host -> patterns on that host, longest path prefix first
    link_index: BTreeMap<String, Vec<LinkPattern>>,
}

impl Default for LexiconSnapshot {
    fn default() -> Self {
        LexiconSnapshot {
            version: 1,
            slang: BTreeSet::new(),
            demand: BTreeSet::new(),
            stop: BTreeMap::new(),
            blocked_links: BTreeSet::new(),
            link_index: BTreeMap::new(),
        }
    }
}

impl LexiconSnapshot {
    /// Builds a snapshot from in-memory lists. Fails if a slang term is also
    /// a stop word.
    pub fn new(
        version: u64,
        slang: impl IntoIterator<Item = Term>,
        demand: impl IntoIterator<Item = Term>,
        stop: impl IntoIterator<Item = StopWord>,
        blocked_links: impl IntoIterator<Item = LinkPattern>,
    ) -> Result<Self, LexiconError> {
        let slang: BTreeSet<Term> = slang.into_iter().collect();
        let stop: BTreeMap<Term, StopCategory> = stop.into_iter().map(|s| (s.term, s.category)).collect();
        if let Some(term) = slang.iter().find(|t| stop.contains_key(*t)) {
            return Err(LexiconError::SlangStopOverlap {
                term: term.to_string(),
                slang_file: String::from("slang"),
                slang_line: 0,
                stop_file: String::from("stop"),
                stop_line: 0,
            });
        }
        Ok(Self::assemble(
            version,
            slang,
            demand.into_iter().collect(),
            stop,
            blocked_links.into_iter().collect(),
        ))
    }

    /// Parses the four list files into a version-1 snapshot.
    pub fn parse(
        slang: ListSource<'_>,
        demand: ListSource<'_>,
        stop: ListSource<'_>,
        links: ListSource<'_>,
    ) -> Result<Self, LexiconError> {
        let slang_terms = parse_term_list(&slang)?;
        let demand_terms = parse_term_list(&demand)?;
        let stop_terms = parse_stop_list(&stop)?;
        let link_patterns = parse_link_list(&links)?;
        for (term, slang_line) in &slang_terms {
            if let Some((_, stop_line)) = stop_terms.get(term) {
                return Err(LexiconError::SlangStopOverlap {
                    term: term.to_string(),
                    slang_file: String::from(slang.name),
                    slang_line: *slang_line,
                    stop_file: String::from(stop.name),
                    stop_line: *stop_line,
                });
            }
        }
        Ok(Self::assemble(
            1,
            slang_terms.into_keys().collect(),
            demand_terms.into_keys().collect(),
            stop_terms.into_iter().map(|(t, (c, _))| (t, c)).collect(),
            link_patterns,
        ))
    }

    fn assemble(
        version: u64,
        slang: BTreeSet<Term>,
        demand: BTreeSet<Term>,
        stop: BTreeMap<Term, StopCategory>,
        blocked_links: BTreeSet<LinkPattern>,
    ) -> Self {
        let mut link_index: BTreeMap<String, Vec<LinkPattern>> = BTreeMap::new();
        for p in &blocked_links {
            link_index.entry(p.host.clone()).or_default().push(p.clone());
        }
        for patterns in link_index.values_mut() {
            patterns.sort_by(|a, b| b.path_len().cmp(&a.path_len()).then_with(|| a.cmp(b)));
        }
        LexiconSnapshot {
            version,
            slang,
            demand,
            stop,
            blocked_links,
            link_index,
        }
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn slang(&self) -> &BTreeSet<Term> {
        &self.slang
    }

    pub fn demand(&self) -> &BTreeSet<Term> {
        &self.demand
    }

    pub fn stop_words(&self) -> impl Iterator<Item = StopWord> + '_ {
        self.stop.iter().map(|(t, c)| StopWord {
            term: t.clone(),
            category: *c,
        })
    }

    pub fn stop_len(&self) -> usize {
        self.stop.len()
    }

    pub fn is_stop(&self, term: &Term) -> bool {
        self.stop.contains_key(term)
    }

    pub fn blocked_links(&self) -> &BTreeSet<LinkPattern> {
        &self.blocked_links
    }

    /// Same lists under a different version number.
    pub fn with_version(&self, version: u64) -> Self {
        LexiconSnapshot {
            version,
            ..self.clone()
        }
    }

    /// Returns the next snapshot with `term` in the demand list, or `None`
    /// when it is already there.
    pub fn with_demand_added(&self, term: &Term) -> Option<Self> {
        if self.demand.contains(term) {
            return None;
        }
        let mut next = self.clone();
        next.demand.insert(term.clone());
        next.version += 1;
        Some(next)
    }

    /// Returns the next snapshot without `term`, or `None` when it is absent.
    pub fn with_demand_removed(&self, term: &Term) -> Option<Self> {
        if !self.demand.contains(term) {
            return None;
        }
        let mut next = self.clone();
        next.demand.remove(term);
        next.version += 1;
        Some(next)
    }

    /// Demand wins over slang; stop applies only when neither matches.
    pub fn classify(&self, token: &Term) -> TokenClass {
        if self.demand.contains(token) {
            TokenClass::Demand
        } else if self.slang.contains(token) {
            TokenClass::Slang
        } else if self.stop.contains_key(token) {
            TokenClass::Stop
        } else {
            TokenClass::Plain
        }
    }

    /// The most specific blocked pattern covering `url`: longest host first,
    /// then longest path prefix.
    pub fn match_link(&self, url: &NormalizedUrl) -> Option<&LinkPattern> {
        let mut host = url.host.as_str();
        loop {
            if let Some(hit) = self
                .link_index
                .get(host)
                .and_then(|ps| ps.iter().find(|p| p.path_matches(&url.path)))
            {
                return Some(hit);
            }
            let dot = host.find('.')?;
            host = &host[dot + 1..];
        }
    }

    /// Renders the four lists in their file formats:
    /// `(slang, demand, stop, links)`.
    pub fn render_files(&self) -> (String, String, String, String) {
        let terms = |set: &BTreeSet<Term>| {
            let mut s = String::new();
            for t in set {
                let _ = writeln!(s, "{t}");
            }
            s
        };
        let mut stop = String::new();
        for (t, c) in &self.stop {
            let _ = writeln!(stop, "{t}\t{}", c.as_str());
        }
        let mut links = String::new();
        for p in &self.blocked_links {
            let _ = writeln!(links, "{p}");
        }
        (terms(&self.slang), terms(&self.demand), stop, links)
    }
}
