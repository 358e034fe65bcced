//! Tokenization of part text and extraction of embedded links.
//!
//! Links are found first and cut out of the text, so a URL never contributes
//! words to the counts. Everything else is split into words: maximal runs of
//! letters and digits (with attached combining marks), allowing an apostrophe
//! or hyphen between two such characters.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::char::is_combining_mark;

use crate::term::{normalize, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartKind {
    Title,
    Body,
    Comment,
}

impl fmt::Display for PartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PartKind::Title => "title",
            PartKind::Body => "body",
            PartKind::Comment => "comment",
        })
    }
}

/// One evaluable piece of a submission.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Part {
    kind: PartKind,
    pub text: String,
}

impl Part {
    pub fn new(kind: PartKind, text: impl Into<String>) -> Self {
        Part {
            kind,
            text: text.into(),
        }
    }

    pub fn title(text: impl Into<String>) -> Self {
        Self::new(PartKind::Title, text)
    }

    pub fn body(text: impl Into<String>) -> Self {
        Self::new(PartKind::Body, text)
    }

    pub fn comment(text: impl Into<String>) -> Self {
        Self::new(PartKind::Comment, text)
    }

    pub fn kind(&self) -> PartKind {
        self.kind
    }
}

/// Byte offsets `[start, end)` into the part text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn intersects(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token<'a> {
    pub surface: &'a str,
    pub normalized: Term,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NormalizedUrl {
    pub scheme: String,
    pub host: String,
    /// Empty or starting with `/`, never ending with `/`.
    pub path: String,
}

impl fmt::Display for NormalizedUrl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}://{}{}", self.scheme, self.host, self.path)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractedLink<'a> {
    pub raw: &'a str,
    pub url: NormalizedUrl,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UrlError {
    #[error("no http://, https:// or www. prefix")]
    UnsupportedScheme,
    #[error("empty host")]
    EmptyHost,
    #[error("invalid host {0:?}")]
    InvalidHost(String),
    #[error("invalid port {0:?}")]
    InvalidPort(String),
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

fn is_joiner(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '-' | '\u{2010}')
}

fn strip_prefix_ignore_ascii_case<'a>(s: &'a str, prefix: &str) -> Option<&'a str> {
    let head = s.as_bytes().get(..prefix.len())?;
    if head.eq_ignore_ascii_case(prefix.as_bytes()) {
        // prefix is ASCII so the cut lands on a char boundary
        Some(&s[prefix.len()..])
    } else {
        None
    }
}

/// Parses a link candidate into its blocklist identity.
///
/// Scheme and host are lowercased, a leading `www.` label is dropped from the
/// host, and port, query and fragment are discarded. Path case is preserved;
/// trailing slashes are removed.
pub fn normalize_url(raw: &str) -> Result<NormalizedUrl, UrlError> {
    let (scheme, rest) = if let Some(rest) = strip_prefix_ignore_ascii_case(raw, "http://") {
        ("http", rest)
    } else if let Some(rest) = strip_prefix_ignore_ascii_case(raw, "https://") {
        ("https", rest)
    } else if strip_prefix_ignore_ascii_case(raw, "www.").is_some() {
        ("http", raw)
    } else {
        return Err(UrlError::UnsupportedScheme);
    };

    let authority_end = rest.find(['/', '?', '#']).unwrap_or(rest.len());
    let authority = &rest[..authority_end];
    let after = &rest[authority_end..];

    let hostport = match authority.rfind('@') {
        Some(at) => &authority[at + 1..],
        None => authority,
    };
    let host = match hostport.rfind(':') {
        Some(colon) => {
            let port = &hostport[colon + 1..];
            if !port.bytes().all(|b| b.is_ascii_digit()) {
                return Err(UrlError::InvalidPort(String::from(port)));
            }
            &hostport[..colon]
        }
        None => hostport,
    };
    let host = normalize_host(host)?;

    let path_end = after.find(['?', '#']).unwrap_or(after.len());
    let path = after[..path_end].trim_end_matches('/');

    Ok(NormalizedUrl {
        scheme: String::from(scheme),
        host,
        path: String::from(path),
    })
}

/// Lowercases a host, drops one trailing dot and a leading `www.` label.
pub(crate) fn normalize_host(host: &str) -> Result<String, UrlError> {
    let host = host.strip_suffix('.').unwrap_or(host);
    if host.is_empty() {
        return Err(UrlError::EmptyHost);
    }
    let lowered = normalize(host);
    let valid_chars = lowered
        .chars()
        .all(|c| c.is_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if !valid_chars || lowered.split('.').any(str::is_empty) {
        return Err(UrlError::InvalidHost(String::from(host)));
    }
    match lowered.strip_prefix("www.") {
        Some(rest) if rest.contains('.') => Ok(String::from(rest)),
        _ => Ok(lowered),
    }
}

fn link_start_len(rest: &str) -> Option<usize> {
    ["http://", "https://", "www."]
        .iter()
        .find(|p| strip_prefix_ignore_ascii_case(rest, p).is_some())
        .map(|p| p.len())
}

fn trim_link_tail(candidate: &str) -> &str {
    let mut s = candidate;
    loop {
        let Some(last) = s.chars().next_back() else {
            return s;
        };
        let strip = match last {
            '.' | ',' | ';' | ':' | '!' | '?' | '\'' | '"' | '\u{2019}' | '\u{201d}' => true,
            ')' => s.matches('(').count() < s.matches(')').count(),
            ']' => s.matches('[').count() < s.matches(']').count(),
            _ => false,
        };
        if !strip {
            return s;
        }
        s = &s[..s.len() - last.len_utf8()];
    }
}

/// Finds `http://`, `https://` and `www.` links in `text`.
///
/// A link must start at a word boundary and runs to the next whitespace or
/// `<`, `>`, `"`. Trailing sentence punctuation is not part of the link.
/// Candidates that fail [`normalize_url`] are skipped.
pub fn extract_links(text: &str) -> Vec<ExtractedLink<'_>> {
    let mut links = Vec::new();
    let mut prev: Option<char> = None;
    let mut skip_until = 0;
    for (i, c) in text.char_indices() {
        let at_boundary = prev.is_none_or(|p| !is_word_char(p) && !is_combining_mark(p));
        prev = Some(c);
        if i < skip_until || !at_boundary {
            continue;
        }
        let rest = &text[i..];
        let Some(prefix_len) = link_start_len(rest) else {
            continue;
        };
        let end = rest[prefix_len..]
            .find(|ch: char| ch.is_whitespace() || matches!(ch, '<' | '>' | '"'))
            .map_or(rest.len(), |e| e + prefix_len);
        let raw = trim_link_tail(&rest[..end]);
        if let Ok(url) = normalize_url(raw) {
            links.push(ExtractedLink {
                raw,
                url,
                span: Span::new(i, i + raw.len()),
            });
            skip_until = i + raw.len();
        }
    }
    links
}

fn push_words<'a>(text: &'a str, offset: usize, out: &mut Vec<Token<'a>>) {
    let mut chars = text.char_indices().peekable();
    let mut start: Option<usize> = None;
    while let Some((i, c)) = chars.next() {
        let continues = match start {
            None => is_word_char(c),
            Some(_) => {
                is_word_char(c)
                    || is_combining_mark(c)
                    || (is_joiner(c) && chars.peek().is_some_and(|&(_, n)| is_word_char(n)))
            }
        };
        match (start, continues) {
            (None, true) => start = Some(i),
            (Some(s), false) => {
                out.push(word(text, s, i, offset));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(word(text, s, text.len(), offset));
    }
}

fn word(text: &str, start: usize, end: usize, offset: usize) -> Token<'_> {
    let surface = &text[start..end];
    Token {
        surface,
        normalized: Term::from_normalized(normalize(surface)),
        span: Span::new(offset + start, offset + end),
    }
}

/// Splits `text` into word tokens, skipping anything [`extract_links`] finds.
pub fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut cursor = 0;
    for link in extract_links(text) {
        push_words(&text[cursor..link.span.start], cursor, &mut tokens);
        cursor = link.span.end;
    }
    push_words(&text[cursor..], cursor, &mut tokens);
    tokens
}
