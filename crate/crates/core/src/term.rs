//! Normalized single-token dictionary terms.

use alloc::string::String;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

/// Lowercases and applies canonical composition.
///
/// The input is composed before and after lowercasing so that the result is
/// a fixed point: `normalize(&normalize(s)) == normalize(s)`.
pub fn normalize(s: &str) -> String {
    s.nfc().flat_map(char::to_lowercase).nfc().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("term is empty")]
    Empty,
    #[error("term {0:?} contains whitespace")]
    Whitespace(String),
}

/// A normalized dictionary entry: non-empty, one token, no whitespace.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Term(String);

impl Term {
    /// Normalizes `raw` after trimming surrounding whitespace.
    pub fn new(raw: &str) -> Result<Self, TermError> {
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            return Err(TermError::Empty);
        }
        if trimmed.chars().any(char::is_whitespace) {
            return Err(TermError::Whitespace(String::from(trimmed)));
        }
        Ok(Term(normalize(trimmed)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Wraps an already normalized string. Callers guarantee the invariants.
    pub(crate) fn from_normalized(s: String) -> Self {
        debug_assert!(!s.is_empty() && !s.chars().any(char::is_whitespace));
        Term(s)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for Term {
    type Error = TermError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Term::new(&value)
    }
}

impl From<Term> for String {
    fn from(t: Term) -> String {
        t.0
    }
}

impl AsRef<str> for Term {
    fn as_ref(&self) -> &str {
        &self.0
    }
}
