//! Allocation-only core of a blog-post supervision engine.
//!
//! Every submitted entry is split into parts (title, body, comments). Each
//! part is checked against a restricted-link list first, then a demand-based
//! word list, and finally scored by the share of slang words among the
//! non-stop-words it contains. The part outcomes are folded into one
//! [`Decision`] for the whole post.
//!
//! This crate does no IO. Reading list files, persistence and the HTTP
//! surface live in the `blogsv` crate.

#![no_std]

extern crate alloc;

pub mod engine;
pub mod lexicon;
pub mod term;
pub mod textproc;

pub use crate::engine::{
    compute_frequency, decide, evaluate_part, evaluate_post, Decision, EngineError, FrequencyStats, MatchKind,
    MatchRecord, PartVerdict, PostVerdict, Reason, Thresholds, ThresholdsError,
};
pub use crate::lexicon::{
    parse_link_list, parse_stop_list, parse_term_list, LexiconError, LexiconSnapshot, LinkPattern, ListKind,
    ListSource, StopCategory, StopWord, TokenClass,
};
pub use crate::term::{normalize, Term, TermError};
pub use crate::textproc::{
    extract_links, normalize_url, tokenize, ExtractedLink, NormalizedUrl, Part, PartKind, Span, Token, UrlError,
};
