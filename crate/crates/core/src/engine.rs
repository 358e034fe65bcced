//! Per-part supervision and aggregation into a post verdict.
//!
//! A part is rejected outright if it links to a restricted site. Otherwise a
//! demand-list word holds it for moderator approval. Otherwise the slang
//! frequency level (slang occurrences over non-stop words) is banded by
//! [`Thresholds`].

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::{LexiconSnapshot, TokenClass};
use crate::textproc::{extract_links, tokenize, Part, PartKind, Span, Token};

/// Outcome of supervision, ordered by severity (`Publish` lowest).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Publish,
    PublishNotify,
    Pending,
    Reject,
}

impl Decision {
    pub const ALL: [Decision; 4] = [
        Decision::Publish,
        Decision::PublishNotify,
        Decision::Pending,
        Decision::Reject,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Decision::Publish => "publish",
            Decision::PublishNotify => "publish_notify",
            Decision::Pending => "pending",
            Decision::Reject => "reject",
        }
    }

    /// Whether the author is notified automatically at submission.
    pub fn notifies_author(&self) -> bool {
        matches!(self, Decision::Reject | Decision::PublishNotify)
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    BlockedLink,
    DemandTerm,
    Frequency,
}

impl Reason {
    pub fn as_str(&self) -> &'static str {
        match self {
            Reason::BlockedLink => "blocked_link",
            Reason::DemandTerm => "demand_term",
            Reason::Frequency => "frequency",
        }
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThresholdsError {
    #[error("thresholds must satisfy 0 <= notify ({notify}) < pending ({pending}) <= reject ({reject}) <= 100")]
    OutOfOrder { notify: f64, pending: f64, reject: f64 },
    #[error("cannot parse thresholds: {0}")]
    Syntax(String),
}

/// Frequency band edges, in percent.
///
/// `level > reject_above` rejects, `level >= pending_from` holds for a
/// moderator, `level > notify_above` publishes with a notice, anything lower
/// publishes silently.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    reject_above: f64,
    pending_from: f64,
    notify_above: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            reject_above: 40.0,
            pending_from: 6.0,
            notify_above: 0.0,
        }
    }
}

impl Thresholds {
    pub fn new(reject_above: f64, pending_from: f64, notify_above: f64) -> Result<Self, ThresholdsError> {
        let ordered =
            0.0 <= notify_above && notify_above < pending_from && pending_from <= reject_above && reject_above <= 100.0;
        if !ordered {
            return Err(ThresholdsError::OutOfOrder {
                notify: notify_above,
                pending: pending_from,
                reject: reject_above,
            });
        }
        Ok(Thresholds {
            reject_above,
            pending_from,
            notify_above,
        })
    }

    pub fn reject_above(&self) -> f64 {
        self.reject_above
    }

    pub fn pending_from(&self) -> f64 {
        self.pending_from
    }

    pub fn notify_above(&self) -> f64 {
        self.notify_above
    }
}

impl fmt::Display for Thresholds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "reject={},pending={},notify={}",
            self.reject_above, self.pending_from, self.notify_above
        )
    }
}

/// Parses `reject=40,pending=6[,notify=0]`; omitted keys keep their defaults.
impl FromStr for Thresholds {
    type Err = ThresholdsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let d = Thresholds::default();
        let (mut reject, mut pending, mut notify) = (d.reject_above, d.pending_from, d.notify_above);
        for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| ThresholdsError::Syntax(item.to_string()))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| ThresholdsError::Syntax(item.to_string()))?;
            match key.trim() {
                "reject" => reject = value,
                "pending" => pending = value,
                "notify" => notify = value,
                other => return Err(ThresholdsError::Syntax(other.to_string())),
            }
        }
        Thresholds::new(reject, pending, notify)
    }
}

/// Word counts behind a frequency level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyStats {
    pub total_tokens: usize,
    pub omitted: usize,
    pub examined: usize,
    pub slang_count: usize,
    /// Percentage rounded half-up to two decimals.
    pub frequency_level: f64,
}

impl FrequencyStats {
    pub fn new(total_tokens: usize, omitted: usize, slang_count: usize) -> Self {
        debug_assert!(omitted <= total_tokens);
        let examined = total_tokens - omitted;
        debug_assert!(slang_count <= examined);
        let mut stats = FrequencyStats {
            total_tokens,
            omitted,
            examined,
            slang_count,
            frequency_level: 0.0,
        };
        stats.frequency_level = stats.level_hundredths() as f64 / 100.0;
        stats
    }

    /// Full-precision level used for banding.
    pub fn exact_level(&self) -> f64 {
        if self.examined == 0 {
            0.0
        } else {
            100.0 * self.slang_count as f64 / self.examined as f64
        }
    }

    /// The level in hundredths of a percent, rounded half-up exactly.
    pub fn level_hundredths(&self) -> u64 {
        if self.examined == 0 {
            return 0;
        }
        let (s, e) = (self.slang_count as u64, self.examined as u64);
        (20_000 * s + e) / (2 * e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKind {
    Slang,
    Demand,
    Link,
}

/// A highlighted hit: a slang or demand token, or a blocked link.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub kind: MatchKind,
    pub span: Span,
    /// The normalized term, or the blocked pattern that matched.
    pub matched: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartVerdict {
    pub part_kind: PartKind,
    pub decision: Decision,
    pub reason: Reason,
    pub stats: FrequencyStats,
    pub matches: Vec<MatchRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostVerdict {
    pub decision: Decision,
    pub part_verdicts: Vec<PartVerdict>,
    pub notification_required: bool,
    pub lexicon_version: u64,
}

impl PostVerdict {
    /// The part that determined the post decision. Among equally severe
    /// parts the body is preferred, then the title, then comments.
    pub fn primary_part(&self) -> &PartVerdict {
        let rank = |k: PartKind| match k {
            PartKind::Body => 0,
            PartKind::Title => 1,
            PartKind::Comment => 2,
        };
        self.part_verdicts
            .iter()
            .filter(|p| p.decision == self.decision)
            .min_by_key(|p| rank(p.part_kind))
            .expect("post verdict has at least one part at its own severity")
    }

    /// Reason for the post decision; a blocked link outranks the rest when
    /// several rejecting parts disagree.
    pub fn reason(&self) -> Reason {
        self.part_verdicts
            .iter()
            .filter(|p| p.decision == self.decision)
            .map(|p| p.reason)
            .min()
            .unwrap_or(Reason::Frequency)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("post has no parts")]
    EmptyPost,
}

/// Maps a frequency level (percent) onto its band.
pub fn decide(frequency_level: f64, thresholds: &Thresholds) -> Decision {
    if frequency_level > thresholds.reject_above {
        Decision::Reject
    } else if frequency_level >= thresholds.pending_from {
        Decision::Pending
    } else if frequency_level > thresholds.notify_above {
        Decision::PublishNotify
    } else {
        Decision::Publish
    }
}

struct TokenScan {
    stats: FrequencyStats,
    matches: Vec<MatchRecord>,
    demand_hit: bool,
}

fn scan_tokens(tokens: &[Token<'_>], snapshot: &LexiconSnapshot) -> TokenScan {
    let mut omitted = 0;
    let mut slang = 0;
    let mut demand_hit = false;
    let mut matches = Vec::new();
    for token in tokens {
        let kind = match snapshot.classify(&token.normalized) {
            TokenClass::Stop => {
                omitted += 1;
                continue;
            }
            TokenClass::Plain => continue,
            TokenClass::Slang => {
                slang += 1;
                MatchKind::Slang
            }
            TokenClass::Demand => {
                demand_hit = true;
                MatchKind::Demand
            }
        };
        matches.push(MatchRecord {
            kind,
            span: token.span,
            matched: token.normalized.to_string(),
        });
    }
    TokenScan {
        stats: FrequencyStats::new(tokens.len(), omitted, slang),
        matches,
        demand_hit,
    }
}

/// Counts stop words and slang occurrences over `tokens`.
pub fn compute_frequency(tokens: &[Token<'_>], snapshot: &LexiconSnapshot) -> FrequencyStats {
    scan_tokens(tokens, snapshot).stats
}

/// Evaluates one part: blocked links first, then demand terms, then the
/// slang frequency band. Stats and matches are always reported in full.
pub fn evaluate_part(part: &Part, snapshot: &LexiconSnapshot, thresholds: &Thresholds) -> PartVerdict {
    let mut matches: Vec<MatchRecord> = extract_links(&part.text)
        .into_iter()
        .filter_map(|link| {
            snapshot.match_link(&link.url).map(|p| MatchRecord {
                kind: MatchKind::Link,
                span: link.span,
                matched: p.to_string(),
            })
        })
        .collect();
    let blocked = !matches.is_empty();

    let tokens = tokenize(&part.text);
    let scan = scan_tokens(&tokens, snapshot);
    matches.extend(scan.matches);
    matches.sort_by_key(|m| m.span);

    let (decision, reason) = if blocked {
        (Decision::Reject, Reason::BlockedLink)
    } else if scan.demand_hit {
        (Decision::Pending, Reason::DemandTerm)
    } else {
        (decide(scan.stats.exact_level(), thresholds), Reason::Frequency)
    };

    PartVerdict {
        part_kind: part.kind(),
        decision,
        reason,
        stats: scan.stats,
        matches,
    }
}

/// Evaluates every part and takes the most severe decision.
pub fn evaluate_post(
    parts: &[Part],
    snapshot: &LexiconSnapshot,
    thresholds: &Thresholds,
) -> Result<PostVerdict, EngineError> {
    if parts.is_empty() {
        return Err(EngineError::EmptyPost);
    }
    let part_verdicts: Vec<PartVerdict> = parts.iter().map(|p| evaluate_part(p, snapshot, thresholds)).collect();
    let decision = part_verdicts
        .iter()
        .map(|v| v.decision)
        .max()
        .unwrap_or(Decision::Publish);
    Ok(PostVerdict {
        decision,
        part_verdicts,
        notification_required: decision.notifies_author(),
        lexicon_version: snapshot.version(),
    })
}
