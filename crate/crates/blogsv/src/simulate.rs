//! Synthetic corpus generator for estimating the detection rate.
//!
//! Offensive posts carry a restricted link, a demand term, or a slang density
//! of at least the pending threshold. Evasive offensive posts keep their slang
//! density under the pending threshold and cite only unlisted links, so the
//! expected detection rate follows from the generator's counts alone.

use std::fmt::Write as _;

use blogsv_core::{evaluate_post, Decision, LexiconSnapshot, Part, Term, Thresholds, TokenClass};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::DecisionCounts;

/// Ordinary words used for benign text. Entries the lexicon classifies as
/// anything but plain are dropped when the vocabulary is built.
const BENIGN_WORDS: &[&str] = &[
    "garden",
    "river",
    "morning",
    "coffee",
    "market",
    "bicycle",
    "library",
    "window",
    "season",
    "harvest",
    "village",
    "teacher",
    "student",
    "recipe",
    "kitchen",
    "journey",
    "mountain",
    "festival",
    "music",
    "painting",
    "football",
    "cricket",
    "weather",
    "rain",
    "sunlight",
    "family",
    "friend",
    "neighbour",
    "city",
    "road",
    "bridge",
    "train",
    "station",
    "holiday",
    "camera",
    "photo",
    "story",
    "lesson",
    "history",
    "science",
    "computer",
    "program",
    "network",
    "evening",
    "dinner",
    "lunch",
    "breakfast",
    "tea",
    "boat",
    "lake",
    "forest",
    "flower",
    "tree",
    "bird",
    "cloud",
    "ocean",
    "island",
    "museum",
    "concert",
    "poem",
    "novel",
    "chapter",
    "letter",
    "paper",
    "school",
    "college",
    "office",
    "project",
    "meeting",
    "idea",
    "plan",
    "walk",
    "visit",
    "travel",
    "ticket",
    "hotel",
    "street",
    "shop",
    "price",
    "rice",
    "fish",
    "mango",
    "orange",
];

const UNLISTED_LINKS: &[&str] = &[
    "https://en.wikipedia.org/wiki/Dhaka",
    "https://www.example.org/news/local",
    "http://docs.example.net/guide",
    "www.openstreetmap.org/#map=12/23.8/90.4",
    "https://github.com/rust-lang/rust",
];

/// Demand terms the simulation adds to the lexicon for its demand-term posts.
pub const SIMULATION_DEMAND: &[&str] = &["riot", "arson"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub posts: usize,
    pub offensive_fraction: f64,
    pub evasive_fraction: f64,
    pub seed: u64,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SimulateError {
    #[error("post count must be positive")]
    NoPosts,
    #[error("{name} must lie in [0, 1], got {value}")]
    FractionOutOfRange { name: &'static str, value: f64 },
    #[error("lexicon has no {0} to build offensive posts from")]
    EmptyPool(&'static str),
    #[error("lexicon leaves no plain benign words")]
    NoBenignWords,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PostKind {
    Benign,
    BlockedLink,
    DemandTerm,
    SlangDense,
    Evasive,
}

impl PostKind {
    pub fn is_offensive(self) -> bool {
        self != PostKind::Benign
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPost {
    pub kind: PostKind,
    pub parts: Vec<Part>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config: SimulationConfig,
    pub benign: usize,
    pub offensive: usize,
    pub evasive: usize,
    pub detected: usize,
    /// Detected offensive posts over offensive posts; absent when no post is offensive.
    pub detection_rate: Option<f64>,
    pub benign_rejected: usize,
    pub benign_held: usize,
    pub totals: DecisionCounts,
}

impl SimulationReport {
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let c = &self.config;
        let _ = writeln!(
            out,
            "posts {}  offensive fraction {}  evasive fraction {}  seed {}",
            c.posts, c.offensive_fraction, c.evasive_fraction, c.seed
        );
        let _ = writeln!(out, "benign            {}", self.benign);
        let _ = writeln!(out, "offensive         {}", self.offensive);
        let _ = writeln!(out, "  evasive         {}", self.evasive);
        let _ = writeln!(out, "  detected        {}", self.detected);
        match self.detection_rate {
            Some(rate) => {
                let _ = writeln!(out, "detection rate    {rate:.4}");
            }
            None => {
                let _ = writeln!(out, "detection rate    n/a");
            }
        }
        let _ = writeln!(out, "benign rejected   {}", self.benign_rejected);
        let _ = writeln!(out, "benign held       {}", self.benign_held);
        for d in Decision::ALL {
            let _ = writeln!(out, "{:<17} {}", d.as_str(), self.totals.get(d));
        }
        out
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<(), SimulateError> {
        if self.posts == 0 {
            return Err(SimulateError::NoPosts);
        }
        for (name, value) in [
            ("offensive fraction", self.offensive_fraction),
            ("evasive fraction", self.evasive_fraction),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(SimulateError::FractionOutOfRange { name, value });
            }
        }
        Ok(())
    }

    pub fn offensive_count(&self) -> usize {
        (self.posts as f64 * self.offensive_fraction).round() as usize
    }

    pub fn evasive_count(&self) -> usize {
        (self.offensive_count() as f64 * self.evasive_fraction).round() as usize
    }
}

/// The bundled lexicon extended with the simulation's demand terms.
pub fn simulation_lexicon(base: &LexiconSnapshot) -> LexiconSnapshot {
    SIMULATION_DEMAND.iter().fold(base.clone(), |lex, word| {
        let term = Term::new(word).expect("valid demand term");
        lex.with_demand_added(&term).unwrap_or(lex)
    })
}

struct Pools {
    benign: Vec<String>,
    stop: Vec<String>,
    slang: Vec<String>,
    demand: Vec<String>,
    blocked: Vec<String>,
}

impl Pools {
    fn new(lexicon: &LexiconSnapshot) -> Result<Self, SimulateError> {
        let benign: Vec<String> = BENIGN_WORDS
            .iter()
            .filter(|w| lexicon.classify(&Term::new(w).expect("valid word")) == TokenClass::Plain)
            .map(|w| w.to_string())
            .collect();
        if benign.is_empty() {
            return Err(SimulateError::NoBenignWords);
        }
        let pools = Pools {
            benign,
            stop: lexicon.stop_words().map(|s| s.term.as_str().to_string()).collect(),
            slang: lexicon.slang().iter().map(|t| t.as_str().to_string()).collect(),
            demand: lexicon.demand().iter().map(|t| t.as_str().to_string()).collect(),
            blocked: lexicon
                .blocked_links()
                .iter()
                .map(|p| match &p.path_prefix {
                    Some(path) => format!("https://{}{}/item", p.host, path),
                    None => format!("https://www.{}/page", p.host),
                })
                .collect(),
        };
        for (name, pool) in [
            ("slang terms", &pools.slang),
            ("demand terms", &pools.demand),
            ("restricted links", &pools.blocked),
        ] {
            if pool.is_empty() {
                return Err(SimulateError::EmptyPool(name));
            }
        }
        Ok(pools)
    }

    fn pick<'a, R: Rng>(pool: &'a [String], rng: &mut R) -> &'a str {
        pool.choose(rng).expect("non-empty pool")
    }

    /// Builds a text with `examined` non-stop words, `slang` of which are slang,
    /// plus some stop words, the given extra words, and the given links.
    fn text<R: Rng>(&self, rng: &mut R, examined: usize, slang: usize, extra: &[&str], links: &[&str]) -> String {
        let mut words: Vec<&str> = Vec::with_capacity(examined * 2);
        for _ in 0..slang {
            words.push(Self::pick(&self.slang, rng));
        }
        for _ in slang + extra.len()..examined {
            words.push(Self::pick(&self.benign, rng));
        }
        words.extend_from_slice(extra);
        if !self.stop.is_empty() {
            for _ in 0..rng.random_range(examined / 3..=examined) {
                words.push(Self::pick(&self.stop, rng));
            }
        }
        words.shuffle(rng);
        for link in links {
            let at = rng.random_range(0..=words.len());
            words.insert(at, link);
        }
        words.join(" ")
    }

    fn title<R: Rng>(&self, rng: &mut R) -> String {
        let n = rng.random_range(3..=6);
        self.text(rng, n, 0, &[], &[])
    }

    fn post<R: Rng>(&self, kind: PostKind, pending_from: f64, rng: &mut R) -> SyntheticPost {
        let examined = rng.random_range(20..=80usize);
        let unlisted = *UNLISTED_LINKS.choose(rng).expect("non-empty");
        let body = match kind {
            PostKind::Benign => {
                let links: &[&str] = if rng.random_bool(0.3) { &[unlisted] } else { &[] };
                self.text(rng, examined, 0, &[], links)
            }
            PostKind::BlockedLink => {
                let link = Self::pick(&self.blocked, rng);
                self.text(rng, examined, 0, &[], &[link])
            }
            PostKind::DemandTerm => {
                let term = Self::pick(&self.demand, rng);
                self.text(rng, examined, 0, &[term], &[])
            }
            PostKind::SlangDense => {
                let min = (examined as f64 * pending_from / 100.0).ceil() as usize;
                let slang = rng.random_range(min.max(1)..=examined / 2);
                self.text(rng, examined, slang, &[], &[])
            }
            PostKind::Evasive => {
                // Largest slang count whose density stays under the pending threshold.
                let cap = ((examined as f64 * pending_from / 100.0).ceil() as usize).saturating_sub(1);
                let slang = rng.random_range(cap.min(1)..=cap);
                self.text(rng, examined, slang, &[], &[unlisted])
            }
        };
        SyntheticPost {
            kind,
            parts: vec![Part::title(self.title(rng)), Part::body(body)],
        }
    }
}

/// Generates the synthetic corpus for a configuration. Deterministic in the seed.
pub fn generate(
    config: &SimulationConfig,
    lexicon: &LexiconSnapshot,
    thresholds: &Thresholds,
) -> Result<Vec<SyntheticPost>, SimulateError> {
    config.validate()?;
    let pools = Pools::new(lexicon)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let offensive = config.offensive_count();
    let evasive = config.evasive_count();
    let plain_kinds = [PostKind::BlockedLink, PostKind::DemandTerm, PostKind::SlangDense];
    let mut kinds: Vec<PostKind> = (0..config.posts)
        .map(|i| match i {
            i if i < evasive => PostKind::Evasive,
            i if i < offensive => plain_kinds[i % plain_kinds.len()],
            _ => PostKind::Benign,
        })
        .collect();
    kinds.shuffle(&mut rng);
    let pending_from = thresholds.pending_from();
    Ok(kinds
        .into_iter()
        .map(|kind| pools.post(kind, pending_from, &mut rng))
        .collect())
}

pub fn simulate(
    config: &SimulationConfig,
    lexicon: &LexiconSnapshot,
    thresholds: &Thresholds,
) -> Result<SimulationReport, SimulateError> {
    let posts = generate(config, lexicon, thresholds)?;
    let mut report = SimulationReport {
        config: *config,
        benign: 0,
        offensive: 0,
        evasive: 0,
        detected: 0,
        detection_rate: None,
        benign_rejected: 0,
        benign_held: 0,
        totals: DecisionCounts::default(),
    };
    for post in &posts {
        let verdict = evaluate_post(&post.parts, lexicon, thresholds).expect("generated posts are non-empty");
        let held = matches!(verdict.decision, Decision::Pending | Decision::Reject);
        report.totals.add(verdict.decision);
        if post.kind.is_offensive() {
            report.offensive += 1;
            report.evasive += usize::from(post.kind == PostKind::Evasive);
            report.detected += usize::from(held);
        } else {
            report.benign += 1;
            report.benign_rejected += usize::from(verdict.decision == Decision::Reject);
            report.benign_held += usize::from(verdict.decision == Decision::Pending);
        }
    }
    if report.offensive > 0 {
        report.detection_rate = Some(report.detected as f64 / report.offensive as f64);
    }
    Ok(report)
}
