//! A deliberately naive evaluator: whitespace splitting, linear scans over
//! plain string lists, and a brute-force link matcher. Instances are
//! generated so that this simple reading of the rules is unambiguous.

use blogsv_core::{Decision, LexiconSnapshot, ListSource, Reason, Thresholds};
use rand::seq::IndexedRandom;
use rand::Rng;

const VOCABULARY: &[&str] = &[
    "apple", "brick", "cloud", "delta", "ember", "fable", "grove", "haven", "ivory", "jolly", "kayak", "lemon",
    "maple", "noble", "ocean", "pearl", "quilt", "raven", "stone", "tiger", "umber", "vivid", "wheat", "xenon",
    "yodel", "zebra", "amber", "birch", "cedar", "dune",
];

const HOSTS: &[&str] = &["alpha.example", "beta.example", "gamma.example.org", "delta.test"];
const PATHS: &[&str] = &["", "/p", "/p/q", "/pq", "/q/p"];
const SUBDOMAINS: &[&str] = &["", "www.", "m.", "a.b."];

#[derive(Debug, Clone)]
pub struct Instance {
    pub slang: Vec<String>,
    pub demand: Vec<String>,
    pub stop: Vec<String>,
    /// (host, optional path prefix)
    pub links: Vec<(String, Option<String>)>,
    pub text: String,
    pub thresholds: Thresholds,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expected {
    pub decision: Decision,
    pub reason: Reason,
    pub total: usize,
    pub omitted: usize,
    pub examined: usize,
    pub slang: usize,
    pub level: f64,
}

/// A random instance with at most 20 terms and at most 50 tokens.
pub fn instance<R: Rng>(rng: &mut R) -> Instance {
    let mut words: Vec<&str> = VOCABULARY.to_vec();
    let mut take = |n: usize, rng: &mut R| -> Vec<String> {
        (0..n)
            .map(|_| words.swap_remove(rng.random_range(0..words.len())).to_string())
            .collect()
    };
    let n_slang = rng.random_range(0..=8);
    let n_demand = rng.random_range(0..=3);
    let n_stop = rng.random_range(0..=(20 - n_slang - n_demand).min(9));
    let slang = take(n_slang, rng);
    let demand = take(n_demand, rng);
    let stop = take(n_stop, rng);
    let links = (0..rng.random_range(0..=3))
        .map(|_| {
            let host = HOSTS.choose(rng).unwrap().to_string();
            let path = rng
                .random_bool(0.4)
                .then(|| ["/p", "/p/q", "/q"].choose(rng).unwrap().to_string());
            (host, path)
        })
        .collect();

    let mut tokens = Vec::new();
    for _ in 0..rng.random_range(0..=50) {
        if rng.random_bool(0.05) {
            tokens.push(format!(
                "https://{}{}{}",
                SUBDOMAINS.choose(rng).unwrap(),
                HOSTS.choose(rng).unwrap(),
                PATHS.choose(rng).unwrap()
            ));
            continue;
        }
        let mut word = VOCABULARY.choose(rng).unwrap().to_string();
        if rng.random_bool(0.2) {
            word = word.to_uppercase();
        }
        if rng.random_bool(0.1) {
            word.push(*[',', '.', '!'].choose(rng).unwrap());
        }
        tokens.push(word);
    }

    let thresholds = if rng.random_bool(0.5) {
        Thresholds::default()
    } else {
        let notify = rng.random_range(0..5) as f64;
        let pending = rng.random_range(notify as u32 + 1..30) as f64;
        let reject = rng.random_range(pending as u32..=100) as f64;
        Thresholds::new(reject, pending, notify).unwrap()
    };
    Instance {
        slang,
        demand,
        stop,
        links,
        text: tokens.join(" "),
        thresholds,
    }
}

impl Instance {
    pub fn lexicon(&self) -> LexiconSnapshot {
        let slang = self.slang.join("\n");
        let demand = self.demand.join("\n");
        let stop = self.stop.join("\n");
        let links: Vec<String> = self
            .links
            .iter()
            .map(|(h, p)| format!("{h}{}", p.as_deref().unwrap_or("")))
            .collect();
        LexiconSnapshot::parse(
            ListSource::new("slang", &slang),
            ListSource::new("demand", &demand),
            ListSource::new("stop", &stop),
            ListSource::new("links", &links.join("\n")),
        )
        .expect("generated lexicon is valid")
    }
}

fn list_contains(list: &[String], word: &str) -> bool {
    for entry in list {
        if entry == word {
            return true;
        }
    }
    false
}

fn link_blocked(url: &str, patterns: &[(String, Option<String>)]) -> bool {
    let rest = url.split_once("://").map_or(url, |(_, r)| r);
    let (host, path) = match rest.find('/') {
        Some(i) => (&rest[..i], &rest[i..]),
        None => (rest, ""),
    };
    let path_segments: Vec<&str> = path.split('/').filter(|s| !s.is_empty()).collect();
    for (pattern_host, prefix) in patterns {
        let host_ok = host == pattern_host || host.ends_with(&format!(".{pattern_host}"));
        if !host_ok {
            continue;
        }
        let Some(prefix) = prefix else { return true };
        let prefix_segments: Vec<&str> = prefix.split('/').filter(|s| !s.is_empty()).collect();
        if prefix_segments.len() <= path_segments.len()
            && prefix_segments.iter().zip(&path_segments).all(|(a, b)| a == b)
        {
            return true;
        }
    }
    false
}

/// The reference outcome for the instance's text.
pub fn expected(inst: &Instance) -> Expected {
    let mut blocked = false;
    let mut demand = false;
    let (mut total, mut omitted, mut slang) = (0, 0, 0);
    for raw in inst.text.split_whitespace() {
        if raw.starts_with("https://") {
            blocked |= link_blocked(raw, &inst.links);
            continue;
        }
        let word = raw.trim_end_matches([',', '.', '!']).to_lowercase();
        total += 1;
        if list_contains(&inst.demand, &word) {
            demand = true;
        } else if list_contains(&inst.stop, &word) {
            omitted += 1;
        } else if list_contains(&inst.slang, &word) {
            slang += 1;
        }
    }
    let examined = total - omitted;
    let level = if examined == 0 {
        0.0
    } else {
        100.0 * slang as f64 / examined as f64
    };
    let t = &inst.thresholds;
    let (decision, reason) = if blocked {
        (Decision::Reject, Reason::BlockedLink)
    } else if demand {
        (Decision::Pending, Reason::DemandTerm)
    } else if level > t.reject_above() {
        (Decision::Reject, Reason::Frequency)
    } else if level >= t.pending_from() {
        (Decision::Pending, Reason::Frequency)
    } else if level > t.notify_above() {
        (Decision::PublishNotify, Reason::Frequency)
    } else {
        (Decision::Publish, Reason::Frequency)
    };
    Expected {
        decision,
        reason,
        total,
        omitted,
        examined,
        slang,
        level,
    }
}

/// Compares the engine's part verdict with the oracle; `Err` describes the first difference.
pub fn compare(inst: &Instance) -> Result<(), String> {
    let lexicon = inst.lexicon();
    let part = blogsv_core::Part::body(inst.text.clone());
    let got = blogsv_core::evaluate_part(&part, &lexicon, &inst.thresholds);
    let want = expected(inst);
    let s = &got.stats;
    let rounded_ok = (s.frequency_level - want.level).abs() <= 0.005 + 1e-9
        && ((s.frequency_level * 100.0).round() - s.frequency_level * 100.0).abs() < 1e-6;
    let same = got.decision == want.decision
        && got.reason == want.reason
        && s.total_tokens == want.total
        && s.omitted == want.omitted
        && s.examined == want.examined
        && s.slang_count == want.slang
        && (s.exact_level() - want.level).abs() < 1e-9
        && rounded_ok;
    if same {
        Ok(())
    } else {
        Err(format!(
            "text {:?}\n  engine {:?} {:?} {:?}\n  oracle {:?}",
            inst.text, got.decision, got.reason, s, want
        ))
    }
}
