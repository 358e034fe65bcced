use std::collections::BTreeSet;

use blogsv_core::{
    compute_frequency, decide, evaluate_part, extract_links, normalize, normalize_url, tokenize, Decision,
    LexiconSnapshot, LinkPattern, ListSource, Part, Reason, Term, Thresholds,
};
use proptest::prelude::*;
use unicode_normalization::char::is_combining_mark;

/// Word splitting by character classes, written independently of the
/// tokenizer's state machine: mark joiners that sit between two
/// alphanumerics, then split on everything else.
fn char_class_words(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut keep = vec![false; chars.len()];
    for (i, c) in chars.iter().enumerate() {
        // combining marks stay attached to the word they follow
        keep[i] = c.is_alphanumeric() || (i > 0 && keep[i - 1] && is_combining_mark(*c));
    }
    for i in 1..chars.len().saturating_sub(1) {
        let joiner = matches!(chars[i], '\'' | '-' | '\u{2019}' | '\u{2010}');
        if joiner && keep[i - 1] && chars[i + 1].is_alphanumeric() {
            keep[i] = true;
        }
    }
    let mut words = Vec::new();
    let mut cur = String::new();
    for (c, k) in chars.iter().zip(keep) {
        if k {
            cur.push(*c);
        } else if !cur.is_empty() {
            words.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        words.push(cur);
    }
    words
}

fn brute_force_link(patterns: &[LinkPattern], host: &str, path: &str) -> Option<LinkPattern> {
    patterns
        .iter()
        .filter(|p| {
            let host_ok = host == p.host || host.ends_with(&format!(".{}", p.host));
            let path_ok = match &p.path_prefix {
                None => true,
                Some(pre) => path == pre || path.starts_with(&format!("{pre}/")),
            };
            host_ok && path_ok
        })
        .max_by(|a, b| {
            a.host
                .len()
                .cmp(&b.host.len())
                .then(
                    a.path_prefix
                        .as_ref()
                        .map_or(0, |s| s.len())
                        .cmp(&b.path_prefix.as_ref().map_or(0, |s| s.len())),
                )
                .then(b.cmp(a))
        })
        .cloned()
}

fn plain_text() -> impl Strategy<Value = String> {
    proptest::collection::vec(
        prop_oneof![
            Just('a'),
            Just('B'),
            Just('z'),
            Just('7'),
            Just('é'),
            Just('ß'),
            Just('ন'),
            Just('\u{09BF}'),
            Just('\u{09CD}'),
            Just('\u{0301}'),
            Just(' '),
            Just(','),
            Just('\''),
            Just('-'),
            Just('\u{2019}'),
            Just('.'),
            Just('!'),
            Just('\n'),
        ],
        0..60,
    )
    .prop_map(|v| v.into_iter().collect())
}

fn mixed_text() -> impl Strategy<Value = String> {
    proptest::collection::vec(
        prop_oneof![
            4 => "[a-zA-Z]{1,6}",
            1 => "(http://|https://|www\\.)[a-z]{1,4}(\\.[a-z]{1,3}){0,2}(/[a-zA-Z]{0,3}){0,2}[.,!]?",
            1 => "[ ,.;!?'-]{1,3}",
            1 => "\\PC{1,4}",
        ],
        0..20,
    )
    .prop_map(|v| v.join(" "))
}

proptest! {
    #[test]
    fn normalize_is_idempotent(s in "\\PC{0,24}") {
        let once = normalize(&s);
        prop_assert_eq!(normalize(&once), once);
    }

    #[test]
    fn tokenizer_matches_char_class_oracle(text in plain_text()) {
        // plain_text never forms a link prefix
        let got: Vec<String> = tokenize(&text).iter().map(|t| t.surface.to_string()).collect();
        prop_assert_eq!(got, char_class_words(&text));
    }

    #[test]
    fn token_invariants(text in mixed_text()) {
        let tokens = tokenize(&text);
        let links = extract_links(&text);
        for w in tokens.windows(2) {
            prop_assert!(w[0].span.end <= w[1].span.start);
        }
        for w in links.windows(2) {
            prop_assert!(w[0].span.end <= w[1].span.start);
        }
        for t in &tokens {
            prop_assert_eq!(&text[t.span.start..t.span.end], t.surface);
            prop_assert_eq!(t.normalized.as_str(), normalize(t.surface));
            prop_assert!(!t.span.is_empty());
            for l in &links {
                prop_assert!(!t.span.intersects(&l.span));
            }
        }
        // determinism
        prop_assert_eq!(tokenize(&text), tokens);
    }

    #[test]
    fn token_count_is_additive(a in mixed_text(), b in mixed_text()) {
        let joined = format!("{a} {b}");
        prop_assert_eq!(tokenize(&joined).len(), tokenize(&a).len() + tokenize(&b).len());
    }

    #[test]
    fn arbitrary_unicode_never_panics(text in "\\PC{0,80}") {
        let tokens = tokenize(&text);
        for t in &tokens {
            prop_assert!(text.is_char_boundary(t.span.start) && text.is_char_boundary(t.span.end));
        }
    }

    #[test]
    fn match_link_agrees_with_brute_force(
        patterns in proptest::collection::vec(
            ("(a|b|c)(\\.(a|b|c)){0,2}", proptest::option::of("(/(x|y)){1,2}")),
            0..12,
        ),
        host in "(a|b|c)(\\.(a|b|c)){0,3}",
        path in "(/(x|y|z)){0,3}",
    ) {
        let lines: Vec<String> = patterns
            .iter()
            .map(|(h, p)| format!("{h}{}", p.clone().unwrap_or_default()))
            .collect();
        let lines = lines.join("\n");
        let snap = LexiconSnapshot::parse(
            ListSource::new("s", ""),
            ListSource::new("d", ""),
            ListSource::new("t", ""),
            ListSource::new("l", &lines),
        ).unwrap();
        let url = normalize_url(&format!("http://{host}{path}")).unwrap();
        let all: Vec<LinkPattern> = snap.blocked_links().iter().cloned().collect();
        let expected = brute_force_link(&all, &url.host, &url.path);
        let got = snap.match_link(&url).cloned();
        // ties between equally long patterns cannot occur: equal host and path
        // means equal pattern
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn band_partition(level in 0.0f64..=100.0) {
        let th = Thresholds::default();
        let fired: Vec<Decision> = [
            level > 40.0,
            (6.0..=40.0).contains(&level),
            level > 0.0 && level < 6.0,
            level == 0.0,
        ]
        .iter()
        .zip([Decision::Reject, Decision::Pending, Decision::PublishNotify, Decision::Publish])
        .filter(|(b, _)| **b)
        .map(|(_, d)| d)
        .collect();
        prop_assert_eq!(fired.len(), 1);
        prop_assert_eq!(decide(level, &th), fired[0]);
    }

    #[test]
    fn stats_scale_check(total in 0usize..400, omit_frac in 0.0f64..1.0, slang_frac in 0.0f64..1.0) {
        let omitted = (total as f64 * omit_frac) as usize;
        let slang = ((total - omitted) as f64 * slang_frac) as usize;
        let s = blogsv_core::FrequencyStats::new(total, omitted, slang);
        prop_assert_eq!(s.examined, total - omitted);
        prop_assert!(s.frequency_level >= 0.0 && s.frequency_level <= 100.0);
        let recomputed = if s.examined == 0 { 0.0 } else { 100.0 * s.slang_count as f64 / s.examined as f64 };
        prop_assert!((recomputed - s.frequency_level).abs() <= 0.005 + 1e-9);
    }

    #[test]
    fn slang_monotonicity(words in proptest::collection::vec("(crud|the|is|walk|park|fire)", 0..30), at in 0usize..30) {
        let lex = LexiconSnapshot::parse(
            ListSource::new("s", "crud\n"),
            ListSource::new("d", ""),
            ListSource::new("t", "the\nis\n"),
            ListSource::new("l", ""),
        ).unwrap();
        let th = Thresholds::default();
        let before = evaluate_part(&Part::body(words.join(" ")), &lex, &th);
        let mut more = words.clone();
        more.insert(at.min(words.len()), "crud".into());
        let after = evaluate_part(&Part::body(more.join(" ")), &lex, &th);
        prop_assert!(after.decision >= before.decision);

        let mut stopped = words.clone();
        stopped.insert(at.min(words.len()), "the".into());
        let with_stop = compute_frequency(&tokenize(&stopped.join(" ")), &lex);
        prop_assert_eq!(with_stop.slang_count, before.stats.slang_count);
    }

    #[test]
    fn precedence(words in proptest::collection::vec("(crud|walk|park)", 0..30), at in 0usize..30) {
        let lex = LexiconSnapshot::parse(
            ListSource::new("s", "crud\n"),
            ListSource::new("d", "flood\n"),
            ListSource::new("t", ""),
            ListSource::new("l", "badsite.example\n"),
        ).unwrap();
        let th = Thresholds::default();
        let mut linked = words.clone();
        linked.insert(at.min(words.len()), "https://m.badsite.example/p".into());
        let v = evaluate_part(&Part::body(linked.join(" ")), &lex, &th);
        prop_assert_eq!((v.decision, v.reason), (Decision::Reject, Reason::BlockedLink));

        let mut demand = words.clone();
        demand.insert(at.min(words.len()), "Flood".into());
        let v = evaluate_part(&Part::body(demand.join(" ")), &lex, &th);
        prop_assert_eq!((v.decision, v.reason), (Decision::Pending, Reason::DemandTerm));
    }

    #[test]
    fn snapshots_are_immutable(ops in proptest::collection::vec((any::<bool>(), "(a|b|c|d)"), 0..20)) {
        let mut current = LexiconSnapshot::default();
        let mut history = vec![(current.clone(), current.clone())];
        let mut mirror: BTreeSet<String> = BTreeSet::new();
        for (add, word) in ops {
            let term = Term::new(&word).unwrap();
            let next = if add { current.with_demand_added(&term) } else { current.with_demand_removed(&term) };
            let effective = if add { mirror.insert(word.clone()) } else { mirror.remove(&word) };
            prop_assert_eq!(next.is_some(), effective);
            if let Some(next) = next {
                prop_assert_eq!(next.version(), current.version() + 1);
                current = next;
                history.push((current.clone(), current.clone()));
            }
            let names: BTreeSet<String> = current.demand().iter().map(|t| t.to_string()).collect();
            prop_assert_eq!(&names, &mirror);
        }
        for (kept, copy) in &history {
            prop_assert_eq!(kept, copy);
        }
    }
}

#[test]
fn subdomain_rule_matches_hand_enumerated_suffixes() {
    // suffixes of cdn.badsite.example: cdn.badsite.example, badsite.example, example
    let snap = LexiconSnapshot::parse(
        ListSource::new("s", ""),
        ListSource::new("d", ""),
        ListSource::new("t", ""),
        ListSource::new("l", "badsite.example\n"),
    )
    .unwrap();
    let cases = [
        ("https://cdn.badsite.example/x", true),
        ("http://badsite.example/page", true),
        ("http://a.b.badsite.example", true),
        ("http://xbadsite.example", false),
        ("http://badsite.example.org", false),
        ("http://example", false),
    ];
    for (raw, expected) in cases {
        let url = normalize_url(raw).unwrap();
        assert_eq!(snap.match_link(&url).is_some(), expected, "{raw}");
    }
}

#[test]
fn port_does_not_change_link_identity() {
    let snap = LexiconSnapshot::parse(
        ListSource::new("s", ""),
        ListSource::new("d", ""),
        ListSource::new("t", ""),
        ListSource::new("l", "site.example/x\n"),
    )
    .unwrap();
    let with_port = normalize_url("http://site.example:8080/x").unwrap();
    let without = normalize_url("http://site.example/x").unwrap();
    assert_eq!(with_port, without);
    assert_eq!(snap.match_link(&with_port), snap.match_link(&without));
    assert!(snap.match_link(&with_port).is_some());
}

#[test]
fn excised_link_tokens_match_hand_enumeration() {
    let text = "Don't re-enter http://a.example/x now";
    let got: Vec<String> = tokenize(text).iter().map(|t| t.normalized.to_string()).collect();
    assert_eq!(got, ["don't", "re-enter", "now"]);
    // the char-class oracle on the text with the link removed agrees
    let without_link = text.replace("http://a.example/x", " ");
    let oracle: Vec<String> = char_class_words(&without_link).iter().map(|w| normalize(w)).collect();
    assert_eq!(got, oracle);
}
