#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use discourse_probe::backend::reference::ScriptFixture;
use discourse_probe::backend::WireToken;
use discourse_probe::{parse_suite, AlignedCondition, Condition, TestSuite, TokenScore};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_discourse-probe")
}

/// A random suite plus the scripted responses that score it.
pub struct Synthetic {
    pub suite: TestSuite,
    pub suite_json: String,
    pub fixture: ScriptFixture,
    /// (item, condition) -> region -> token surprisals
    pub bits: BTreeMap<(u32, String), BTreeMap<u32, Vec<f64>>>,
    pub formulas: Vec<String>,
    pub tags: BTreeMap<u32, BTreeMap<String, String>>,
}

const CONDITIONS: [&str; 3] = ["a", "b", "c"];

fn random_aggregate(rng: &mut ChaCha8Rng, conds: &[&str], regions: u32) -> String {
    let func = if rng.gen_bool(0.7) { "mean" } else { "sum" };
    let cond = conds.choose(rng).unwrap();
    let set = if rng.gen_bool(0.3) {
        "*".to_string()
    } else {
        let mut picked: Vec<u32> = (1..=regions).filter(|_| rng.gen_bool(0.5)).collect();
        if picked.is_empty() {
            picked.push(rng.gen_range(1..=regions));
        }
        picked.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
    };
    format!("{func}({set};{cond})")
}

fn random_compare(rng: &mut ChaCha8Rng, conds: &[&str], regions: u32) -> String {
    let op = if rng.gen_bool(0.5) { ">" } else { "<" };
    format!(
        "{} {op} {}",
        random_aggregate(rng, conds, regions),
        random_aggregate(rng, conds, regions)
    )
}

/// Flat formula: 1-3 disjuncts of 1-3 conjoined comparisons.
fn random_formula(rng: &mut ChaCha8Rng, conds: &[&str], regions: u32) -> String {
    let disjuncts = if rng.gen_bool(0.5) { 1 } else { rng.gen_range(1..=3) };
    (0..disjuncts)
        .map(|_| {
            let n = if rng.gen_bool(0.5) { 1 } else { rng.gen_range(1..=3) };
            (0..n)
                .map(|_| random_compare(rng, conds, regions))
                .collect::<Vec<_>>()
                .join(" & ")
        })
        .collect::<Vec<_>>()
        .join(" | ")
}

/// Builds a random suite. Surprisals are multiples of 0.5 so every sum is
/// exact regardless of summation order, and ties really happen.
pub fn synthetic_suite(seed: u64, max_items: u32) -> Synthetic {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_items = rng.gen_range(3..=max_items);
    let n_conds = rng.gen_range(2..=3);
    let conds = &CONDITIONS[..n_conds];
    let regions: u32 = rng.gen_range(1..=4);
    let mut items = Vec::new();
    let mut responses = BTreeMap::new();
    let mut bits = BTreeMap::new();
    let mut tags_by_item = BTreeMap::new();
    for item in 1..=n_items {
        let mut tags = BTreeMap::new();
        if rng.gen_bool(0.8) {
            tags.insert("group".to_string(), ["g1", "g2", "g3"].choose(&mut rng).unwrap().to_string());
        }
        if rng.gen_bool(0.5) {
            tags.insert("kind".to_string(), ["k1", "k2"].choose(&mut rng).unwrap().to_string());
        }
        let mut conditions = Vec::new();
        for cond in conds {
            let mut region_values = Vec::new();
            let mut region_bits = BTreeMap::new();
            let mut text = String::new();
            let mut tokens = Vec::new();
            for r in 1..=regions {
                let words = if r == 1 { rng.gen_range(1..=3) } else { rng.gen_range(0..=3) };
                let mut content = Vec::new();
                let mut these = Vec::new();
                for w in 0..words {
                    let word = format!("i{item}{cond}r{r}w{w}");
                    let b = rng.gen_range(0..8) as f64 * 0.5;
                    if !text.is_empty() {
                        text.push(' ');
                    }
                    let start = text.len();
                    text.push_str(&word);
                    tokens.push(WireToken::with_offsets(&word, start, text.len(), b));
                    these.push(b);
                    content.push(word);
                }
                region_values.push(json!({"region_number": r, "content": content.join(" ")}));
                region_bits.insert(r, these);
            }
            responses.insert(text, tokens);
            bits.insert((item, cond.to_string()), region_bits);
            conditions.push(json!({"condition_name": cond, "regions": region_values}));
        }
        tags_by_item.insert(item, tags.clone());
        items.push(json!({"item_number": item, "tags": tags, "conditions": conditions}));
    }
    let n_preds = rng.gen_range(1..=2);
    let formulas: Vec<String> = (0..n_preds).map(|_| random_formula(&mut rng, conds, regions)).collect();
    let region_meta: BTreeMap<String, String> =
        (1..=regions).map(|r| (r.to_string(), format!("region {r}"))).collect();
    let suite_value: Value = json!({
        "name": format!("synthetic_{seed}"),
        "phenomenon": "custom",
        "region_meta": region_meta,
        "predictions": formulas,
        "items": items,
    });
    let suite_json = serde_json::to_string_pretty(&suite_value).unwrap();
    let suite = parse_suite(&suite_json).expect("synthetic suite is valid");
    Synthetic {
        suite,
        suite_json,
        fixture: ScriptFixture {
            backend_name: "scripted".into(),
            supports_separator: false,
            separator_literal: None,
            token_marker: None,
            responses,
        },
        bits,
        formulas,
        tags: tags_by_item,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleVerdict {
    Met,
    NotMet,
    Tie,
    Undefined,
}

/// `(func, regions or None for *, condition)` from `mean(1,2;a)`.
fn parse_aggregate(s: &str) -> (String, Option<Vec<u32>>, String) {
    let s = s.trim();
    let open = s.find('(').unwrap();
    let semi = s.find(';').unwrap();
    let func = s[..open].trim().to_string();
    let set = s[open + 1..semi].trim();
    let cond = s[semi + 1..s.len() - 1].trim().to_string();
    let regions = if set == "*" {
        None
    } else {
        Some(set.split(',').map(|r| r.trim().parse().unwrap()).collect())
    };
    (func, regions, cond)
}

fn oracle_value(regions_bits: &BTreeMap<u32, Vec<f64>>, agg: &str) -> Option<f64> {
    let (func, set, _) = parse_aggregate(agg);
    let mut all = Vec::new();
    for (r, b) in regions_bits {
        if set.as_ref().is_none_or(|s| s.contains(r)) {
            all.extend(b.iter().copied());
        }
    }
    if all.is_empty() {
        return None;
    }
    let sum: f64 = all.iter().sum();
    Some(if func == "sum" { sum } else { sum / all.len() as f64 })
}

/// Direct evaluation of a flat formula string: split on `|`, then `&`,
/// then on the comparison sign.
pub fn oracle_verdict(formula: &str, lookup: impl Fn(&str) -> Option<f64>) -> OracleVerdict {
    let disjuncts: Vec<Vec<(f64, char, f64)>> = {
        let mut out = Vec::new();
        for d in formula.split('|') {
            let mut conj = Vec::new();
            for c in d.split('&') {
                let (pos, op) = c
                    .char_indices()
                    .find(|(_, ch)| *ch == '>' || *ch == '<')
                    .unwrap();
                let (Some(l), Some(r)) = (lookup(&c[..pos]), lookup(&c[pos + 1..])) else {
                    return OracleVerdict::Undefined;
                };
                conj.push((l, op, r));
            }
            out.push(conj);
        }
        out
    };
    if disjuncts.len() == 1 && disjuncts[0].len() == 1 {
        let (l, op, r) = disjuncts[0][0];
        return if l == r {
            OracleVerdict::Tie
        } else if (op == '>') == (l > r) {
            OracleVerdict::Met
        } else {
            OracleVerdict::NotMet
        };
    }
    let holds = disjuncts.iter().any(|conj| {
        conj.iter()
            .all(|&(l, op, r)| if op == '>' { l > r } else { l < r })
    });
    if holds {
        OracleVerdict::Met
    } else {
        OracleVerdict::NotMet
    }
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct OracleTally {
    pub met: usize,
    pub not_met: usize,
    pub tie: usize,
    pub undefined: usize,
}

impl OracleTally {
    pub fn add(&mut self, v: OracleVerdict) {
        match v {
            OracleVerdict::Met => self.met += 1,
            OracleVerdict::NotMet => self.not_met += 1,
            OracleVerdict::Tie => self.tie += 1,
            OracleVerdict::Undefined => self.undefined += 1,
        }
    }

    pub fn accuracy(&self) -> Option<f64> {
        let d = self.met + self.not_met + self.tie;
        (d > 0).then(|| self.met as f64 / d as f64)
    }
}

/// Oracle verdicts for every (prediction, item) of a synthetic suite.
pub fn oracle_verdicts(s: &Synthetic) -> Vec<BTreeMap<u32, OracleVerdict>> {
    s.formulas
        .iter()
        .map(|f| {
            s.tags
                .keys()
                .map(|&item| {
                    let v = oracle_verdict(f, |agg| {
                        let (_, _, cond) = parse_aggregate(agg);
                        oracle_value(&s.bits[&(item, cond)], agg)
                    });
                    (item, v)
                })
                .collect()
        })
        .collect()
}

/// Overall and per-tag tallies for one prediction.
pub fn oracle_tallies(
    s: &Synthetic,
    verdicts: &BTreeMap<u32, OracleVerdict>,
) -> (OracleTally, BTreeMap<(String, String), OracleTally>) {
    let mut overall = OracleTally::default();
    let mut groups: BTreeMap<(String, String), OracleTally> = BTreeMap::new();
    let keys: std::collections::BTreeSet<&String> = s.tags.values().flat_map(|t| t.keys()).collect();
    for (item, v) in verdicts {
        overall.add(*v);
        for k in &keys {
            let value = s.tags[item].get(*k).cloned().unwrap_or_else(|| "(untagged)".into());
            groups.entry(((*k).clone(), value)).or_default().add(*v);
        }
    }
    (overall, groups)
}

pub const SENTENCES: [&str; 4] = [
    "My friends all love to go to the club to dance.",
    "The city councilmen refused the demonstrators a permit because they feared violence.",
    "And there's a ladder coming out of the tree and there's a man at the top of the ladder",
    "since the beginning of the year, i am a nurse.",
];

/// Splits `words` into regions at the given cut points; cuts may coincide,
/// which produces empty regions.
pub fn regions_from_cuts(words: &[&str], cuts: &[usize]) -> Condition {
    let mut bounds: Vec<usize> = cuts.iter().map(|c| c % (words.len() + 1)).collect();
    bounds.sort_unstable();
    let mut contents = Vec::new();
    let mut prev = 0;
    for b in bounds.into_iter().chain([words.len()]) {
        contents.push(words[prev..b].join(" "));
        prev = b;
    }
    Condition::from_contents("c", contents)
}

/// Word pieces with byte offsets; `splits` chops words into subwords and
/// `merge` occasionally joins a word with the next one across the space.
pub fn tokenize(text: &str, splits: &[usize], merge: &[bool], marker: &str) -> (Vec<TokenScore>, Vec<WireToken>) {
    let mut spans: Vec<(usize, usize)> = Vec::new();
    let mut offset = 0;
    for w in text.split(' ') {
        spans.push((offset, offset + w.len()));
        offset += w.len() + 1;
    }
    let mut merged: Vec<(usize, usize, bool)> = Vec::new();
    let mut i = 0;
    while i < spans.len() {
        let (s, mut e) = spans[i];
        let mut crosses = false;
        if merge.get(i).copied().unwrap_or(false) && i + 1 < spans.len() {
            e = spans[i + 1].1;
            crosses = true;
            i += 1;
        }
        merged.push((s, e, crosses));
        i += 1;
    }
    let mut offsets = Vec::new();
    let mut greedy = Vec::new();
    for (k, (s, e, crosses)) in merged.into_iter().enumerate() {
        let cut = splits.get(k).copied().unwrap_or(0);
        let mut pieces = vec![(s, e)];
        if !crosses && e - s > 1 && cut % 3 == 0 {
            let mut mid = s + 1 + cut % (e - s - 1);
            while !text.is_char_boundary(mid) {
                mid += 1;
            }
            if mid < e {
                pieces = vec![(s, mid), (mid, e)];
            }
        }
        for (j, (ps, pe)) in pieces.into_iter().enumerate() {
            let bits = ((ps * 7 + pe) % 11) as f64 * 0.25;
            offsets.push(TokenScore {
                text: text[ps..pe].to_string(),
                start: ps,
                end: pe,
                surprisal_bits: bits,
            });
            let shown = if j == 0 { format!("{marker}{}", &text[ps..pe]) } else { text[ps..pe].to_string() };
            greedy.push(WireToken::without_offsets(shown, bits));
        }
    }
    (offsets, greedy)
}

pub fn signature(a: &AlignedCondition) -> BTreeMap<u32, Vec<(usize, usize)>> {
    a.region_tokens
        .iter()
        .map(|(r, ts)| (*r, ts.iter().map(|t| (t.start, t.end)).collect()))
        .collect()
}

