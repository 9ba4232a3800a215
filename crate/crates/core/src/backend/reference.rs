//! Reference models for offline testing: a uniform model, a Laplace-smoothed
//! bigram model and a scripted model that replays fixed scores.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::protocol::{BackendInfo, WireToken};
use super::{whitespace_spans, BackendError, LanguageModel};

/// Assigns probability `1/vocab_size` to every whitespace token.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformModel {
    vocab_size: u64,
}

impl UniformModel {
    /// # Panics
    /// If `vocab_size` is zero.
    pub fn new(vocab_size: u64) -> Self {
        assert!(vocab_size > 0, "vocabulary must contain at least one type");
        Self { vocab_size }
    }

    pub fn surprisal(&self) -> f64 {
        (self.vocab_size as f64).log2()
    }
}

impl LanguageModel for UniformModel {
    fn info(&self) -> BackendInfo {
        BackendInfo::new("ref-uniform", false)
    }

    fn score_text(&self, text: &str) -> Result<Vec<WireToken>, String> {
        let bits = self.surprisal();
        Ok(whitespace_spans(text)
            .into_iter()
            .map(|(s, e)| WireToken::with_offsets(&text[s..e], s, e, bits))
            .collect())
    }
}

const BOS: u32 = u32::MAX;

/// Whitespace-tokenized bigram model with add-one smoothing.
///
/// `p(t | prev) = (c(prev, t) + 1) / (c(prev) + |V|)` where `c(prev)` counts
/// how often `prev` occurs as a context, and `V` is the training vocabulary
/// plus `<unk>`. Every line starts from a beginning-of-sequence context.
#[derive(Debug, Clone)]
pub struct BigramModel {
    vocab: HashMap<String, u32>,
    unk: u32,
    pair_counts: HashMap<(u32, u32), u64>,
    context_counts: HashMap<u32, u64>,
}

pub fn train_reference_bigram<S: AsRef<str>>(lines: &[S]) -> Result<BigramModel, BackendError> {
    let mut vocab: HashMap<String, u32> = HashMap::new();
    let mut sequences = Vec::new();
    for line in lines {
        let ids: Vec<u32> = line
            .as_ref()
            .split_whitespace()
            .map(|w| {
                let next = vocab.len() as u32;
                *vocab.entry(w.to_string()).or_insert(next)
            })
            .collect();
        if !ids.is_empty() {
            sequences.push(ids);
        }
    }
    if sequences.is_empty() {
        return Err(BackendError::EmptyCorpus);
    }
    let unk = vocab.len() as u32;
    let mut pair_counts = HashMap::new();
    let mut context_counts = HashMap::new();
    for ids in &sequences {
        let mut prev = BOS;
        for &id in ids {
            *pair_counts.entry((prev, id)).or_insert(0) += 1;
            *context_counts.entry(prev).or_insert(0) += 1;
            prev = id;
        }
    }
    Ok(BigramModel {
        vocab,
        unk,
        pair_counts,
        context_counts,
    })
}

impl BigramModel {
    /// `|V|`, including `<unk>`.
    pub fn vocab_size(&self) -> usize {
        self.vocab.len() + 1
    }

    fn id(&self, word: &str) -> u32 {
        self.vocab.get(word).copied().unwrap_or(self.unk)
    }

    /// Conditional probability of `word` after `prev` (`None` is the start
    /// of the sequence).
    pub fn probability(&self, prev: Option<&str>, word: &str) -> f64 {
        let ctx = prev.map_or(BOS, |p| self.id(p));
        self.probability_ids(ctx, self.id(word))
    }

    fn probability_ids(&self, ctx: u32, id: u32) -> f64 {
        let pair = self.pair_counts.get(&(ctx, id)).copied().unwrap_or(0);
        let total = self.context_counts.get(&ctx).copied().unwrap_or(0);
        (pair + 1) as f64 / (total + self.vocab_size() as u64) as f64
    }

    /// Training vocabulary in insertion order, without `<unk>`.
    pub fn words(&self) -> Vec<&str> {
        let mut words: Vec<(&str, u32)> = self.vocab.iter().map(|(w, &i)| (w.as_str(), i)).collect();
        words.sort_by_key(|&(_, i)| i);
        words.into_iter().map(|(w, _)| w).collect()
    }
}

impl LanguageModel for BigramModel {
    fn info(&self) -> BackendInfo {
        let mut info = BackendInfo::new("ref-bigram", false);
        info.first_token_context = Some("<s>".into());
        info
    }

    fn score_text(&self, text: &str) -> Result<Vec<WireToken>, String> {
        let mut prev = BOS;
        Ok(whitespace_spans(text)
            .into_iter()
            .map(|(s, e)| {
                let id = self.id(&text[s..e]);
                let bits = -self.probability_ids(prev, id).log2();
                prev = id;
                WireToken::with_offsets(&text[s..e], s, e, bits)
            })
            .collect())
    }
}

/// Fixture file for [`ScriptedModel`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScriptFixture {
    #[serde(default = "scripted_name")]
    pub backend_name: String,
    #[serde(default)]
    pub supports_separator: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separator_literal: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_marker: Option<String>,
    /// Request text to the tokens returned for it.
    pub responses: BTreeMap<String, Vec<WireToken>>,
}

fn scripted_name() -> String {
    "scripted".into()
}

/// Replays token scores from a fixture, keyed by exact request text.
#[derive(Debug, Clone)]
pub struct ScriptedModel {
    fixture: ScriptFixture,
}

impl ScriptedModel {
    pub fn new(fixture: ScriptFixture) -> Self {
        Self { fixture }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text).map(Self::new)
    }
}

impl LanguageModel for ScriptedModel {
    fn info(&self) -> BackendInfo {
        let mut info = BackendInfo::new(&self.fixture.backend_name, self.fixture.supports_separator);
        if let Some(lit) = &self.fixture.separator_literal {
            info.separator_literal = lit.clone();
        }
        info.token_marker = self.fixture.token_marker.clone();
        info
    }

    fn score_text(&self, text: &str) -> Result<Vec<WireToken>, String> {
        self.fixture
            .responses
            .get(text)
            .cloned()
            .ok_or_else(|| format!("no scripted response for {text:?}"))
    }
}
