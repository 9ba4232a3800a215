//! Builders for the coherence test suites.
//!
//! Each generator turns corpus records into a validated [`TestSuite`]. All
//! generators are deterministic in their inputs (and seed, for the shuffle
//! suites); item numbers follow record order starting at 1.

mod commitment;
mod connectives;
mod coreference;
mod endings;
pub mod records;
mod shuffle;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::prediction::{parse_prediction, PredictionExpr};
use crate::suite::{Condition, Item, Phenomenon, SuiteError, TestSuite};

pub use commitment::gen_speaker_commitment;
pub use connectives::{gen_connectives, CONNECTIVES};
pub use coreference::{definite_np, gen_coreference};
pub use endings::{gen_story_cloze, gen_winograd, WinogradScope};
pub use records::{
    read_records, ConnectiveRecord, CorefGenre, CorefRecord, DialogueRecord, DiscourseRecord,
    IngestError, NliLabel, NliPairRecord, StoryRecord, WinogradRecord,
};
pub use shuffle::{gen_shuffle_all, gen_shuffle_context, MAX_SHUFFLE_DRAWS};

/// A record left out of a suite, with the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skipped {
    /// 0-based index into the input records.
    pub record: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generated {
    pub suite: TestSuite,
    pub skipped: Vec<Skipped>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("record {record}: needs at least {needed} units, found {found}")]
    TooFewUnits {
        record: usize,
        needed: usize,
        found: usize,
    },
    #[error("record {record}: no distractor ending")]
    MissingDistractor { record: usize },
    #[error("record {record}: span {start}..{end} of the continuation is not a pronoun")]
    SpanNotPronoun {
        record: usize,
        start: usize,
        end: usize,
    },
    #[error("record {record}: unknown connective {connective:?}")]
    UnknownConnective { record: usize, connective: String },
    #[error("record {record}: label is not a contradiction")]
    NonContradictionLabel { record: usize },
    #[error("record {record}: {reason}")]
    InvalidRecord { record: usize, reason: String },
    #[error("no record produced an item")]
    NoItems,
    #[error(transparent)]
    Suite(#[from] SuiteError),
}

/// The seven generator kinds accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    ShuffleAll,
    ShuffleContext,
    StoryCloze,
    Winograd,
    Coreference,
    Connectives,
    SpeakerCommitment,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 7] = [
        GeneratorKind::ShuffleAll,
        GeneratorKind::ShuffleContext,
        GeneratorKind::StoryCloze,
        GeneratorKind::Winograd,
        GeneratorKind::Coreference,
        GeneratorKind::Connectives,
        GeneratorKind::SpeakerCommitment,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GeneratorKind::ShuffleAll => "shuffle-all",
            GeneratorKind::ShuffleContext => "shuffle-context",
            GeneratorKind::StoryCloze => "story-cloze",
            GeneratorKind::Winograd => "winograd",
            GeneratorKind::Coreference => "coreference",
            GeneratorKind::Connectives => "connectives",
            GeneratorKind::SpeakerCommitment => "speaker-commitment",
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GeneratorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GeneratorKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = GeneratorKind::ALL.iter().map(|k| k.as_str()).collect();
                format!("unknown generator {s:?}; expected one of {}", names.join(", "))
            })
    }
}

/// Options shared by all generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerateOptions {
    pub seed: u64,
    pub winograd_scope: WinogradScope,
    /// Suite name; defaults to the phenomenon name.
    pub name: Option<String>,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            winograd_scope: WinogradScope::Full,
            name: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum GenerateFailure {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
}

/// Parses JSON-lines `records` for `kind` and runs the matching generator.
pub fn generate_from_jsonl(
    kind: GeneratorKind,
    records: &str,
    options: &GenerateOptions,
) -> Result<Generated, GenerateFailure> {
    let mut generated = match kind {
        GeneratorKind::ShuffleAll => gen_shuffle_all(&read_records(records)?, options.seed)?,
        GeneratorKind::ShuffleContext => gen_shuffle_context(&read_records(records)?, options.seed)?,
        GeneratorKind::StoryCloze => gen_story_cloze(&read_records(records)?)?,
        GeneratorKind::Winograd => gen_winograd(&read_records(records)?, options.winograd_scope)?,
        GeneratorKind::Coreference => gen_coreference(&read_records(records)?)?,
        GeneratorKind::Connectives => gen_connectives(&read_records(records)?)?,
        GeneratorKind::SpeakerCommitment => gen_speaker_commitment(&read_records(records)?)?,
    };
    if let Some(name) = &options.name {
        generated.suite.name = name.clone();
        generated.suite.validate().map_err(GenerateError::from)?;
    }
    Ok(generated)
}

// Helpers shared by the generators.

fn formula(text: &str) -> PredictionExpr {
    parse_prediction(text).expect("built-in formulas parse")
}

fn check_text(record: usize, what: &str, text: &str) -> Result<(), GenerateError> {
    if text.trim().is_empty() {
        return Err(GenerateError::InvalidRecord {
            record,
            reason: format!("{what} is empty"),
        });
    }
    if text.chars().any(char::is_control) {
        return Err(GenerateError::InvalidRecord {
            record,
            reason: format!("{what} contains control characters"),
        });
    }
    Ok(())
}

fn item(number: u32, tags: BTreeMap<String, String>, conditions: Vec<Condition>) -> Item {
    Item {
        item_number: number,
        tags,
        conditions,
    }
}

fn tags<const N: usize>(pairs: [(&str, &str); N]) -> BTreeMap<String, String> {
    pairs
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn region_meta(labels: &[&str]) -> BTreeMap<u32, String> {
    labels
        .iter()
        .enumerate()
        .map(|(i, l)| (i as u32 + 1, l.to_string()))
        .collect()
}

fn finish(
    phenomenon: Phenomenon,
    region_meta: BTreeMap<u32, String>,
    predictions: Vec<PredictionExpr>,
    items: Vec<Item>,
    skipped: Vec<Skipped>,
) -> Result<Generated, GenerateError> {
    if items.is_empty() {
        return Err(GenerateError::NoItems);
    }
    let suite = TestSuite::new(phenomenon.as_str(), phenomenon, region_meta, predictions, items)?;
    for s in &skipped {
        log::info!("{}: skipped record {}: {}", phenomenon, s.record, s.reason);
    }
    Ok(Generated { suite, skipped })
}
