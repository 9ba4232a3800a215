//! Test-suite data model, canonical JSON form and validation.
//!
//! A suite holds items; every item has the same set of conditions and every
//! condition of an item splits its text into regions numbered `1..=R`.
//! Predictions are stored as formula strings and parsed on load.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prediction::{parse_prediction, PredictionExpr, RegionSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phenomenon {
    ShuffleAll,
    ShuffleContext,
    StoryCloze,
    WinogradFull,
    WinogradPartial,
    Coreference,
    Connectives,
    SpeakerCommitment,
    Custom,
}

impl Phenomenon {
    pub fn as_str(self) -> &'static str {
        match self {
            Phenomenon::ShuffleAll => "shuffle_all",
            Phenomenon::ShuffleContext => "shuffle_context",
            Phenomenon::StoryCloze => "story_cloze",
            Phenomenon::WinogradFull => "winograd_full",
            Phenomenon::WinogradPartial => "winograd_partial",
            Phenomenon::Coreference => "coreference",
            Phenomenon::Connectives => "connectives",
            Phenomenon::SpeakerCommitment => "speaker_commitment",
            Phenomenon::Custom => "custom",
        }
    }
}

impl fmt::Display for Phenomenon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub region_number: u32,
    pub content: String,
}

impl Region {
    pub fn new(region_number: u32, content: impl Into<String>) -> Self {
        Self {
            region_number,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub condition_name: String,
    pub regions: Vec<Region>,
}

impl Condition {
    /// Builds a condition whose regions are numbered from 1 in order.
    pub fn from_contents<S: Into<String>>(
        name: impl Into<String>,
        contents: impl IntoIterator<Item = S>,
    ) -> Self {
        let regions = contents
            .into_iter()
            .enumerate()
            .map(|(i, c)| Region::new(i as u32 + 1, c))
            .collect();
        Self {
            condition_name: name.into(),
            regions,
        }
    }

    pub fn region(&self, number: u32) -> Option<&Region> {
        self.regions.iter().find(|r| r.region_number == number)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub item_number: u32,
    #[serde(default)]
    pub tags: BTreeMap<String, String>,
    pub conditions: Vec<Condition>,
}

impl Item {
    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.condition_name == name)
    }

    pub fn region_count(&self) -> usize {
        self.conditions.first().map_or(0, |c| c.regions.len())
    }
}

/// A validated suite. Build one with [`parse_suite`] or [`TestSuite::new`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestSuite {
    pub name: String,
    pub phenomenon: Phenomenon,
    pub region_meta: BTreeMap<u32, String>,
    pub predictions: Vec<PredictionExpr>,
    pub items: Vec<Item>,
}

/// The literal marking a speaker change inside region text.
pub const SEPARATOR_LITERAL: &str = "[SEP]";

impl TestSuite {
    pub fn new(
        name: impl Into<String>,
        phenomenon: Phenomenon,
        region_meta: BTreeMap<u32, String>,
        predictions: Vec<PredictionExpr>,
        mut items: Vec<Item>,
    ) -> Result<Self, SuiteError> {
        items.sort_by_key(|i| i.item_number);
        let suite = Self {
            name: name.into(),
            phenomenon,
            region_meta,
            predictions,
            items,
        };
        suite.validate()?;
        Ok(suite)
    }

    /// True when the suite can only be scored by a backend that understands
    /// the speaker-change separator.
    pub fn requires_separator(&self) -> bool {
        self.phenomenon == Phenomenon::SpeakerCommitment
            || self.items.iter().any(|item| {
                item.conditions.iter().any(|c| {
                    c.regions
                        .iter()
                        .any(|r| r.content.contains(SEPARATOR_LITERAL))
                })
            })
    }

    pub fn condition_names(&self) -> Vec<&str> {
        self.items.first().map_or_else(Vec::new, |item| {
            item.conditions
                .iter()
                .map(|c| c.condition_name.as_str())
                .collect()
        })
    }

    pub fn max_regions(&self) -> usize {
        self.items.iter().map(Item::region_count).max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<(), SuiteError> {
        if self.name.trim().is_empty() {
            return Err(SuiteError::schema("name", "must be non-empty"));
        }
        if self.items.is_empty() {
            return Err(SuiteError::schema("items", "at least one item is required"));
        }

        let mut seen = BTreeSet::new();
        let reference: Vec<&str> = self.items[0]
            .conditions
            .iter()
            .map(|c| c.condition_name.as_str())
            .collect();
        let reference_set: BTreeSet<&str> = reference.iter().copied().collect();

        for (i, item) in self.items.iter().enumerate() {
            let path = format!("items[{i}]");
            if item.item_number == 0 {
                return Err(SuiteError::schema(
                    format!("{path}.item_number"),
                    "must be a positive integer",
                ));
            }
            if !seen.insert(item.item_number) {
                return Err(SuiteError::schema(
                    format!("{path}.item_number"),
                    format!("duplicate item number {}", item.item_number),
                ));
            }
            if item.conditions.len() < 2 {
                return Err(SuiteError::schema(
                    format!("{path}.conditions"),
                    "an item needs at least two conditions",
                ));
            }
            let names: BTreeSet<&str> = item
                .conditions
                .iter()
                .map(|c| c.condition_name.as_str())
                .collect();
            if names.len() != item.conditions.len() {
                return Err(SuiteError::inconsistent(
                    item.item_number,
                    "duplicate condition name",
                ));
            }
            if names != reference_set {
                return Err(SuiteError::inconsistent(
                    item.item_number,
                    format!(
                        "condition names {:?} differ from {:?}",
                        names, reference_set
                    ),
                ));
            }
            if item.conditions.iter().any(|c| c.condition_name.is_empty()) {
                return Err(SuiteError::schema(
                    format!("{path}.conditions"),
                    "condition names must be non-empty",
                ));
            }

            let region_count = item.region_count();
            if region_count == 0 {
                return Err(SuiteError::inconsistent(item.item_number, "no regions"));
            }
            for (ci, cond) in item.conditions.iter().enumerate() {
                if cond.regions.len() != region_count {
                    return Err(SuiteError::inconsistent(
                        item.item_number,
                        format!(
                            "condition {:?} has {} regions, expected {region_count}",
                            cond.condition_name,
                            cond.regions.len()
                        ),
                    ));
                }
                for (ri, region) in cond.regions.iter().enumerate() {
                    if region.region_number as usize != ri + 1 {
                        return Err(SuiteError::inconsistent(
                            item.item_number,
                            format!(
                                "condition {:?} lacks region {} (found {})",
                                cond.condition_name,
                                ri + 1,
                                region.region_number
                            ),
                        ));
                    }
                    if region.content.chars().any(char::is_control) {
                        return Err(SuiteError::schema(
                            format!("{path}.conditions[{ci}].regions[{ri}].content"),
                            "control characters are not allowed",
                        ));
                    }
                }
            }
        }

        let max_regions = self.max_regions() as u32;
        let meta_keys: BTreeSet<u32> = self.region_meta.keys().copied().collect();
        let expected: BTreeSet<u32> = (1..=max_regions).collect();
        if meta_keys != expected {
            return Err(SuiteError::schema(
                "region_meta",
                format!("must label exactly regions 1..={max_regions}"),
            ));
        }

        if self.predictions.is_empty() {
            return Err(SuiteError::schema(
                "predictions",
                "at least one prediction is required",
            ));
        }
        let min_regions = self
            .items
            .iter()
            .map(Item::region_count)
            .min()
            .unwrap_or(0) as u32;
        for (pi, pred) in self.predictions.iter().enumerate() {
            let path = format!("predictions[{pi}]");
            for agg in pred.aggregates() {
                if !reference_set.contains(agg.condition.as_str()) {
                    return Err(SuiteError::schema(
                        path,
                        format!("unknown condition {:?}", agg.condition),
                    ));
                }
                if let RegionSet::Regions(set) = &agg.regions {
                    if set.is_empty() {
                        return Err(SuiteError::schema(path, "empty region set"));
                    }
                    for r in set {
                        if !self.region_meta.contains_key(r) || *r > min_regions {
                            return Err(SuiteError::schema(
                                path,
                                format!("region {r} does not exist in every item"),
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SuiteError {
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("schema violation at {path}: {reason}")]
    SchemaViolation { path: String, reason: String },
    #[error("inconsistent conditions in item {item_number}: {reason}")]
    InconsistentConditions { item_number: u32, reason: String },
}

impl SuiteError {
    fn schema(path: impl Into<String>, reason: impl Into<String>) -> Self {
        SuiteError::SchemaViolation {
            path: path.into(),
            reason: reason.into(),
        }
    }

    fn inconsistent(item_number: u32, reason: impl Into<String>) -> Self {
        SuiteError::InconsistentConditions {
            item_number,
            reason: reason.into(),
        }
    }
}

/// On-disk shape. Field order here is the canonical key order.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SuiteFile {
    name: String,
    phenomenon: Phenomenon,
    region_meta: BTreeMap<u32, String>,
    predictions: Vec<String>,
    items: Vec<Item>,
}

pub fn parse_suite(text: &str) -> Result<TestSuite, SuiteError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| SuiteError::MalformedJson(e.to_string()))?;
    let file: SuiteFile = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        SuiteError::SchemaViolation {
            path,
            reason: e.into_inner().to_string(),
        }
    })?;
    let mut predictions = Vec::with_capacity(file.predictions.len());
    for (i, formula) in file.predictions.iter().enumerate() {
        let expr = parse_prediction(formula).map_err(|e| SuiteError::SchemaViolation {
            path: format!("predictions[{i}]"),
            reason: e.to_string(),
        })?;
        predictions.push(expr);
    }
    TestSuite::new(
        file.name,
        file.phenomenon,
        file.region_meta,
        predictions,
        file.items,
    )
}

/// Canonical JSON: fixed key order, items sorted by number, two-space
/// indentation and a trailing newline.
pub fn serialize_suite(suite: &TestSuite) -> String {
    let mut items = suite.items.clone();
    items.sort_by_key(|item| item.item_number);
    let file = SuiteFile {
        name: suite.name.clone(),
        phenomenon: suite.phenomenon,
        region_meta: suite.region_meta.clone(),
        predictions: suite.predictions.iter().map(|p| p.to_string()).collect(),
        items,
    };
    let mut out = serde_json::to_string_pretty(&file).expect("suite serialization cannot fail");
    out.push('\n');
    out
}
