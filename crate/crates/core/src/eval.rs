//! Region aggregates, prediction verdicts and coherence-detection scores.
//!
//! The mean region surprisal is the arithmetic mean of the token surprisals
//! in the region set. Sums use pairwise summation: first within each region,
//! then across the per-region sums in ascending region order, so a set
//! aggregate is exactly the pairwise sum of its single-region aggregates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::AlignedCondition;
use crate::prediction::{AggFunc, Aggregate, CmpOp, PredictionExpr, RegionSet};

/// Version of the results JSON written by [`CdReport`].
pub const RESULTS_VERSION: u32 = 1;

const PAIRWISE_BLOCK: usize = 8;

/// Pairwise (cascade) summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        values.iter().fold(0.0, |acc, v| acc + v)
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionAggregate {
    pub region_set: RegionSet,
    pub condition_name: String,
    pub sum_bits: f64,
    pub token_count: usize,
    pub mean_bits: f64,
}

impl RegionAggregate {
    pub fn value(&self, func: AggFunc) -> f64 {
        match func {
            AggFunc::Mean => self.mean_bits,
            AggFunc::Sum => self.sum_bits,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no tokens in regions {regions} of condition {condition:?}")]
    EmptyAggregate { condition: String, regions: String },
    #[error("condition {0:?} was not aligned")]
    UnknownCondition(String),
    #[error("region {region} does not exist in condition {condition:?}")]
    UnknownRegion { condition: String, region: u32 },
    #[error("no item has a defined verdict")]
    NoValidItems,
}

/// Sum and mean of token surprisal over `region_set`.
///
/// Each region is summed on its own and the region sums are then added in
/// region order, so the sum over all regions is exactly the sum of the
/// single-region sums.
pub fn aggregate(
    aligned: &AlignedCondition,
    region_set: &RegionSet,
) -> Result<RegionAggregate, EvalError> {
    if let RegionSet::Regions(set) = region_set {
        if let Some(&missing) = set.iter().find(|r| !aligned.region_tokens.contains_key(r)) {
            return Err(EvalError::UnknownRegion {
                condition: aligned.condition_name.clone(),
                region: missing,
            });
        }
    }
    let mut region_sums = Vec::new();
    let mut count = 0usize;
    for (region, tokens) in &aligned.region_tokens {
        if !region_set.contains(*region) {
            continue;
        }
        let bits: Vec<f64> = tokens.iter().map(|t| t.surprisal_bits).collect();
        region_sums.push(pairwise_sum(&bits));
        count += bits.len();
    }
    if count == 0 {
        return Err(EvalError::EmptyAggregate {
            condition: aligned.condition_name.clone(),
            regions: region_set.to_string(),
        });
    }
    let sum = pairwise_sum(&region_sums);
    Ok(RegionAggregate {
        region_set: region_set.clone(),
        condition_name: aligned.condition_name.clone(),
        sum_bits: sum,
        token_count: count,
        mean_bits: sum / count as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Met,
    NotMet,
    Tie,
    Undefined,
}

fn agg_value(
    aligned: &BTreeMap<String, AlignedCondition>,
    agg: &Aggregate,
) -> Result<Option<f64>, EvalError> {
    let cond = aligned
        .get(&agg.condition)
        .ok_or_else(|| EvalError::UnknownCondition(agg.condition.clone()))?;
    match aggregate(cond, &agg.regions) {
        Ok(a) => Ok(Some(a.value(agg.func))),
        Err(EvalError::EmptyAggregate { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Relative gap below which two aggregates count as equal. Regrouping the
/// same surprisals into different regions changes the rounding of the sum
/// by a few ulps, far below this.
pub const TIE_TOLERANCE: f64 = 1e-12;

fn tied(l: f64, r: f64) -> bool {
    l == r || (l - r).abs() <= TIE_TOLERANCE * l.abs().max(r.abs())
}

/// Evaluates one prediction for one item.
///
/// A lone comparison with equal sides (see [`TIE_TOLERANCE`]) is a `Tie`. Inside `&`/`|` a tie
/// counts as false. Any aggregate without tokens makes the verdict
/// `Undefined`.
pub fn evaluate_item(
    aligned: &BTreeMap<String, AlignedCondition>,
    prediction: &PredictionExpr,
) -> Result<Verdict, EvalError> {
    match prediction {
        PredictionExpr::Compare { lhs, op, rhs } => {
            let (Some(l), Some(r)) = (agg_value(aligned, lhs)?, agg_value(aligned, rhs)?) else {
                return Ok(Verdict::Undefined);
            };
            Ok(if tied(l, r) {
                Verdict::Tie
            } else {
                let holds = match op {
                    CmpOp::Gt => l > r,
                    CmpOp::Lt => l < r,
                };
                if holds {
                    Verdict::Met
                } else {
                    Verdict::NotMet
                }
            })
        }
        PredictionExpr::And(a, b) | PredictionExpr::Or(a, b) => {
            let va = evaluate_item(aligned, a)?;
            let vb = evaluate_item(aligned, b)?;
            if va == Verdict::Undefined || vb == Verdict::Undefined {
                return Ok(Verdict::Undefined);
            }
            let (ta, tb) = (va == Verdict::Met, vb == Verdict::Met);
            let holds = if matches!(prediction, PredictionExpr::And(..)) {
                ta && tb
            } else {
                ta || tb
            };
            Ok(if holds { Verdict::Met } else { Verdict::NotMet })
        }
    }
}

/// Per-region numbers kept for drill-down.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionStats {
    pub sum_bits: f64,
    pub token_count: usize,
    pub mean_bits: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemResult {
    pub item_number: u32,
    pub tags: BTreeMap<String, String>,
    /// One verdict per suite prediction, in suite order.
    pub verdicts: Vec<Verdict>,
    /// condition → region → stats
    pub regions: BTreeMap<String, BTreeMap<u32, RegionStats>>,
}

impl ItemResult {
    pub fn from_aligned(
        item_number: u32,
        tags: BTreeMap<String, String>,
        aligned: &BTreeMap<String, AlignedCondition>,
        predictions: &[PredictionExpr],
    ) -> Result<Self, EvalError> {
        let verdicts = predictions
            .iter()
            .map(|p| evaluate_item(aligned, p))
            .collect::<Result<Vec<_>, _>>()?;
        let regions = aligned
            .iter()
            .map(|(name, cond)| {
                let per_region = cond
                    .region_tokens
                    .iter()
                    .map(|(&r, tokens)| {
                        let bits: Vec<f64> = tokens.iter().map(|t| t.surprisal_bits).collect();
                        let sum = pairwise_sum(&bits);
                        let mean = (!bits.is_empty()).then(|| sum / bits.len() as f64);
                        (
                            r,
                            RegionStats {
                                sum_bits: sum,
                                token_count: bits.len(),
                                mean_bits: mean,
                            },
                        )
                    })
                    .collect();
                (name.clone(), per_region)
            })
            .collect();
        Ok(Self {
            item_number,
            tags,
            verdicts,
            regions,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub met: usize,
    pub not_met: usize,
    pub tie_count: usize,
    pub undefined_count: usize,
}

impl Tally {
    pub fn add(&mut self, verdict: Verdict) {
        match verdict {
            Verdict::Met => self.met += 1,
            Verdict::NotMet => self.not_met += 1,
            Verdict::Tie => self.tie_count += 1,
            Verdict::Undefined => self.undefined_count += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.met + self.not_met + self.tie_count + self.undefined_count
    }

    /// `met / (met + not_met + ties)`; undefined items are left out.
    pub fn accuracy(&self) -> Option<f64> {
        let valid = self.met + self.not_met + self.tie_count;
        (valid > 0).then(|| self.met as f64 / valid as f64)
    }
}

fn tally(verdicts: impl IntoIterator<Item = Verdict>) -> Tally {
    let mut t = Tally::default();
    verdicts.into_iter().for_each(|v| t.add(v));
    t
}

/// Coherence-detection accuracy of prediction `prediction` over `results`.
pub fn cd_score(results: &[ItemResult], prediction: usize) -> Result<f64, EvalError> {
    tally(results.iter().map(|r| r.verdicts[prediction]))
        .accuracy()
        .ok_or(EvalError::NoValidItems)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub accuracy: Option<f64>,
    pub count: usize,
    #[serde(flatten)]
    pub tally: Tally,
}

/// Group label for items lacking the tag.
pub const UNTAGGED: &str = "(untagged)";

/// Accuracy of one prediction per value of `tag_key`.
pub fn group_report(
    results: &[ItemResult],
    prediction: usize,
    tag_key: &str,
) -> BTreeMap<String, GroupStats> {
    let mut tallies: BTreeMap<String, Tally> = BTreeMap::new();
    for r in results {
        let value = r.tags.get(tag_key).map_or(UNTAGGED, String::as_str);
        tallies
            .entry(value.to_string())
            .or_default()
            .add(r.verdicts[prediction]);
    }
    tallies
        .into_iter()
        .map(|(k, t)| {
            (
                k,
                GroupStats {
                    accuracy: t.accuracy(),
                    count: t.total(),
                    tally: t,
                },
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSummary {
    pub formula: String,
    pub accuracy: Option<f64>,
    pub item_count: usize,
    #[serde(flatten)]
    pub tally: Tally,
    /// tag key → tag value → stats
    pub groups: BTreeMap<String, BTreeMap<String, GroupStats>>,
}

/// Results of running one suite against one backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdReport {
    pub version: u32,
    pub suite_name: String,
    pub phenomenon: crate::suite::Phenomenon,
    pub backend_name: String,
    pub predictions: Vec<PredictionSummary>,
    pub items: Vec<ItemResult>,
}

impl CdReport {
    /// Assembles the report; `items` are ordered by item number.
    pub fn build(
        suite: &crate::suite::TestSuite,
        backend_name: &str,
        mut items: Vec<ItemResult>,
    ) -> Self {
        items.sort_by_key(|r| r.item_number);
        let tag_keys: std::collections::BTreeSet<&str> = items
            .iter()
            .flat_map(|r| r.tags.keys().map(String::as_str))
            .collect();
        let predictions = suite
            .predictions
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let t = tally(items.iter().map(|r| r.verdicts[i]));
                PredictionSummary {
                    formula: p.to_string(),
                    accuracy: t.accuracy(),
                    item_count: items.len(),
                    tally: t,
                    groups: tag_keys
                        .iter()
                        .map(|k| (k.to_string(), group_report(&items, i, k)))
                        .collect(),
                }
            })
            .collect();
        Self {
            version: RESULTS_VERSION,
            suite_name: suite.name.clone(),
            phenomenon: suite.phenomenon,
            backend_name: backend_name.to_string(),
            predictions,
            items,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }
}
