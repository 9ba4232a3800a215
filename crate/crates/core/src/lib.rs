//! Targeted coherence evaluation for language models.
//!
//! Test suites pair a coherent text with minimally different incoherent
//! variants. A backend assigns each token a surprisal in bits, tokens are
//! grouped into regions, and a prediction such as
//! `mean(2;shuffled) > mean(2;original)` is checked per item. The share of
//! items that meet the prediction is the coherence-detection (CD) score.
//!
//! * [`suite`] and [`prediction`]: the suite format and the formula language.
//! * [`backend`]: the scoring protocol, a subprocess client and reference models.
//! * [`align`]: token-to-region assignment.
//! * [`eval`] and [`engine`]: aggregation, verdicts and CD reports.
//! * [`generate`]: builders for the six coherence suites.
//! * [`report`]: markdown tables over many results.
//! * [`commands`]: the operations behind the command-line tool.

pub mod align;
pub mod backend;
pub mod commands;
pub mod engine;
pub mod eval;
pub mod generate;
pub mod prediction;
pub mod report;
pub mod suite;

pub use align::{align, align_greedy_fallback, materialize, AlignedCondition, RegionSpan};
pub use backend::{Backend, BackendInfo, LocalBackend, ScoredSequence, SubprocessBackend, TokenScore};
pub use engine::evaluate_suite;
pub use eval::{aggregate, cd_score, evaluate_item, group_report, CdReport, ItemResult, Verdict};
pub use prediction::{parse_prediction, print_prediction, PredictionExpr};
pub use suite::{parse_suite, serialize_suite, Condition, Item, Phenomenon, Region, TestSuite};
