//! Scoring a whole suite: materialize, score, align, evaluate.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::align::{align, align_greedy_fallback, materialize, AlignError, AlignedCondition};
use crate::backend::{check_request, check_scores, Backend, BackendError, BackendInfo, ScoreRequest};
use crate::eval::{CdReport, EvalError, ItemResult};
use crate::suite::{Condition, Item, TestSuite, SEPARATOR_LITERAL};

#[derive(Debug, Error)]
pub enum RunErrorKind {
    #[error("no backend given")]
    NoBackends,
    #[error("backend {backend:?} does not support the speaker separator required by suite {suite:?}")]
    SeparatorUnsupported { suite: String, backend: String },
    #[error("backend processes disagree: {0:?} vs {1:?}")]
    MismatchedBackends(String, String),
    #[error("item {item}: {source}")]
    Backend {
        item: u32,
        #[source]
        source: BackendError,
    },
    #[error("handshake failed: {0}")]
    Handshake(#[source] BackendError),
    #[error("item {item}, condition {condition:?}: {source}")]
    Align {
        item: u32,
        condition: String,
        #[source]
        source: AlignError,
    },
    #[error("item {item}: {source}")]
    Eval {
        item: u32,
        #[source]
        source: EvalError,
    },
}

/// A failed run, with whatever items completed before the failure.
#[derive(Debug, Error)]
#[error("{kind}")]
pub struct RunError {
    pub kind: RunErrorKind,
    pub partial: Vec<ItemResult>,
}

impl From<RunErrorKind> for RunError {
    fn from(kind: RunErrorKind) -> Self {
        Self {
            kind,
            partial: Vec::new(),
        }
    }
}

/// Handshakes every backend and checks that the suite can run on them.
pub fn prepare<B: Backend>(suite: &TestSuite, backends: &mut [B]) -> Result<BackendInfo, RunError> {
    let mut infos = Vec::with_capacity(backends.len());
    for b in backends.iter_mut() {
        infos.push(b.handshake().map_err(RunErrorKind::Handshake)?);
    }
    let info = infos.first().cloned().ok_or(RunErrorKind::NoBackends)?;
    if let Some(other) = infos.iter().find(|i| **i != info) {
        return Err(RunErrorKind::MismatchedBackends(
            info.backend_name.clone(),
            other.backend_name.clone(),
        )
        .into());
    }
    if suite.requires_separator() && !info.supports_separator {
        return Err(RunErrorKind::SeparatorUnsupported {
            suite: suite.name.clone(),
            backend: info.backend_name.clone(),
        }
        .into());
    }
    Ok(info)
}

fn with_separator(condition: &Condition, literal: &str) -> Condition {
    if literal == SEPARATOR_LITERAL {
        return condition.clone();
    }
    let mut c = condition.clone();
    for r in &mut c.regions {
        r.content = r.content.replace(SEPARATOR_LITERAL, literal);
    }
    c
}

/// Scores and aligns one condition, using offsets when the backend sends
/// them and greedy matching when it sends none.
pub fn score_condition<B: Backend + ?Sized>(
    backend: &mut B,
    info: &BackendInfo,
    item_number: u32,
    condition: &Condition,
) -> Result<AlignedCondition, RunErrorKind> {
    let condition = with_separator(condition, &info.separator_literal);
    let materialized = materialize(&condition);
    let request = ScoreRequest::new(
        format!("{item_number}/{}", condition.condition_name),
        materialized.text.clone(),
    );
    let backend_err = |source| RunErrorKind::Backend {
        item: item_number,
        source,
    };
    check_request(&request).map_err(backend_err)?;
    let tokens = backend.score_raw(&request).map_err(backend_err)?;
    let align_err = |source| RunErrorKind::Align {
        item: item_number,
        condition: condition.condition_name.clone(),
        source,
    };
    let with_offsets = tokens.iter().filter(|t| t.start.is_some() && t.end.is_some()).count();
    if with_offsets == tokens.len() {
        let scored = check_scores(&request, &tokens).map_err(backend_err)?;
        align(&materialized, &scored).map_err(align_err)
    } else if with_offsets == 0 {
        if let Some(bad) = tokens
            .iter()
            .find(|t| !t.surprisal_bits.is_finite() || t.surprisal_bits < 0.0)
        {
            return Err(backend_err(BackendError::ProtocolViolation {
                line: 0,
                reason: format!("token {:?} has surprisal {}", bad.text, bad.surprisal_bits),
            }));
        }
        align_greedy_fallback(&condition, &tokens, info.token_marker.as_deref()).map_err(align_err)
    } else {
        Err(backend_err(BackendError::ProtocolViolation {
            line: 0,
            reason: format!("request {}: some tokens lack offsets", request.id),
        }))
    }
}

pub fn score_item<B: Backend + ?Sized>(
    backend: &mut B,
    info: &BackendInfo,
    suite: &TestSuite,
    item: &Item,
) -> Result<ItemResult, RunErrorKind> {
    let mut aligned = BTreeMap::new();
    for condition in &item.conditions {
        let a = score_condition(backend, info, item.item_number, condition)?;
        aligned.insert(condition.condition_name.clone(), a);
    }
    ItemResult::from_aligned(item.item_number, item.tags.clone(), &aligned, &suite.predictions).map_err(
        |source| RunErrorKind::Eval {
            item: item.item_number,
            source,
        },
    )
}

/// Runs `suite` against one or more equivalent backends. Items are dealt
/// round-robin to the backends, each backend on its own thread; results are
/// put back in item order, so the report does not depend on how many
/// backends were used.
pub fn evaluate_suite<B: Backend + Send>(
    suite: &TestSuite,
    backends: &mut [B],
) -> Result<CdReport, RunError> {
    let info = prepare(suite, backends)?;
    let shards = backends.len();
    let outcomes: Vec<(Vec<ItemResult>, Option<RunErrorKind>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = backends
            .iter_mut()
            .enumerate()
            .map(|(shard, backend)| {
                let info = &info;
                scope.spawn(move || {
                    let mut done = Vec::new();
                    for item in suite.items.iter().skip(shard).step_by(shards) {
                        match score_item(backend, info, suite, item) {
                            Ok(r) => done.push(r),
                            Err(e) => return (done, Some(e)),
                        }
                    }
                    (done, None)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scoring thread panicked"))
            .collect()
    });

    let mut results = Vec::new();
    let mut failure = None;
    for (done, err) in outcomes {
        results.extend(done);
        if failure.is_none() {
            failure = err;
        }
    }
    results.sort_by_key(|r| r.item_number);
    if let Some(kind) = failure {
        return Err(RunError {
            kind,
            partial: results,
        });
    }
    Ok(CdReport::build(suite, &info.backend_name, results))
}
