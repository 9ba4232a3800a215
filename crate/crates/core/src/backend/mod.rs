//! Surprisal-producing backends.
//!
//! A backend turns a text into tokens with byte offsets and surprisal in
//! bits. Backends run either in-process ([`LocalBackend`] over a
//! [`LanguageModel`]) or as a child process speaking the newline-delimited
//! JSON protocol in [`protocol`] ([`SubprocessBackend`]). Either way the
//! client side enforces the same span checks in [`check_scores`].

pub mod protocol;
pub mod reference;
pub mod server;
pub mod subprocess;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use protocol::{BackendInfo, WireToken};
pub use reference::{train_reference_bigram, BigramModel, ScriptedModel, UniformModel};
pub use server::serve;
pub use subprocess::SubprocessBackend;

/// One scored token. `text` is `input[start..end]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenScore {
    pub text: String,
    pub start: usize,
    pub end: usize,
    pub surprisal_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSequence {
    pub request_id: String,
    pub tokens: Vec<TokenScore>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreRequest {
    pub id: String,
    pub text: String,
}

impl ScoreRequest {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("failed to launch backend {command:?}: {source}")]
    Spawn {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("backend process exited: {0}")]
    BackendCrashed(String),
    #[error("protocol violation on response line {line}: {reason}")]
    ProtocolViolation { line: usize, reason: String },
    #[error("request {request_id}: byte {offset} is not covered by any token")]
    CoverageGap { request_id: String, offset: usize },
    #[error("backend did not answer within {0} s")]
    Timeout(f64),
    #[error("backend reported an error for request {id}: {message}")]
    Reported { id: String, message: String },
    #[error("reference corpus contains no tokens")]
    EmptyCorpus,
    #[error("backend i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Anything that can answer handshakes and score texts.
pub trait Backend {
    fn handshake(&mut self) -> Result<BackendInfo, BackendError>;

    /// Scores one text, returning tokens as the backend sent them.
    fn score_raw(&mut self, request: &ScoreRequest) -> Result<Vec<WireToken>, BackendError>;

    /// Scores every input in order and checks the span invariants.
    fn score(&mut self, inputs: &[ScoreRequest]) -> Result<Vec<ScoredSequence>, BackendError> {
        inputs
            .iter()
            .map(|req| {
                check_request(req)?;
                let tokens = self.score_raw(req)?;
                check_scores(req, &tokens)
            })
            .collect()
    }
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn handshake(&mut self) -> Result<BackendInfo, BackendError> {
        (**self).handshake()
    }

    fn score_raw(&mut self, request: &ScoreRequest) -> Result<Vec<WireToken>, BackendError> {
        (**self).score_raw(request)
    }
}

/// Rejects requests that must never reach a backend.
pub fn check_request(req: &ScoreRequest) -> Result<(), BackendError> {
    if req.text.is_empty() {
        return Err(BackendError::ProtocolViolation {
            line: 0,
            reason: format!("request {} has empty text", req.id),
        });
    }
    Ok(())
}

/// Validates offsets and surprisals of a response and converts it into a
/// [`ScoredSequence`]. Tokens must be in increasing, non-overlapping order,
/// match the request text exactly, and together cover every non-whitespace
/// byte.
pub fn check_scores(req: &ScoreRequest, tokens: &[WireToken]) -> Result<ScoredSequence, BackendError> {
    let text = req.text.as_str();
    let violation = |reason: String| BackendError::ProtocolViolation { line: 0, reason };
    let mut out = Vec::with_capacity(tokens.len());
    let mut cursor = 0usize;
    for (i, tok) in tokens.iter().enumerate() {
        let (start, end) = match (tok.start, tok.end) {
            (Some(s), Some(e)) => (s, e),
            _ => return Err(violation(format!("token {i} of {} lacks offsets", req.id))),
        };
        if start >= end || end > text.len() {
            return Err(violation(format!(
                "token {i} of {} has invalid span {start}..{end}",
                req.id
            )));
        }
        if start < cursor {
            return Err(violation(format!(
                "token {i} of {} overlaps the previous token",
                req.id
            )));
        }
        if !text.is_char_boundary(start) || !text.is_char_boundary(end) {
            return Err(violation(format!(
                "token {i} of {} splits a UTF-8 character",
                req.id
            )));
        }
        if text[start..end] != tok.text {
            return Err(violation(format!(
                "token {i} of {}: text {:?} does not match input {:?}",
                req.id,
                tok.text,
                &text[start..end]
            )));
        }
        if !tok.surprisal_bits.is_finite() || tok.surprisal_bits < 0.0 {
            return Err(violation(format!(
                "token {i} of {} has surprisal {}",
                req.id, tok.surprisal_bits
            )));
        }
        first_uncovered(text, cursor, start).map_or(Ok(()), |offset| {
            Err(BackendError::CoverageGap {
                request_id: req.id.clone(),
                offset,
            })
        })?;
        cursor = end;
        out.push(TokenScore {
            text: tok.text.clone(),
            start,
            end,
            surprisal_bits: tok.surprisal_bits,
        });
    }
    if let Some(offset) = first_uncovered(text, cursor, text.len()) {
        return Err(BackendError::CoverageGap {
            request_id: req.id.clone(),
            offset,
        });
    }
    Ok(ScoredSequence {
        request_id: req.id.clone(),
        tokens: out,
    })
}

fn first_uncovered(text: &str, from: usize, to: usize) -> Option<usize> {
    text[from..to]
        .char_indices()
        .find(|(_, c)| !c.is_whitespace())
        .map(|(i, _)| from + i)
}

/// Splits on Unicode whitespace, returning `(start, end)` byte spans.
pub fn whitespace_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                spans.push((s, i));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push((s, text.len()));
    }
    spans
}

/// An in-process model that scores whole texts.
pub trait LanguageModel {
    fn info(&self) -> BackendInfo;

    fn score_text(&self, text: &str) -> Result<Vec<WireToken>, String>;
}

/// Adapts a [`LanguageModel`] to the [`Backend`] interface without a
/// child process.
#[derive(Debug, Clone)]
pub struct LocalBackend<M> {
    model: M,
}

impl<M: LanguageModel> LocalBackend<M> {
    pub fn new(model: M) -> Self {
        Self { model }
    }

    pub fn model(&self) -> &M {
        &self.model
    }
}

impl<M: LanguageModel> Backend for LocalBackend<M> {
    fn handshake(&mut self) -> Result<BackendInfo, BackendError> {
        Ok(self.model.info())
    }

    fn score_raw(&mut self, request: &ScoreRequest) -> Result<Vec<WireToken>, BackendError> {
        check_request(request)?;
        self.model
            .score_text(&request.text)
            .map_err(|message| BackendError::Reported {
                id: request.id.clone(),
                message,
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(text: &str) -> ScoreRequest {
        ScoreRequest::new("r", text)
    }

    #[test]
    fn accepts_covering_tokens() {
        let toks = vec![
            WireToken::with_offsets("ab", 0, 2, 1.0),
            WireToken::with_offsets("c", 3, 4, 0.5),
        ];
        let seq = check_scores(&req("ab c"), &toks).unwrap();
        assert_eq!(seq.tokens.len(), 2);
        assert_eq!(seq.tokens[1].start, 3);
    }

    #[test]
    fn detects_coverage_gap() {
        let toks = vec![WireToken::with_offsets("ab", 0, 2, 1.0)];
        match check_scores(&req("ab c"), &toks) {
            Err(BackendError::CoverageGap { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("{other:?}"),
        }
        let toks = vec![WireToken::with_offsets("c", 3, 4, 1.0)];
        match check_scores(&req("ab c"), &toks) {
            Err(BackendError::CoverageGap { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_spans() {
        let text = "ab c";
        let cases = [
            vec![WireToken::with_offsets("ab", 0, 2, -1.0)],
            vec![WireToken::with_offsets("ab", 0, 2, f64::NAN)],
            vec![WireToken::with_offsets("xx", 0, 2, 1.0)],
            vec![WireToken::with_offsets("", 1, 1, 1.0)],
            vec![
                WireToken::with_offsets("ab", 0, 2, 1.0),
                WireToken::with_offsets("b c", 1, 4, 1.0),
            ],
            vec![WireToken::with_offsets("ab c?", 0, 5, 1.0)],
            vec![WireToken::without_offsets("ab", 1.0)],
        ];
        for toks in cases {
            assert!(
                matches!(
                    check_scores(&req(text), &toks),
                    Err(BackendError::ProtocolViolation { .. })
                ),
                "{toks:?}"
            );
        }
    }

    #[test]
    fn empty_text_rejected_client_side() {
        let mut backend = LocalBackend::new(UniformModel::new(4));
        let err = backend.score(&[req("")]).unwrap_err();
        assert!(matches!(err, BackendError::ProtocolViolation { .. }));
    }

    #[test]
    fn whitespace_spans_cover_words() {
        assert_eq!(whitespace_spans("a  bc d"), vec![(0, 1), (3, 5), (6, 7)]);
        assert_eq!(whitespace_spans("  "), vec![]);
        assert_eq!(whitespace_spans("café au"), vec![(0, 5), (6, 8)]);
    }
}
