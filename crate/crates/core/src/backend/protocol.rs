//! Newline-delimited JSON messages exchanged with scoring backends.
//!
//! ```text
//! -> {"type":"info"}
//! <- {"type":"info","backend_name":"ref-bigram","supports_separator":false,"separator_literal":"[SEP]"}
//! -> {"type":"score","id":"1/original","text":"a b"}
//! <- {"type":"scores","id":"1/original","tokens":[{"text":"a","start":0,"end":1,"surprisal_bits":1.0}, ...]}
//! <- {"type":"error","id":"1/original","message":"..."}
//! ```

use serde::{Deserialize, Serialize};

use crate::suite::SEPARATOR_LITERAL;

fn default_separator() -> String {
    SEPARATOR_LITERAL.to_string()
}

/// Metadata a backend reports during the handshake.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendInfo {
    pub backend_name: String,
    pub supports_separator: bool,
    #[serde(default = "default_separator")]
    pub separator_literal: String,
    /// Subword marker prefix stripped by the greedy aligner, e.g. `Ġ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_marker: Option<String>,
    /// How the backend conditions the first token of a sequence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_token_context: Option<String>,
}

impl BackendInfo {
    pub fn new(name: impl Into<String>, supports_separator: bool) -> Self {
        Self {
            backend_name: name.into(),
            supports_separator,
            separator_literal: default_separator(),
            token_marker: None,
            first_token_context: None,
        }
    }
}

/// A token as sent on the wire. Offsets are optional so that backends
/// without offset tracking can still be aligned greedily.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireToken {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<usize>,
    pub surprisal_bits: f64,
}

impl WireToken {
    pub fn with_offsets(text: impl Into<String>, start: usize, end: usize, bits: f64) -> Self {
        Self {
            text: text.into(),
            start: Some(start),
            end: Some(end),
            surprisal_bits: bits,
        }
    }

    pub fn without_offsets(text: impl Into<String>, bits: f64) -> Self {
        Self {
            text: text.into(),
            start: None,
            end: None,
            surprisal_bits: bits,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Request {
    Info,
    Score { id: String, text: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Response {
    Info(BackendInfo),
    Scores {
        id: String,
        tokens: Vec<WireToken>,
    },
    Error {
        id: Option<String>,
        message: String,
    },
}

pub fn encode_line<T: Serialize>(msg: &T) -> String {
    let mut line = serde_json::to_string(msg).expect("protocol messages always serialize");
    line.push('\n');
    line
}
