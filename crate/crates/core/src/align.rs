//! Assigning scored tokens to regions.
//!
//! A condition is materialized by joining its non-empty region contents with
//! a single ASCII space. Each token then belongs to the region in which it
//! starts; a token starting on a joining space belongs to the following
//! region. Empty regions are zero-width and never receive tokens.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::backend::{ScoredSequence, TokenScore, WireToken};
use crate::suite::Condition;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionSpan {
    pub region_number: u32,
    pub start: usize,
    pub end: usize,
}

impl RegionSpan {
    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaterializedCondition {
    pub condition_name: String,
    pub text: String,
    pub spans: Vec<RegionSpan>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignedCondition {
    pub condition_name: String,
    /// Every region of the condition, including ones without tokens.
    pub region_tokens: BTreeMap<u32, Vec<TokenScore>>,
}

impl AlignedCondition {
    pub fn token_count(&self) -> usize {
        self.region_tokens.values().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlignError {
    #[error("token {0} lies outside the condition text")]
    TokenOutOfBounds(usize),
    #[error("token text cannot be matched against the condition at byte {position}")]
    AlignmentMismatch { position: usize },
}

pub fn materialize(condition: &Condition) -> MaterializedCondition {
    let mut text = String::new();
    let mut spans = Vec::with_capacity(condition.regions.len());
    for region in &condition.regions {
        if region.content.is_empty() {
            let at = if text.is_empty() { 0 } else { text.len() + 1 };
            spans.push(RegionSpan {
                region_number: region.region_number,
                start: at,
                end: at,
            });
            continue;
        }
        if !text.is_empty() {
            text.push(' ');
        }
        let start = text.len();
        text.push_str(&region.content);
        spans.push(RegionSpan {
            region_number: region.region_number,
            start,
            end: text.len(),
        });
    }
    // Trailing empty regions sit at the end of the text.
    for span in &mut spans {
        span.start = span.start.min(text.len());
        span.end = span.end.min(text.len());
    }
    MaterializedCondition {
        condition_name: condition.condition_name.clone(),
        text,
        spans,
    }
}

/// Index into `spans` of the region owning byte `pos`, or `None` past the
/// last non-empty region.
fn owning_region(spans: &[RegionSpan], pos: usize) -> Option<usize> {
    spans.iter().position(|s| !s.is_empty() && pos < s.end)
}

fn empty_groups(spans: &[RegionSpan]) -> BTreeMap<u32, Vec<TokenScore>> {
    spans.iter().map(|s| (s.region_number, Vec::new())).collect()
}

/// Offset-based alignment: each token goes to the region containing its
/// start byte.
pub fn align(
    materialized: &MaterializedCondition,
    scored: &ScoredSequence,
) -> Result<AlignedCondition, AlignError> {
    let mut groups = empty_groups(&materialized.spans);
    let len = materialized.text.len();
    for (i, tok) in scored.tokens.iter().enumerate() {
        if tok.start >= len || tok.end > len {
            return Err(AlignError::TokenOutOfBounds(i));
        }
        let idx = owning_region(&materialized.spans, tok.start).ok_or(AlignError::TokenOutOfBounds(i))?;
        groups
            .get_mut(&materialized.spans[idx].region_number)
            .expect("every span has a group")
            .push(tok.clone());
    }
    Ok(AlignedCondition {
        condition_name: materialized.condition_name.clone(),
        region_tokens: groups,
    })
}

/// Greedy alignment for tokens without offsets.
///
/// Tokens are consumed left to right against the condition text, skipping
/// whitespace on both sides. A token that runs past the end of a region
/// stays with the region where it started. `marker` is a subword prefix
/// (such as `Ġ` or `▁`) removed before matching.
///
/// Returned tokens carry the byte range they consumed; for tokens that
/// cross a joining space or had a marker stripped, `text` keeps the
/// backend's original spelling.
pub fn align_greedy_fallback(
    condition: &Condition,
    tokens: &[WireToken],
    marker: Option<&str>,
) -> Result<AlignedCondition, AlignError> {
    let materialized = materialize(condition);
    let text = materialized.text.as_str();
    let spans = &materialized.spans;
    let mut groups = empty_groups(spans);
    let mut pos = 0usize;
    let mut last_region: Option<usize> = None;

    let skip_ws = |mut p: usize| -> usize {
        while let Some(c) = text[p..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            p += c.len_utf8();
        }
        p
    };

    for tok in tokens {
        let mut piece = tok.text.as_str();
        if let Some(m) = marker.filter(|m| !m.is_empty()) {
            piece = piece.strip_prefix(m).unwrap_or(piece);
        }
        let mut start = None;
        for ch in piece.chars().filter(|c| !c.is_whitespace()) {
            pos = skip_ws(pos);
            match text[pos..].chars().next() {
                Some(c) if c == ch => {
                    start.get_or_insert(pos);
                    pos += c.len_utf8();
                }
                _ => return Err(AlignError::AlignmentMismatch { position: pos }),
            }
        }
        let (span_start, span_end, region) = match start {
            Some(s) => (s, pos, owning_region(spans, s)),
            None => {
                // Whitespace-only or marker-only token: attach to whatever
                // comes next, or to the last region seen.
                let next = skip_ws(pos);
                let region = owning_region(spans, next).or(last_region);
                (pos, pos, region)
            }
        };
        let region = region
            .or_else(|| spans.iter().position(|s| !s.is_empty()))
            .unwrap_or(0);
        last_region = Some(region);
        if let Some(span) = spans.get(region) {
            groups
                .get_mut(&span.region_number)
                .expect("every span has a group")
                .push(TokenScore {
                    text: tok.text.clone(),
                    start: span_start,
                    end: span_end,
                    surprisal_bits: tok.surprisal_bits,
                });
        }
    }
    let rest = skip_ws(pos);
    if rest < text.len() {
        return Err(AlignError::AlignmentMismatch { position: rest });
    }
    Ok(AlignedCondition {
        condition_name: materialized.condition_name,
        region_tokens: groups,
    })
}
