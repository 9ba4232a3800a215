use std::collections::BTreeMap;

use super::records::{StoryRecord, WinogradRecord};
use super::{check_text, finish, formula, item, region_meta, GenerateError, Generated};
use crate::suite::{Condition, Phenomenon};

/// Context in region 1; the original or the distractor ending in region 2.
pub fn gen_story_cloze(records: &[StoryRecord]) -> Result<Generated, GenerateError> {
    let mut items = Vec::new();
    for (index, record) in records.iter().enumerate() {
        if record.sentences.len() < 2 {
            return Err(GenerateError::TooFewUnits {
                record: index,
                needed: 2,
                found: record.sentences.len(),
            });
        }
        for (i, s) in record.sentences.iter().enumerate() {
            check_text(index, &format!("sentence {}", i + 1), s)?;
        }
        let distractor = match record.distractor_ending.as_deref() {
            Some(d) if !d.trim().is_empty() => d,
            _ => return Err(GenerateError::MissingDistractor { record: index }),
        };
        check_text(index, "distractor ending", distractor)?;
        let (ending, context) = record.sentences.split_last().expect("at least two sentences");
        let context = context.join(" ");
        items.push(item(
            items.len() as u32 + 1,
            BTreeMap::new(),
            vec![
                Condition::from_contents("original_ending", [context.clone(), ending.clone()]),
                Condition::from_contents("distractor_ending", [context, distractor.to_string()]),
            ],
        ));
    }
    finish(
        Phenomenon::StoryCloze,
        region_meta(&["context", "ending"]),
        vec![formula("mean(2;distractor_ending) > mean(2;original_ending)")],
        items,
        Vec::new(),
    )
}

/// Which comparison a Winograd suite makes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WinogradScope {
    /// Mean surprisal over the whole sequence.
    Full,
    /// Mean surprisal of the continuation after the inserted referent.
    Partial,
}

impl std::str::FromStr for WinogradScope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(WinogradScope::Full),
            "partial" => Ok(WinogradScope::Partial),
            other => Err(format!("unknown scope {other:?}; expected full or partial")),
        }
    }
}

/// Prefix, inserted referent and continuation as three regions; the two
/// conditions differ only in region 2.
pub fn gen_winograd(
    records: &[WinogradRecord],
    scope: WinogradScope,
) -> Result<Generated, GenerateError> {
    let mut items = Vec::new();
    for (index, r) in records.iter().enumerate() {
        check_text(index, "prefix", &r.prefix)?;
        check_text(index, "target referent", &r.target_referent)?;
        check_text(index, "distractor referent", &r.distractor_referent)?;
        check_text(index, "suffix", &r.suffix)?;
        if r.target_referent == r.distractor_referent {
            return Err(GenerateError::InvalidRecord {
                record: index,
                reason: "target and distractor referents are identical".into(),
            });
        }
        let cond = |name: &str, referent: &str| {
            Condition::from_contents(name, [r.prefix.as_str(), referent, r.suffix.as_str()])
        };
        items.push(item(
            items.len() as u32 + 1,
            BTreeMap::new(),
            vec![
                cond("target", &r.target_referent),
                cond("distractor", &r.distractor_referent),
            ],
        ));
    }
    let (phenomenon, prediction) = match scope {
        WinogradScope::Full => (
            Phenomenon::WinogradFull,
            "mean(*;distractor) > mean(*;target)",
        ),
        WinogradScope::Partial => (
            Phenomenon::WinogradPartial,
            "mean(3;distractor) > mean(3;target)",
        ),
    };
    finish(
        phenomenon,
        region_meta(&["prefix", "referent", "continuation"]),
        vec![formula(prediction)],
        items,
        Vec::new(),
    )
}
