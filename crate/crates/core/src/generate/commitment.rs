use std::collections::BTreeMap;

use super::records::{NliLabel, NliPairRecord};
use super::{check_text, finish, formula, item, region_meta, GenerateError, Generated};
use crate::suite::{Condition, Phenomenon, SEPARATOR_LITERAL};

/// Contradicting utterance pairs, with and without a speaker change marked
/// by the separator literal at the end of region 1.
pub fn gen_speaker_commitment(records: &[NliPairRecord]) -> Result<Generated, GenerateError> {
    let mut items = Vec::new();
    for (index, r) in records.iter().enumerate() {
        if r.label != NliLabel::Contradiction {
            return Err(GenerateError::NonContradictionLabel { record: index });
        }
        check_text(index, "sentence_1", &r.sentence_1)?;
        check_text(index, "sentence_2", &r.sentence_2)?;
        items.push(item(
            items.len() as u32 + 1,
            BTreeMap::new(),
            vec![
                Condition::from_contents(
                    "speaker_change",
                    [
                        format!("{} {SEPARATOR_LITERAL}", r.sentence_1),
                        r.sentence_2.clone(),
                    ],
                ),
                Condition::from_contents(
                    "same_speaker",
                    [r.sentence_1.as_str(), r.sentence_2.as_str()],
                ),
            ],
        ));
    }
    finish(
        Phenomenon::SpeakerCommitment,
        region_meta(&["first utterance", "second utterance"]),
        vec![formula("mean(2;same_speaker) > mean(2;speaker_change)")],
        items,
        Vec::new(),
    )
}
