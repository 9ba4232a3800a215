//! Corpus records, one JSON object per line.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoryRecord {
    pub sentences: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distractor_ending: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialogueRecord {
    pub turns: Vec<String>,
}

/// Input to the shuffle generators: a story or a dialogue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DiscourseRecord {
    Story(StoryRecord),
    Dialogue(DialogueRecord),
}

impl DiscourseRecord {
    pub fn units(&self) -> &[String] {
        match self {
            DiscourseRecord::Story(s) => &s.sentences,
            DiscourseRecord::Dialogue(d) => &d.turns,
        }
    }

    pub fn genre(&self) -> &'static str {
        match self {
            DiscourseRecord::Story(_) => "narration",
            DiscourseRecord::Dialogue(_) => "dialogue",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WinogradRecord {
    pub prefix: String,
    pub target_referent: String,
    pub distractor_referent: String,
    pub suffix: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorefGenre {
    Wsj,
    Vpc,
    Dialogue,
    Fiction,
}

impl CorefGenre {
    pub fn as_str(self) -> &'static str {
        match self {
            CorefGenre::Wsj => "wsj",
            CorefGenre::Vpc => "vpc",
            CorefGenre::Dialogue => "dialogue",
            CorefGenre::Fiction => "fiction",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorefRecord {
    pub context: String,
    pub continuation: String,
    /// Byte range `[start, end)` of the pronoun in `continuation`.
    pub pronoun_span: (usize, usize),
    pub antecedent_np: String,
    pub genre: CorefGenre,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectiveRecord {
    pub pre_text: String,
    pub connective: String,
    pub sense: String,
    pub post_text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NliLabel {
    Contradiction,
    Entailment,
    Neutral,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NliPairRecord {
    pub sentence_1: String,
    pub sentence_2: String,
    pub label: NliLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct IngestError {
    pub line: usize,
    pub message: String,
}

/// Parses JSON-lines text. Blank lines are skipped; line numbers in errors
/// are 1-based.
pub fn read_records<T: DeserializeOwned>(text: &str) -> Result<Vec<T>, IngestError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| IngestError {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_mixed_discourse_records() {
        let text = "{\"sentences\": [\"a\", \"b\", \"c\"]}\n\n{\"turns\": [\"x\", \"y\", \"z\"]}\n";
        let recs: Vec<DiscourseRecord> = read_records(text).unwrap();
        assert_eq!(recs[0].genre(), "narration");
        assert_eq!(recs[1].genre(), "dialogue");
        assert_eq!(recs[1].units().len(), 3);
    }

    #[test]
    fn reports_line_numbers() {
        let text = "{\"turns\": [\"x\"]}\n{\"turns\": [\"x\"]}\nnot json\n";
        let err = read_records::<DiscourseRecord>(text).unwrap_err();
        assert_eq!(err.line, 3);
    }

    #[test]
    fn coref_span_is_a_pair() {
        let rec: CorefRecord = serde_json::from_str(
            r#"{"context":"c","continuation":"see him","pronoun_span":[4,7],"antecedent_np":"a man","genre":"wsj"}"#,
        )
        .unwrap();
        assert_eq!(rec.pronoun_span, (4, 7));
    }
}
