use super::records::CorefRecord;
use super::{check_text, finish, formula, item, region_meta, tags, GenerateError, Generated, Skipped};
use crate::suite::{Condition, Phenomenon};

const PERSONAL: &[&str] = &[
    "i", "me", "you", "he", "him", "she", "her", "it", "we", "us", "they", "them",
];

// "her" is read as the object pronoun above.
const POSSESSIVE: &[&str] = &[
    "my", "mine", "your", "yours", "his", "hers", "its", "our", "ours", "their", "theirs",
];

/// Replaces a leading indefinite article with `the`, keeping the case of
/// the first letter. Anything else is returned unchanged.
pub fn definite_np(np: &str) -> String {
    for article in ["an ", "a "] {
        if np.len() > article.len() && np[..article.len()].eq_ignore_ascii_case(article) {
            let the = if np.starts_with(|c: char| c.is_uppercase()) {
                "The "
            } else {
                "the "
            };
            return format!("{the}{}", &np[article.len()..]);
        }
    }
    np.to_string()
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\''
}

enum SpanKind {
    Personal,
    Possessive,
}

fn classify_span(record: &CorefRecord, index: usize) -> Result<SpanKind, GenerateError> {
    let (start, end) = record.pronoun_span;
    let text = &record.continuation;
    let not_pronoun = || GenerateError::SpanNotPronoun {
        record: index,
        start,
        end,
    };
    if start >= end
        || end > text.len()
        || !text.is_char_boundary(start)
        || !text.is_char_boundary(end)
    {
        return Err(not_pronoun());
    }
    let before = text[..start].chars().next_back();
    let after = text[end..].chars().next();
    if before.is_some_and(is_word_char) || after.is_some_and(is_word_char) {
        return Err(not_pronoun());
    }
    let word = text[start..end].to_lowercase();
    if PERSONAL.contains(&word.as_str()) {
        Ok(SpanKind::Personal)
    } else if POSSESSIVE.contains(&word.as_str()) {
        Ok(SpanKind::Possessive)
    } else {
        Err(not_pronoun())
    }
}

/// Context in region 1; the continuation with the pronoun, or with the
/// pronoun replaced by the (definite) antecedent, in region 2. Records
/// whose span is a possessive pronoun are skipped.
pub fn gen_coreference(records: &[CorefRecord]) -> Result<Generated, GenerateError> {
    let mut items = Vec::new();
    let mut skipped = Vec::new();
    for (index, r) in records.iter().enumerate() {
        check_text(index, "context", &r.context)?;
        check_text(index, "continuation", &r.continuation)?;
        check_text(index, "antecedent", &r.antecedent_np)?;
        if let SpanKind::Possessive = classify_span(r, index)? {
            skipped.push(Skipped {
                record: index,
                reason: format!(
                    "possessive pronoun {:?}",
                    &r.continuation[r.pronoun_span.0..r.pronoun_span.1]
                ),
            });
            continue;
        }
        let (start, end) = r.pronoun_span;
        let repeated = format!(
            "{}{}{}",
            &r.continuation[..start],
            definite_np(r.antecedent_np.trim()),
            &r.continuation[end..]
        );
        items.push(item(
            items.len() as u32 + 1,
            tags([("genre", r.genre.as_str())]),
            vec![
                Condition::from_contents("pronoun", [r.context.as_str(), r.continuation.as_str()]),
                Condition::from_contents("repetition", [r.context.clone(), repeated]),
            ],
        ));
    }
    finish(
        Phenomenon::Coreference,
        region_meta(&["context", "continuation"]),
        vec![formula("mean(2;repetition) > mean(2;pronoun)")],
        items,
        skipped,
    )
}
