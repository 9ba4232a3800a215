use super::records::ConnectiveRecord;
use super::{check_text, finish, formula, item, region_meta, tags, GenerateError, Generated};
use crate::suite::{Condition, Phenomenon};

/// Connectives that can be exchanged for one another, in column order.
pub const CONNECTIVES: [&str; 7] = ["although", "as", "however", "since", "though", "while", "yet"];

fn capitalize_like(original: &str, word: &str) -> String {
    if original.starts_with(|c: char| c.is_uppercase()) {
        let mut chars = word.chars();
        match chars.next() {
            Some(first) => first.to_uppercase().chain(chars).collect(),
            None => String::new(),
        }
    } else {
        word.to_string()
    }
}

/// Six items per record, one per substitute connective. Region 1 is the
/// text before the connective, region 2 the connective, region 3 the rest.
pub fn gen_connectives(records: &[ConnectiveRecord]) -> Result<Generated, GenerateError> {
    let mut items = Vec::new();
    for (index, r) in records.iter().enumerate() {
        check_text(index, "pre_text", &r.pre_text)?;
        check_text(index, "post_text", &r.post_text)?;
        check_text(index, "sense", &r.sense)?;
        let original = r.connective.trim();
        let lowered = original.to_lowercase();
        if !CONNECTIVES.contains(&lowered.as_str()) {
            return Err(GenerateError::UnknownConnective {
                record: index,
                connective: r.connective.clone(),
            });
        }
        for substitute in CONNECTIVES.iter().filter(|&&c| c != lowered) {
            let replaced = capitalize_like(original, substitute);
            items.push(item(
                items.len() as u32 + 1,
                tags([("sense", r.sense.as_str()), ("substitute", substitute)]),
                vec![
                    Condition::from_contents(
                        "original",
                        [r.pre_text.as_str(), original, r.post_text.as_str()],
                    ),
                    Condition::from_contents(
                        "manipulated",
                        [r.pre_text.as_str(), replaced.as_str(), r.post_text.as_str()],
                    ),
                ],
            ));
        }
    }
    finish(
        Phenomenon::Connectives,
        region_meta(&["context", "connective", "continuation"]),
        vec![formula("mean(3;manipulated) > mean(3;original)")],
        items,
        Vec::new(),
    )
}
