use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::records::DiscourseRecord;
use super::{check_text, finish, formula, item, region_meta, tags, GenerateError, Generated, Skipped};
use crate::suite::{Condition, Phenomenon};

/// Draws after which a record whose units cannot be reordered is skipped.
pub const MAX_SHUFFLE_DRAWS: usize = 100;

const MIN_UNITS: usize = 3;

/// Per-record generator: the stream depends only on the seed and the record
/// index, so records can be processed in any order.
fn record_rng(seed: u64, record: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(record as u64);
    rng
}

/// Uniform permutation of `units` that differs from the input order, or
/// `None` if every draw reproduced it.
fn reorder(units: &[String], rng: &mut ChaCha8Rng) -> Option<Vec<String>> {
    let mut shuffled = units.to_vec();
    for _ in 0..MAX_SHUFFLE_DRAWS {
        shuffled.shuffle(rng);
        if shuffled.as_slice() != units {
            return Some(shuffled);
        }
    }
    None
}

fn checked_units(index: usize, record: &DiscourseRecord) -> Result<&[String], GenerateError> {
    let units = record.units();
    if units.len() < MIN_UNITS {
        return Err(GenerateError::TooFewUnits {
            record: index,
            needed: MIN_UNITS,
            found: units.len(),
        });
    }
    for (i, u) in units.iter().enumerate() {
        check_text(index, &format!("unit {}", i + 1), u)?;
    }
    Ok(units)
}

/// Every unit is a region; the shuffled condition reorders all of them.
pub fn gen_shuffle_all(records: &[DiscourseRecord], seed: u64) -> Result<Generated, GenerateError> {
    let mut items = Vec::new();
    let mut skipped = Vec::new();
    let mut max_units = 0;
    for (index, record) in records.iter().enumerate() {
        let units = checked_units(index, record)?;
        let Some(shuffled) = reorder(units, &mut record_rng(seed, index)) else {
            skipped.push(Skipped {
                record: index,
                reason: "units admit no distinct order".into(),
            });
            continue;
        };
        max_units = max_units.max(units.len());
        items.push(item(
            items.len() as u32 + 1,
            tags([("genre", record.genre())]),
            vec![
                Condition::from_contents("original", units.iter().cloned()),
                Condition::from_contents("shuffled", shuffled),
            ],
        ));
    }
    let labels: Vec<String> = (1..=max_units).map(|i| format!("unit {i}")).collect();
    let labels: Vec<&str> = labels.iter().map(String::as_str).collect();
    finish(
        Phenomenon::ShuffleAll,
        region_meta(&labels),
        vec![formula("mean(*;shuffled) > mean(*;original)")],
        items,
        skipped,
    )
}

/// Region 1 holds the context (all but the last unit), region 2 the final
/// unit, which is identical in both conditions.
pub fn gen_shuffle_context(
    records: &[DiscourseRecord],
    seed: u64,
) -> Result<Generated, GenerateError> {
    let mut items = Vec::new();
    let mut skipped = Vec::new();
    for (index, record) in records.iter().enumerate() {
        let units = checked_units(index, record)?;
        let (last, context) = units.split_last().expect("at least three units");
        let Some(shuffled) = reorder(context, &mut record_rng(seed, index)) else {
            skipped.push(Skipped {
                record: index,
                reason: "context admits no distinct order".into(),
            });
            continue;
        };
        items.push(item(
            items.len() as u32 + 1,
            tags([("genre", record.genre())]),
            vec![
                Condition::from_contents("original", [context.join(" "), last.clone()]),
                Condition::from_contents("shuffled", [shuffled.join(" "), last.clone()]),
            ],
        ));
    }
    finish(
        Phenomenon::ShuffleContext,
        region_meta(&["context", "final unit"]),
        vec![formula("mean(2;shuffled) > mean(2;original)")],
        items,
        skipped,
    )
}
