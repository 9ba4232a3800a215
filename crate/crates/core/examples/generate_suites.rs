//! Turn JSON-lines corpora into the coherence suites.
//!
//! ```text
//! cargo run --example generate_suites -- crates/core/tests/fixtures
//! ```

use std::path::PathBuf;

use discourse_probe::generate::{generate_from_jsonl, GenerateOptions, GeneratorKind, WinogradScope};
use discourse_probe::serialize_suite;

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures"));
    let jobs = [
        (GeneratorKind::ShuffleAll, "discourse.jsonl", WinogradScope::Full),
        (GeneratorKind::ShuffleContext, "discourse.jsonl", WinogradScope::Full),
        (GeneratorKind::StoryCloze, "stories.jsonl", WinogradScope::Full),
        (GeneratorKind::Winograd, "winograd.jsonl", WinogradScope::Full),
        (GeneratorKind::Winograd, "winograd.jsonl", WinogradScope::Partial),
        (GeneratorKind::Coreference, "coreference.jsonl", WinogradScope::Full),
        (GeneratorKind::Connectives, "connectives.jsonl", WinogradScope::Full),
        (GeneratorKind::SpeakerCommitment, "nli_pairs.jsonl", WinogradScope::Full),
    ];
    for (kind, file, scope) in jobs {
        let records = std::fs::read_to_string(dir.join(file)).expect("fixture readable");
        let options = GenerateOptions {
            seed: 7,
            winograd_scope: scope,
            name: None,
        };
        let g = generate_from_jsonl(kind, &records, &options).unwrap();
        println!(
            "{:<20} {:<18} items={:<4} skipped={:<2} prediction={}",
            kind.as_str(),
            g.suite.name,
            g.suite.items.len(),
            g.skipped.len(),
            g.suite.predictions[0]
        );
        for s in &g.skipped {
            println!("    record {}: {}", s.record, s.reason);
        }
        if kind == GeneratorKind::ShuffleContext {
            let item = &g.suite.items[0];
            for c in &item.conditions {
                println!("    {:>9}: {}", c.condition_name, c.regions[0].content);
            }
        }
        let _ = serialize_suite(&g.suite);
    }
}
