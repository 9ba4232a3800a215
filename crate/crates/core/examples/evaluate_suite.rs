//! Score a suite with in-process backends and print the CD report.

use discourse_probe::backend::{train_reference_bigram, UniformModel};
use discourse_probe::generate::{generate_from_jsonl, GenerateOptions, GeneratorKind};
use discourse_probe::{cd_score, evaluate_suite, LocalBackend};

fn main() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let records = std::fs::read_to_string(dir.join("stories.jsonl")).unwrap();
    let suite = generate_from_jsonl(GeneratorKind::StoryCloze, &records, &GenerateOptions::default())
        .unwrap()
        .suite;

    // A uniform model cannot tell the endings apart: every item ties.
    let mut uniform = vec![LocalBackend::new(UniformModel::new(50_000))];
    let report = evaluate_suite(&suite, &mut uniform).unwrap();
    let p = &report.predictions[0];
    println!("{}: accuracy={:?} ties={}/{}", report.backend_name, p.accuracy, p.tally.tie_count, p.item_count);

    // A bigram trained on the original stories, sharded over three copies.
    let corpus: Vec<String> = records
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .flat_map(|v| {
            v["sentences"]
                .as_array()
                .unwrap()
                .iter()
                .map(|s| s.as_str().unwrap().to_string())
                .collect::<Vec<_>>()
        })
        .collect();
    let model = train_reference_bigram(&corpus).unwrap();
    let mut shards: Vec<_> = (0..3).map(|_| LocalBackend::new(model.clone())).collect();
    let report = evaluate_suite(&suite, &mut shards).unwrap();
    println!(
        "{}: CD score {:.3} on {} items",
        report.backend_name,
        cd_score(&report.items, 0).unwrap(),
        report.items.len()
    );
    let first = &report.items[0];
    for (condition, regions) in &first.regions {
        for (r, stats) in regions {
            println!("  item 1 {condition:>17} region {r}: {} tokens, mean {:?}", stats.token_count, stats.mean_bits);
        }
    }
}
