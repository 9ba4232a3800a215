//! Combine reports from several backends into markdown tables.

use discourse_probe::backend::{train_reference_bigram, UniformModel};
use discourse_probe::generate::{generate_from_jsonl, GenerateOptions, GeneratorKind};
use discourse_probe::report::render_markdown;
use discourse_probe::{evaluate_suite, LocalBackend};

fn main() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let discourse = std::fs::read_to_string(dir.join("discourse.jsonl")).unwrap();
    let connectives = std::fs::read_to_string(dir.join("connectives.jsonl")).unwrap();
    let options = GenerateOptions::default();
    let suites = [
        generate_from_jsonl(GeneratorKind::ShuffleAll, &discourse, &options).unwrap().suite,
        generate_from_jsonl(GeneratorKind::ShuffleContext, &discourse, &options).unwrap().suite,
        generate_from_jsonl(GeneratorKind::Connectives, &connectives, &options).unwrap().suite,
    ];
    let corpus: Vec<&str> = discourse.lines().collect();
    let bigram = train_reference_bigram(&corpus).unwrap();

    let mut reports = Vec::new();
    for suite in &suites {
        let mut b = vec![LocalBackend::new(bigram.clone())];
        reports.push(evaluate_suite(suite, &mut b).unwrap());
        let mut u = vec![LocalBackend::new(UniformModel::new(50_000))];
        reports.push(evaluate_suite(suite, &mut u).unwrap());
    }
    print!("{}", render_markdown(&reports).unwrap());
}
