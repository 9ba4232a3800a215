//! The built-in models: uniform, add-one bigram and scripted.

use std::collections::BTreeMap;

use discourse_probe::backend::reference::ScriptFixture;
use discourse_probe::backend::{
    train_reference_bigram, Backend, LanguageModel, ScoreRequest, ScriptedModel, UniformModel, WireToken,
};
use discourse_probe::LocalBackend;

fn main() {
    let uniform = UniformModel::new(1024);
    let tokens = uniform.score_text("every token costs the same").unwrap();
    println!("uniform: {} tokens at {} bits", tokens.len(), tokens[0].surprisal_bits);

    let bigram = train_reference_bigram(&["a b a b"]).unwrap();
    for t in bigram.score_text("a b a b").unwrap() {
        println!("bigram: {:>2} [{}..{}] {:.6} bits", t.text, t.start.unwrap(), t.end.unwrap(), t.surprisal_bits);
    }
    println!("unseen word after a: {:.6} bits", -bigram.probability(Some("a"), "z").log2());

    let fixture = ScriptFixture {
        backend_name: "scripted".into(),
        supports_separator: false,
        separator_literal: None,
        token_marker: None,
        responses: BTreeMap::from([(
            "hello world".to_string(),
            vec![
                WireToken::with_offsets("hello", 0, 5, 3.5),
                WireToken::with_offsets("world", 6, 11, 1.25),
            ],
        )]),
    };
    let mut backend = LocalBackend::new(ScriptedModel::new(fixture));
    let info = backend.handshake().unwrap();
    println!("scripted: {info:?}");
    let scored = backend.score(&[ScoreRequest::new("1", "hello world")]).unwrap();
    println!("scripted: {:?}", scored[0].tokens);
    println!("unscripted text: {}", backend.score(&[ScoreRequest::new("2", "bye")]).unwrap_err());
}
