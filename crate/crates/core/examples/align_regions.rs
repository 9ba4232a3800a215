//! Map backend tokens onto suite regions, with and without offsets.

use discourse_probe::backend::WireToken;
use discourse_probe::{align, align_greedy_fallback, materialize, Condition, ScoredSequence, TokenScore};

fn main() {
    let condition = Condition::from_contents(
        "target",
        ["The city councilmen refused the demonstrators a permit because", "the city councilmen", "feared violence."],
    );
    let m = materialize(&condition);
    println!("{:?}", m.text);
    for s in &m.spans {
        println!("  region {} = [{}..{}] {:?}", s.region_number, s.start, s.end, &m.text[s.start..s.end]);
    }

    // Subword tokens with byte offsets, as a tokenizer with offset mapping reports them.
    let pieces: Vec<(usize, usize)> = {
        let mut v = Vec::new();
        let mut at = 0;
        for w in m.text.split(' ') {
            if w.len() > 6 {
                v.push((at, at + 4));
                v.push((at + 4, at + w.len()));
            } else {
                v.push((at, at + w.len()));
            }
            at += w.len() + 1;
        }
        v
    };
    let tokens: Vec<TokenScore> = pieces
        .iter()
        .map(|&(s, e)| TokenScore {
            text: m.text[s..e].to_string(),
            start: s,
            end: e,
            surprisal_bits: (e - s) as f64,
        })
        .collect();
    let scored = ScoredSequence {
        request_id: "1/target".into(),
        tokens: tokens.clone(),
    };
    let by_offset = align(&m, &scored).unwrap();
    for (r, ts) in &by_offset.region_tokens {
        let texts: Vec<&str> = ts.iter().map(|t| t.text.as_str()).collect();
        println!("region {r}: {texts:?}");
    }

    // The same tokens without offsets, marked the way byte-level BPE marks word starts.
    let marked: Vec<WireToken> = tokens
        .iter()
        .map(|t| {
            let word_start = t.start == 0 || m.text.as_bytes()[t.start - 1] == b' ';
            let text = if word_start && t.start > 0 { format!("Ġ{}", t.text) } else { t.text.clone() };
            WireToken::without_offsets(text, t.surprisal_bits)
        })
        .collect();
    let greedy = align_greedy_fallback(&condition, &marked, Some("Ġ")).unwrap();
    let same = greedy.region_tokens.iter().all(|(r, ts)| ts.len() == by_offset.region_tokens[r].len());
    println!("greedy fallback agrees: {same}");
}
