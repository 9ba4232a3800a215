mod common;

use std::io::{BufRead, BufReader, Write};
use std::process::{Command, Stdio};
use std::time::Duration;

use discourse_probe::backend::{Backend, BackendError, SubprocessBackend};
use discourse_probe::backend::{ScoreRequest, ScoredSequence};

use common::{bin, fixture};

fn score_one(
    backend: &mut SubprocessBackend,
    id: &str,
    text: &str,
) -> Result<ScoredSequence, BackendError> {
    backend
        .score(&[ScoreRequest::new(id, text)])
        .map(|mut v| v.remove(0))
}

fn bigram_command() -> String {
    format!("{} serve bigram --corpus {}", bin(), fixture("bigram_corpus.txt").display())
}

#[test]
fn raw_wire_exchange() {
    let mut child = Command::new(bin())
        .args(["serve", "bigram", "--corpus"])
        .arg(fixture("bigram_corpus.txt"))
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stdin = child.stdin.take().unwrap();
    let mut out = BufReader::new(child.stdout.take().unwrap());
    let mut line = String::new();

    writeln!(stdin, r#"{{"type":"info"}}"#).unwrap();
    out.read_line(&mut line).unwrap();
    let info: serde_json::Value = serde_json::from_str(&line).unwrap();
    assert_eq!(info["type"], "info");
    assert_eq!(info["backend_name"], "ref-bigram");
    assert_eq!(info["supports_separator"], false);
    assert_eq!(info["first_token_context"], "<s>");

    line.clear();
    writeln!(stdin, r#"{{"type":"score","id":"q1","text":"a b"}}"#).unwrap();
    out.read_line(&mut line).unwrap();
    let scores: serde_json::Value = serde_json::from_str(&line).unwrap();
    assert_eq!(scores["type"], "scores");
    assert_eq!(scores["id"], "q1");
    let tokens = scores["tokens"].as_array().unwrap();
    assert_eq!(tokens.len(), 2);
    assert_eq!(tokens[1]["start"], 2);
    assert_eq!(tokens[1]["end"], 3);
    let bits = tokens[1]["surprisal_bits"].as_f64().unwrap();
    assert!((bits - -(3.0f64 / 5.0).log2()).abs() < 1e-12);

    line.clear();
    writeln!(stdin, "not json").unwrap();
    out.read_line(&mut line).unwrap();
    let err: serde_json::Value = serde_json::from_str(&line).unwrap();
    assert_eq!(err["type"], "error");
    assert!(err["id"].is_null());

    drop(stdin);
    assert!(child.wait().unwrap().success());
}

#[test]
fn subprocess_client_scores() {
    let mut backend = SubprocessBackend::spawn(&bigram_command(), Duration::from_secs(30)).unwrap();
    let info = backend.handshake().unwrap();
    assert_eq!(info.backend_name, "ref-bigram");
    let scored = score_one(&mut backend, "r1", "a b a b").unwrap();
    let bits: Vec<f64> = scored.tokens.iter().map(|t| t.surprisal_bits).collect();
    assert_eq!(bits.len(), 4);
    assert!((bits[0] - 1.0).abs() < 1e-9);
    assert!((bits[1] - 0.7369655941662061).abs() < 1e-9);
    // The second handshake is served from the cache.
    assert_eq!(backend.handshake().unwrap(), info);
}

#[test]
fn empty_request_is_refused_locally() {
    let mut backend = SubprocessBackend::spawn(&bigram_command(), Duration::from_secs(30)).unwrap();
    assert!(matches!(
        score_one(&mut backend, "r", ""),
        Err(BackendError::ProtocolViolation { .. })
    ));
}

#[test]
fn scripted_backend_reports_unknown_text() {
    let cmd = format!("{} serve scripted --fixture {}", bin(), fixture("agreement_scripted.json").display());
    let mut backend = SubprocessBackend::spawn(&cmd, Duration::from_secs(30)).unwrap();
    backend.handshake().unwrap();
    match score_one(&mut backend, "x", "never scripted") {
        Err(BackendError::Reported { id, .. }) => assert_eq!(id, "x"),
        other => panic!("unexpected {other:?}"),
    }
    let ok = score_one(&mut backend, "y", "the keys to the cabinet are on the table")
        .unwrap();
    assert_eq!(ok.tokens.len(), 9);
}

#[test]
fn missing_executable_fails_to_spawn() {
    assert!(matches!(
        SubprocessBackend::spawn("/nonexistent/bin --flag", Duration::from_secs(1)),
        Err(BackendError::Spawn { .. })
    ));
}
