mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use discourse_probe::eval::CdReport;

use common::{bin, fixture};

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env_remove("DISCOURSE_PROBE_BACKEND")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn serve_cmd(args: &str) -> String {
    format!("{} serve {args}", bin())
}

#[test]
fn validate_reports_shape() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("two.jsonl");
    let text = fs::read_to_string(fixture("winograd.jsonl")).unwrap();
    fs::write(&records, text.lines().take(2).collect::<Vec<_>>().join("\n")).unwrap();
    let suite = dir.path().join("two.json");
    let o = run(&["generate", "winograd", "--records", path(&records), "--out", path(&suite)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(&["validate", path(&suite)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "items=2 conditions=2 regions=3 predictions=1");
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(fixture("agreement_suite.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["items"][2]["conditions"][1]["regions"]
        .as_array_mut()
        .unwrap()
        .pop();
    let broken = dir.path().join("broken.json");
    fs::write(&broken, serde_json::to_string(&v).unwrap()).unwrap();
    let o = run(&["validate", path(&broken)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("item 3"), "{}", stderr(&o));

    let o = run(&["validate", path(&dir.path().join("missing.json"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn schema_errors_name_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(fixture("agreement_suite.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["items"][1]["conditions"][0]["regions"][0]["region_number"] = serde_json::json!("one");
    let broken = dir.path().join("broken.json");
    fs::write(&broken, serde_json::to_string(&v).unwrap()).unwrap();
    let o = run(&["validate", path(&broken)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("items[1].conditions[0].regions[0].region_number"), "{}", stderr(&o));
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = run(&[
            "generate",
            "shuffle-context",
            "--records",
            path(&fixture("discourse.jsonl")),
            "--seed",
            "7",
            "--out",
            path(out),
        ]);
        assert!(o.status.success());
        assert!(stdout(&o).starts_with("emitted=60 skipped=1"), "{}", stdout(&o));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let c = dir.path().join("c.json");
    run(&["generate", "shuffle-context", "--records", path(&fixture("discourse.jsonl")), "--seed", "8", "--out", path(&c)]);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn generate_reports_bad_line() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("bad.jsonl");
    let mut lines: Vec<String> = fs::read_to_string(fixture("stories.jsonl"))
        .unwrap()
        .lines()
        .take(11)
        .map(String::from)
        .collect();
    lines.push("{\"sentences\": [".into());
    fs::write(&records, lines.join("\n")).unwrap();
    let o = run(&["generate", "story-cloze", "--records", path(&records), "--out", path(&dir.path().join("s.json"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 12"), "{}", stderr(&o));
}

#[test]
fn generate_rejects_unknown_kind() {
    let o = run(&["generate", "anagrams", "--records", "x", "--out", "y"]);
    assert!(!o.status.success());
}

fn read_report(p: &Path) -> CdReport {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn uniform_backend_ties_everything() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("shuffle.json");
    let o = run(&["generate", "shuffle-all", "--records", path(&fixture("discourse.jsonl")), "--out", path(&suite)]);
    assert!(o.status.success());
    let out = dir.path().join("out");
    let o = run(&[
        "run",
        path(&suite),
        "--backend",
        &serve_cmd("uniform --vocab-size 1000"),
        "--out-dir",
        path(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = read_report(&out.join("shuffle_all.ref-uniform.json"));
    let p = &report.predictions[0];
    assert_eq!(p.tally.tie_count, report.items.len());
    assert_eq!(p.accuracy, Some(0.0));
    assert!(out.join("shuffle_all.ref-uniform.md").exists());
}

#[test]
fn separator_suite_aborts_on_bigram() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("sc.json");
    let o = run(&["generate", "speaker-commitment", "--records", path(&fixture("nli_pairs.jsonl")), "--out", path(&suite)]);
    assert!(o.status.success());
    let out = dir.path().join("out");
    let o = run(&[
        "run",
        path(&suite),
        "--backend",
        &serve_cmd(&format!("bigram --corpus {}", path(&fixture("bigram_corpus.txt")))),
        "--out-dir",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("does not support the speaker separator"), "{}", stderr(&o));
    assert!(out.join("speaker_commitment.partial.json").exists());
    assert!(!out.join("speaker_commitment.ref-bigram.json").exists());
}

#[test]
fn scripted_suite_scores_three_of_four() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "run",
        path(&fixture("agreement_suite.json")),
        "--backend",
        &serve_cmd(&format!("scripted --fixture {}", path(&fixture("agreement_scripted.json")))),
        "--out-dir",
        path(dir.path()),
        "--formats",
        "json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("accuracy=0.75"));
    let report = read_report(&dir.path().join("agreement_attraction.scripted.json"));
    assert_eq!(report.predictions[0].accuracy, Some(0.75));
    assert_eq!(report.predictions[0].groups["attractor"]["singular"].accuracy, Some(0.5));
    assert!(!dir.path().join("agreement_attraction.scripted.md").exists());
}

#[test]
fn backend_from_environment_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    let out = dir.path().join("out");
    fs::write(
        &config,
        serde_json::json!({
            "suites": [fixture("agreement_suite.json")],
            "out_dir": out,
            "parallelism": 2,
            "formats": ["markdown"],
        })
        .to_string(),
    )
    .unwrap();
    let o = Command::new(bin())
        .args(["run", "--config", path(&config)])
        .env(
            "DISCOURSE_PROBE_BACKEND",
            serve_cmd(&format!("scripted --fixture {}", path(&fixture("agreement_scripted.json")))),
        )
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let md = fs::read_to_string(out.join("agreement_attraction.scripted.md")).unwrap();
    assert!(md.contains("| scripted | 0.75 |"));
}

#[test]
fn missing_backend_is_usage_error() {
    let o = run(&["run", path(&fixture("agreement_suite.json"))]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["run", path(&fixture("agreement_suite.json")), "--backend", "x", "-j", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn crashing_backend_leaves_partial_results() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "run",
        path(&fixture("agreement_suite.json")),
        "--backend",
        "/nonexistent/backend",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(2));

    // Fixture that only knows the first item's texts.
    let text = fs::read_to_string(fixture("agreement_scripted.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let responses = v["responses"].as_object_mut().unwrap();
    let keep: Vec<String> = responses.keys().filter(|k| k.starts_with("the keys")).cloned().collect();
    responses.retain(|k, _| keep.contains(k));
    let partial_fixture = dir.path().join("partial.json");
    fs::write(&partial_fixture, v.to_string()).unwrap();
    let o = run(&[
        "run",
        path(&fixture("agreement_suite.json")),
        "--backend",
        &serve_cmd(&format!("scripted --fixture {}", path(&partial_fixture))),
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let partial: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("agreement_attraction.partial.json")).unwrap())
            .unwrap();
    assert_eq!(partial["items"].as_array().unwrap().len(), 1);
    assert_eq!(partial["items"][0]["item_number"], 1);
}

#[test]
fn report_renders_tables() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("conn.json");
    run(&["generate", "connectives", "--records", path(&fixture("connectives.jsonl")), "--out", path(&suite)]);
    let out = dir.path().join("out");
    let o = run(&[
        "run",
        path(&suite),
        "--backend",
        &serve_cmd(&format!("bigram --corpus {}", path(&fixture("stories.jsonl")))),
        "--out-dir",
        path(&out),
        "--formats",
        "json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(&["report", path(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let md = stdout(&o);
    assert!(md.contains("| connective sense | although | as | however | since | though | while | yet |"));
    assert!(md.contains("| however_contrast | "), "{md}");
    let row = md.lines().find(|l| l.starts_with("| however_contrast |")).unwrap();
    assert_eq!(row.split('|').nth(4).unwrap().trim(), "--");

    let o = run(&["report", path(&out), "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["backend_name"], "ref-bigram");
}

#[test]
fn report_refuses_empty_and_newer_results() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["report", path(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no results"));

    let o = run(&[
        "run",
        path(&fixture("agreement_suite.json")),
        "--backend",
        &serve_cmd(&format!("scripted --fixture {}", path(&fixture("agreement_scripted.json")))),
        "--out-dir",
        path(dir.path()),
        "--formats",
        "json",
    ]);
    assert!(o.status.success());
    let file = dir.path().join("agreement_attraction.scripted.json");
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&file).unwrap()).unwrap();
    v["version"] = serde_json::json!(99);
    fs::write(&file, v.to_string()).unwrap();
    let o = run(&["report", path(&file)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("newer"), "{}", stderr(&o));
}
