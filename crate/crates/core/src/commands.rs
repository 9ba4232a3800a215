//! Operations behind the `discourse-probe` command-line tool.
//!
//! Each command returns the text to print on success or a [`CommandError`]
//! carrying a stable exit code: 1 for validation or evaluation failures,
//! 2 for I/O, usage and backend protocol failures.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{
    serve, train_reference_bigram, LanguageModel, ScriptedModel, SubprocessBackend, UniformModel,
};
use crate::engine::{evaluate_suite, RunError, RunErrorKind};
use crate::eval::{CdReport, RESULTS_VERSION};
use crate::generate::{generate_from_jsonl, GenerateFailure, GenerateOptions, GeneratorKind};
use crate::report::{check_versions, render_markdown, summary_line, ReportError};
use crate::suite::{parse_suite, serialize_suite, TestSuite};

/// Environment variable naming the default backend command.
pub const BACKEND_ENV: &str = "DISCOURSE_PROBE_BACKEND";

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Evaluation(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Protocol(String),
    #[error("{0}")]
    Usage(String),
}

impl CommandError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CommandError::Validation(_) | CommandError::Evaluation(_) => 1,
            CommandError::Io(_) | CommandError::Protocol(_) | CommandError::Usage(_) => 2,
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CommandError {
    CommandError::Io(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, CommandError> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn write(path: &Path, contents: &str) -> Result<(), CommandError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

pub fn load_suite(path: &Path) -> Result<TestSuite, CommandError> {
    let text = read(path)?;
    parse_suite(&text).map_err(|e| CommandError::Validation(format!("{}: {e}", path.display())))
}

/// `validate`: summary line for a valid suite.
pub fn cmd_validate(path: &Path) -> Result<String, CommandError> {
    let suite = load_suite(path)?;
    Ok(format!(
        "items={} conditions={} regions={} predictions={}",
        suite.items.len(),
        suite.condition_names().len(),
        suite.max_regions(),
        suite.predictions.len()
    ))
}

/// `generate <kind>`: writes the canonical suite and reports record counts.
pub fn cmd_generate(
    kind: GeneratorKind,
    records: &Path,
    out: &Path,
    options: &GenerateOptions,
) -> Result<String, CommandError> {
    let text = read(records)?;
    let generated = generate_from_jsonl(kind, &text, options).map_err(|e| match e {
        GenerateFailure::Ingest(e) => {
            CommandError::Validation(format!("{}: {e}", records.display()))
        }
        GenerateFailure::Generate(e) => CommandError::Validation(format!("{kind}: {e}")),
    })?;
    write(out, &serialize_suite(&generated.suite))?;
    let total = text.lines().filter(|l| !l.trim().is_empty()).count();
    let mut msg = format!(
        "emitted={} skipped={}",
        total - generated.skipped.len(),
        generated.skipped.len()
    );
    for s in &generated.skipped {
        msg.push_str(&format!("\nskipped record {}: {}", s.record + 1, s.reason));
    }
    Ok(msg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(format!("unknown format {other:?}; expected json or markdown")),
        }
    }
}

fn default_parallelism() -> usize {
    1
}

fn default_formats() -> Vec<ReportFormat> {
    vec![ReportFormat::Json, ReportFormat::Markdown]
}

fn default_timeout() -> f64 {
    120.0
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("results")
}

/// Settings for `run`, loadable from a JSON file and overridable by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub suites: Vec<PathBuf>,
    /// Backend command line, split with shell quoting rules.
    #[serde(default)]
    pub backend: Option<String>,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<ReportFormat>,
    /// Only used by generators; accepted here so one file can drive both.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            suites: Vec::new(),
            backend: None,
            parallelism: default_parallelism(),
            out_dir: default_out_dir(),
            formats: default_formats(),
            seed: None,
            timeout_secs: default_timeout(),
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self, CommandError> {
        let text = read(path)?;
        serde_json::from_str(&text)
            .map_err(|e| CommandError::Usage(format!("{}: invalid config: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CommandError> {
        if self.parallelism == 0 {
            return Err(CommandError::Usage("parallelism must be at least 1".into()));
        }
        if self.formats.is_empty() {
            return Err(CommandError::Usage("at least one report format is required".into()));
        }
        if self.suites.is_empty() {
            return Err(CommandError::Usage("no suites given".into()));
        }
        if self.backend.as_deref().is_none_or(|b| b.trim().is_empty()) {
            return Err(CommandError::Usage(format!(
                "no backend command given (use --backend or {BACKEND_ENV})"
            )));
        }
        if !(self.timeout_secs.is_finite() && self.timeout_secs > 0.0) {
            return Err(CommandError::Usage("timeout must be positive".into()));
        }
        Ok(())
    }
}

/// File-name-safe version of a suite or backend name.
pub fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect()
}

fn run_error(path: &Path, err: &RunError) -> CommandError {
    let msg = format!("{}: {err}", path.display());
    match &err.kind {
        RunErrorKind::Backend { .. }
        | RunErrorKind::Handshake(..)
        | RunErrorKind::MismatchedBackends(..)
        | RunErrorKind::NoBackends => CommandError::Protocol(msg),
        RunErrorKind::SeparatorUnsupported { .. }
        | RunErrorKind::Align { .. }
        | RunErrorKind::Eval { .. } => CommandError::Evaluation(msg),
    }
}

#[derive(Serialize)]
struct PartialResults<'a> {
    version: u32,
    suite_name: &'a str,
    error: String,
    items: &'a [crate::eval::ItemResult],
}

/// `run`: scores every suite and writes one report per suite.
pub fn cmd_run(config: &RunConfig) -> Result<String, CommandError> {
    config.validate()?;
    let command = config.backend.as_deref().expect("validated");
    let suites = config
        .suites
        .iter()
        .map(|p| load_suite(p).map(|s| (p, s)))
        .collect::<Result<Vec<_>, _>>()?;

    let timeout = Duration::from_secs_f64(config.timeout_secs);
    let mut backends = (0..config.parallelism)
        .map(|_| SubprocessBackend::spawn(command, timeout))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CommandError::Protocol(e.to_string()))?;

    let mut lines = Vec::new();
    for (path, suite) in suites {
        let report = match evaluate_suite(&suite, &mut backends) {
            Ok(r) => r,
            Err(err) => {
                let partial = PartialResults {
                    version: RESULTS_VERSION,
                    suite_name: &suite.name,
                    error: err.to_string(),
                    items: &err.partial,
                };
                let partial_path = config
                    .out_dir
                    .join(format!("{}.partial.json", file_stem(&suite.name)));
                let mut text = serde_json::to_string_pretty(&partial).expect("serializable");
                text.push('\n');
                write(&partial_path, &text)?;
                return Err(run_error(path, &err));
            }
        };
        let stem = format!("{}.{}", file_stem(&report.suite_name), file_stem(&report.backend_name));
        for format in &config.formats {
            match format {
                ReportFormat::Json => {
                    write(&config.out_dir.join(format!("{stem}.json")), &report.to_json())?
                }
                ReportFormat::Markdown => {
                    let md = render_markdown(std::slice::from_ref(&report))
                        .map_err(|e| CommandError::Evaluation(e.to_string()))?;
                    write(&config.out_dir.join(format!("{stem}.md")), &md)?
                }
            }
        }
        lines.push(summary_line(&report));
    }
    Ok(lines.join("\n"))
}

fn collect_result_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>, CommandError> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| io_err(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| {
                    f.extension().is_some_and(|x| x == "json")
                        && !f.to_string_lossy().ends_with(".partial.json")
                })
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

#[derive(Serialize)]
struct ReportSummary<'a> {
    suite_name: &'a str,
    phenomenon: crate::suite::Phenomenon,
    backend_name: &'a str,
    predictions: &'a [crate::eval::PredictionSummary],
}

/// `report`: renders tables over result files (or directories of them).
pub fn cmd_report(paths: &[PathBuf], format: ReportFormat) -> Result<String, CommandError> {
    let files = collect_result_files(paths)?;
    let mut reports = Vec::with_capacity(files.len());
    for f in &files {
        let text = read(f)?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CommandError::Validation(format!("{}: {e}", f.display())))?;
        if let Some(v) = value.get("version").and_then(|v| v.as_u64()) {
            if v > RESULTS_VERSION as u64 {
                return Err(CommandError::Validation(format!(
                    "{}: {}",
                    f.display(),
                    ReportError::VersionMismatch {
                        found: v as u32,
                        supported: RESULTS_VERSION
                    }
                )));
            }
        }
        let report: CdReport = serde_json::from_value(value)
            .map_err(|e| CommandError::Validation(format!("{}: not a results file: {e}", f.display())))?;
        reports.push(report);
    }
    check_versions(&reports).map_err(|e| CommandError::Validation(e.to_string()))?;
    match format {
        ReportFormat::Markdown => {
            render_markdown(&reports).map_err(|e| CommandError::Validation(e.to_string()))
        }
        ReportFormat::Json => {
            let summaries: Vec<ReportSummary> = reports
                .iter()
                .map(|r| ReportSummary {
                    suite_name: &r.suite_name,
                    phenomenon: r.phenomenon,
                    backend_name: &r.backend_name,
                    predictions: &r.predictions,
                })
                .collect();
            Ok(serde_json::to_string_pretty(&summaries).expect("serializable"))
        }
    }
}

/// Reference model to expose over stdio with `serve`.
#[derive(Debug, Clone, PartialEq)]
pub enum ServeModel {
    Uniform { vocab_size: u64 },
    /// Bigram trained on the non-empty lines of a corpus file.
    Bigram { corpus: PathBuf },
    Scripted { fixture: PathBuf },
}

pub fn load_model(model: &ServeModel) -> Result<Box<dyn LanguageModel>, CommandError> {
    Ok(match model {
        ServeModel::Uniform { vocab_size } => {
            if *vocab_size == 0 {
                return Err(CommandError::Usage("vocabulary size must be positive".into()));
            }
            Box::new(UniformModel::new(*vocab_size))
        }
        ServeModel::Bigram { corpus } => {
            let text = read(corpus)?;
            let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
            Box::new(
                train_reference_bigram(&lines)
                    .map_err(|e| CommandError::Usage(format!("{}: {e}", corpus.display())))?,
            )
        }
        ServeModel::Scripted { fixture } => {
            let text = read(fixture)?;
            Box::new(
                ScriptedModel::from_json(&text)
                    .map_err(|e| CommandError::Usage(format!("{}: {e}", fixture.display())))?,
            )
        }
    })
}

/// `serve`: answers protocol requests on stdin until end of input.
pub fn cmd_serve(model: &ServeModel) -> Result<(), CommandError> {
    let model = load_model(model)?;
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    serve(model.as_ref(), stdin.lock(), stdout.lock())
        .map_err(|e| CommandError::Io(format!("stdio: {e}")))
}
