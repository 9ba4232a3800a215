use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use discourse_probe::commands::{
    cmd_generate, cmd_report, cmd_run, cmd_serve, cmd_validate, CommandError, ReportFormat,
    RunConfig, ServeModel, BACKEND_ENV,
};
use discourse_probe::generate::{GenerateOptions, GeneratorKind, WinogradScope};

#[derive(Parser)]
#[command(name = "discourse-probe", version, about = "Targeted coherence evaluation for language models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a suite file and print its shape.
    Validate { suite: PathBuf },
    /// Build a suite from JSON-lines records.
    Generate {
        /// shuffle-all, shuffle-context, story-cloze, winograd, coreference,
        /// connectives or speaker-commitment
        kind: GeneratorKind,
        #[arg(long)]
        records: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Winograd variant: full or partial.
        #[arg(long, default_value = "full")]
        scope: WinogradScope,
        /// Suite name (defaults to the phenomenon).
        #[arg(long)]
        name: Option<String>,
    },
    /// Score suites with a backend process and write CD reports.
    Run {
        suites: Vec<PathBuf>,
        /// JSON config file; flags override its values.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Backend command line.
        #[arg(long, env = BACKEND_ENV)]
        backend: Option<String>,
        /// Number of backend processes.
        #[arg(long, short = 'j')]
        parallelism: Option<usize>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Output formats, comma separated: json, markdown.
        #[arg(long, value_delimiter = ',')]
        formats: Option<Vec<ReportFormat>>,
        /// Per-request timeout in seconds.
        #[arg(long)]
        timeout: Option<f64>,
    },
    /// Render tables over result files or directories.
    Report {
        results: Vec<PathBuf>,
        #[arg(long, default_value = "markdown")]
        format: ReportFormat,
    },
    /// Expose a reference model over the stdio protocol.
    Serve {
        #[command(subcommand)]
        model: ServeCommand,
    },
}

#[derive(Subcommand)]
enum ServeCommand {
    /// Every token costs log2(vocab-size) bits.
    Uniform {
        #[arg(long, default_value_t = 50_000)]
        vocab_size: u64,
    },
    /// Add-one smoothed bigram over whitespace tokens.
    Bigram {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Canned responses from a fixture file.
    Scripted {
        #[arg(long)]
        fixture: PathBuf,
    },
}

fn execute(command: Command) -> Result<Option<String>, CommandError> {
    match command {
        Command::Validate { suite } => cmd_validate(&suite).map(Some),
        Command::Generate {
            kind,
            records,
            out,
            seed,
            scope,
            name,
        } => {
            let options = GenerateOptions {
                seed,
                winograd_scope: scope,
                name,
            };
            cmd_generate(kind, &records, &out, &options).map(Some)
        }
        Command::Run {
            suites,
            config,
            backend,
            parallelism,
            out_dir,
            formats,
            timeout,
        } => {
            let mut cfg = match config {
                Some(path) => RunConfig::from_json_file(&path)?,
                None => RunConfig::default(),
            };
            if !suites.is_empty() {
                cfg.suites = suites;
            }
            if backend.is_some() {
                cfg.backend = backend;
            }
            if let Some(p) = parallelism {
                cfg.parallelism = p;
            }
            if let Some(d) = out_dir {
                cfg.out_dir = d;
            }
            if let Some(f) = formats {
                cfg.formats = f;
            }
            if let Some(t) = timeout {
                cfg.timeout_secs = t;
            }
            cmd_run(&cfg).map(Some)
        }
        Command::Report { results, format } => cmd_report(&results, format).map(Some),
        Command::Serve { model } => {
            let model = match model {
                ServeCommand::Uniform { vocab_size } => ServeModel::Uniform { vocab_size },
                ServeCommand::Bigram { corpus } => ServeModel::Bigram { corpus },
                ServeCommand::Scripted { fixture } => ServeModel::Scripted { fixture },
            };
            cmd_serve(&model).map(|()| None)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(Some(out)) => {
            println!("{out}");
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
