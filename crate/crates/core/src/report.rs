//! Markdown tables over one or more result files.
//!
//! Results are grouped by phenomenon into the usual tables: shuffling
//! (`N_all`, `N_context`, `D_all`, `D_context`), story cloze and Winograd,
//! coreference by genre, the connective sense × substitute grid (one per
//! backend), and speaker commitment. Rows are backends in order of first
//! appearance; the last row gives item counts.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::eval::{CdReport, Tally, RESULTS_VERSION};
use crate::generate::CONNECTIVES;
use crate::suite::Phenomenon;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("no results to report")]
    Empty,
    #[error("results version {found} is newer than supported version {supported}")]
    VersionMismatch { found: u32, supported: u32 },
}

pub fn check_versions(reports: &[CdReport]) -> Result<(), ReportError> {
    if reports.is_empty() {
        return Err(ReportError::Empty);
    }
    match reports.iter().find(|r| r.version > RESULTS_VERSION) {
        Some(r) => Err(ReportError::VersionMismatch {
            found: r.version,
            supported: RESULTS_VERSION,
        }),
        None => Ok(()),
    }
}

fn fmt_acc(acc: Option<f64>) -> String {
    acc.map_or_else(|| "n/a".to_string(), |a| format!("{a:.2}"))
}

type ColumnKey = (u8, String, u8);

/// Accuracy per (column, backend), plus item counts per column.
#[derive(Default)]
struct Table {
    columns: BTreeMap<ColumnKey, String>,
    cells: BTreeMap<(ColumnKey, String), Option<f64>>,
    counts: BTreeMap<ColumnKey, usize>,
    backends: Vec<String>,
}

impl Table {
    fn put(&mut self, key: ColumnKey, label: String, backend: &str, acc: Option<f64>, count: usize) {
        self.columns.insert(key.clone(), label);
        self.counts.insert(key.clone(), count);
        self.cells.insert((key, backend.to_string()), acc);
        if !self.backends.iter().any(|b| b == backend) {
            self.backends.push(backend.to_string());
        }
    }

    fn render(&self, out: &mut String) {
        let keys: Vec<&ColumnKey> = self.columns.keys().collect();
        out.push('|');
        out.push_str(" |");
        for k in &keys {
            let _ = write!(out, " {} |", self.columns[*k]);
        }
        out.push('\n');
        out.push_str("|---|");
        for _ in &keys {
            out.push_str("---:|");
        }
        out.push('\n');
        for b in &self.backends {
            let _ = write!(out, "| {b} |");
            for k in &keys {
                let cell = self
                    .cells
                    .get(&((*k).clone(), b.clone()))
                    .map_or_else(|| "".to_string(), |a| fmt_acc(*a));
                let _ = write!(out, " {cell} |");
            }
            out.push('\n');
        }
        out.push_str("| #items |");
        for k in &keys {
            let _ = write!(out, " {} |", self.counts[*k]);
        }
        out.push('\n');
    }
}

fn genre_rank(genre: &str, order: &[&str]) -> u8 {
    order
        .iter()
        .position(|g| *g == genre)
        .map_or(order.len() as u8, |p| p as u8)
}

fn shuffle_columns(table: &mut Table, r: &CdReport) {
    let (suffix, rank) = match r.phenomenon {
        Phenomenon::ShuffleAll => ("all", 0),
        _ => ("context", 1),
    };
    let pred = &r.predictions[0];
    match pred.groups.get("genre") {
        Some(groups) => {
            for (genre, stats) in groups {
                let prefix = match genre.as_str() {
                    "narration" => "N".to_string(),
                    "dialogue" => "D".to_string(),
                    other => other.to_string(),
                };
                let key = (genre_rank(genre, &["narration", "dialogue"]), genre.clone(), rank);
                table.put(key, format!("{prefix}_{suffix}"), &r.backend_name, stats.accuracy, stats.count);
            }
        }
        None => {
            let key = (u8::MAX, r.suite_name.clone(), rank);
            table.put(
                key,
                format!("{}_{suffix}", r.suite_name),
                &r.backend_name,
                pred.accuracy,
                pred.item_count,
            );
        }
    }
}

fn grouped_columns(table: &mut Table, r: &CdReport, key: &str, order: &[&str]) {
    let pred = &r.predictions[0];
    match pred.groups.get(key) {
        Some(groups) => {
            for (value, stats) in groups {
                let col = (genre_rank(value, order), value.clone(), 0);
                table.put(col, value.clone(), &r.backend_name, stats.accuracy, stats.count);
            }
        }
        None => table.put(
            (u8::MAX, r.suite_name.clone(), 0),
            r.suite_name.clone(),
            &r.backend_name,
            pred.accuracy,
            pred.item_count,
        ),
    }
}

fn connective_grid(r: &CdReport, out: &mut String) {
    let mut cells: BTreeMap<(String, String), Tally> = BTreeMap::new();
    let mut substitutes: Vec<String> = CONNECTIVES.iter().map(|c| c.to_string()).collect();
    for item in &r.items {
        let sense = item.tags.get("sense").cloned().unwrap_or_else(|| "(untagged)".into());
        let sub = item
            .tags
            .get("substitute")
            .cloned()
            .unwrap_or_else(|| "(untagged)".into());
        if !substitutes.contains(&sub) {
            substitutes.push(sub.clone());
        }
        cells.entry((sense, sub)).or_default().add(item.verdicts[0]);
    }
    let mut senses: Vec<&String> = cells.keys().map(|(s, _)| s).collect();
    senses.dedup();
    let _ = writeln!(out, "### {} ({})\n", r.suite_name, r.backend_name);
    out.push_str("| connective sense |");
    for s in &substitutes {
        let _ = write!(out, " {s} |");
    }
    out.push('\n');
    out.push_str("|---|");
    for _ in &substitutes {
        out.push_str("---:|");
    }
    out.push('\n');
    for sense in senses {
        let _ = write!(out, "| {sense} |");
        for sub in &substitutes {
            let cell = cells
                .get(&(sense.clone(), sub.clone()))
                .map_or_else(|| "--".to_string(), |t| fmt_acc(t.accuracy()));
            let _ = write!(out, " {cell} |");
        }
        out.push('\n');
    }
    out.push('\n');
}

/// Renders every table that has at least one matching result.
pub fn render_markdown(reports: &[CdReport]) -> Result<String, ReportError> {
    check_versions(reports)?;
    let mut out = String::new();

    let mut shuffle = Table::default();
    let mut endings = Table::default();
    let mut coref = Table::default();
    let mut commitment = Table::default();
    let mut custom = Table::default();
    let mut grids = Vec::new();

    for r in reports {
        match r.phenomenon {
            Phenomenon::ShuffleAll | Phenomenon::ShuffleContext => shuffle_columns(&mut shuffle, r),
            Phenomenon::StoryCloze | Phenomenon::WinogradFull | Phenomenon::WinogradPartial => {
                let (rank, label) = match r.phenomenon {
                    Phenomenon::StoryCloze => (0, "Story Cloze"),
                    Phenomenon::WinogradFull => (1, "Winograd full"),
                    _ => (2, "Winograd partial"),
                };
                let p = &r.predictions[0];
                endings.put((rank, String::new(), 0), label.into(), &r.backend_name, p.accuracy, p.item_count);
            }
            Phenomenon::Coreference => {
                grouped_columns(&mut coref, r, "genre", &["wsj", "vpc", "dialogue", "fiction"])
            }
            Phenomenon::SpeakerCommitment => {
                let p = &r.predictions[0];
                commitment.put(
                    (0, String::new(), 0),
                    "contradiction".into(),
                    &r.backend_name,
                    p.accuracy,
                    p.item_count,
                );
            }
            Phenomenon::Connectives => grids.push(r),
            Phenomenon::Custom => {
                for (i, p) in r.predictions.iter().enumerate() {
                    let label = if r.predictions.len() == 1 {
                        r.suite_name.clone()
                    } else {
                        format!("{} [{}]", r.suite_name, i + 1)
                    };
                    custom.put((0, r.suite_name.clone(), i as u8), label, &r.backend_name, p.accuracy, p.item_count);
                }
            }
        }
    }

    let sections = [
        ("Shuffling", &shuffle),
        ("Endings and pronoun resolution", &endings),
        ("Entity re-mention", &coref),
        ("Speaker commitment", &commitment),
        ("Custom", &custom),
    ];
    for (title, table) in sections {
        if table.columns.is_empty() {
            continue;
        }
        let _ = writeln!(out, "## {title}\n");
        table.render(&mut out);
        out.push('\n');
    }
    if !grids.is_empty() {
        out.push_str("## Explicit connectives\n\n");
        for r in grids {
            connective_grid(r, &mut out);
        }
    }
    Ok(out)
}

/// Verdict counts of one report as a single summary line.
pub fn summary_line(r: &CdReport) -> String {
    let mut s = format!("{} / {}:", r.suite_name, r.backend_name);
    for p in &r.predictions {
        let _ = write!(
            s,
            " [{}] accuracy={} met={} not_met={} ties={} undefined={}",
            p.formula,
            fmt_acc(p.accuracy),
            p.tally.met,
            p.tally.not_met,
            p.tally.tie_count,
            p.tally.undefined_count
        );
    }
    s
}
