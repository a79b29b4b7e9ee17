//! Corpus mode: analyze a directory of MiniC files with and without
//! refutation and render the comparison as a table.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use refutelint_core::frontend::compile;
use refutelint_core::refute::refute_reports;
use refutelint_core::reports::{collect_reports, dedup, ReportStatus};
use refutelint_core::symexec::execute;
use serde::Serialize;

use crate::driver::{Format, Options};

#[derive(Clone, Debug, Serialize)]
pub struct CorpusRow {
    pub file: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub time_no_ref_s: f64,
    pub time_with_ref_s: f64,
    pub reported: usize,
    pub refuted: usize,
    #[serde(skip)]
    pub confirmed: usize,
}

impl CorpusRow {
    fn failed(file: String, error: String) -> CorpusRow {
        CorpusRow {
            file,
            error: Some(error),
            time_no_ref_s: 0.0,
            time_with_ref_s: 0.0,
            reported: 0,
            refuted: 0,
            confirmed: 0,
        }
    }
}

/// Run both pipeline legs over one file: plain analysis for the baseline
/// column, then analysis plus refutation for the comparison column.
fn measure_file(path: &Path, opts: &Options) -> CorpusRow {
    let file = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string_lossy().into_owned());
    let source = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => return CorpusRow::failed(file, e.to_string()),
    };
    let cfgs = match compile(&source) {
        Ok(c) => c,
        Err(e) => return CorpusRow::failed(file, e.to_string()),
    };
    let config = opts.exec_config();

    let started = Instant::now();
    let graph = execute(&cfgs, &config);
    let reported = dedup(collect_reports(&graph, &file)).len();
    let time_no_ref = started.elapsed();

    let started = Instant::now();
    let graph = execute(&cfgs, &config);
    let raw = collect_reports(&graph, &file);
    let (reports, summary) = match refute_reports(&graph, raw, &opts.backend, opts.timeout) {
        Ok(done) => done,
        Err(e) => return CorpusRow::failed(file, e.to_string()),
    };
    let time_with_ref = started.elapsed();

    CorpusRow {
        file,
        error: None,
        time_no_ref_s: time_no_ref.as_secs_f64(),
        time_with_ref_s: time_with_ref.as_secs_f64(),
        reported,
        refuted: summary.refuted,
        confirmed: reports
            .iter()
            .filter(|r| r.status != ReportStatus::Refuted)
            .count(),
    }
}

fn corpus_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "c"))
        .collect();
    files.sort();
    Ok(files)
}

fn measure_all(files: &[PathBuf], opts: &Options) -> Vec<CorpusRow> {
    #[cfg(feature = "parallel")]
    {
        let threads = opts.jobs.unwrap_or(0);
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            use rayon::prelude::*;
            return pool.install(|| {
                files.par_iter().map(|p| measure_file(p, opts)).collect()
            });
        }
    }
    files.iter().map(|p| measure_file(p, opts)).collect()
}

fn totals(rows: &[CorpusRow]) -> CorpusRow {
    let mut total = CorpusRow {
        file: "total".to_string(),
        error: None,
        time_no_ref_s: 0.0,
        time_with_ref_s: 0.0,
        reported: 0,
        refuted: 0,
        confirmed: 0,
    };
    for r in rows {
        total.time_no_ref_s += r.time_no_ref_s;
        total.time_with_ref_s += r.time_with_ref_s;
        total.reported += r.reported;
        total.refuted += r.refuted;
        total.confirmed += r.confirmed;
    }
    total
}

pub fn render_table(rows: &[CorpusRow], total: &CorpusRow) -> String {
    let name_w = rows
        .iter()
        .map(|r| r.file.len())
        .chain(["file".len(), "total".len()])
        .max()
        .unwrap_or(4);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<name_w$}  {:>12}  {:>14}  {:>8}  {:>7}",
        "file", "time-no-ref", "time-with-ref", "reported", "refuted"
    );
    let mut line = |r: &CorpusRow| {
        if let Some(err) = &r.error {
            let _ = writeln!(out, "{:<name_w$}  error: {err}", r.file);
        } else {
            let _ = writeln!(
                out,
                "{:<name_w$}  {:>11.3}s  {:>13.3}s  {:>8}  {:>7}",
                r.file, r.time_no_ref_s, r.time_with_ref_s, r.reported, r.refuted
            );
        }
    };
    for r in rows {
        line(r);
    }
    line(total);
    out
}

#[derive(Serialize)]
struct CorpusJson<'a> {
    files: &'a [CorpusRow],
    total: &'a CorpusRow,
}

pub fn render_table_json(rows: &[CorpusRow], total: &CorpusRow) -> String {
    let mut s = serde_json::to_string_pretty(&CorpusJson { files: rows, total })
        .expect("corpus serialization");
    s.push('\n');
    s
}

pub fn run_corpus(dir: &Path, opts: &Options) -> ExitCode {
    let files = match corpus_files(dir) {
        Ok(fs) => fs,
        Err(e) => {
            eprintln!("{}: error: {e}", dir.display());
            return ExitCode::from(2);
        }
    };
    let rows = measure_all(&files, opts);
    let total = totals(&rows);
    match opts.format {
        Format::Text => print!("{}", render_table(&rows, &total)),
        Format::Json => print!("{}", render_table_json(&rows, &total)),
    }
    if rows.iter().any(|r| r.error.is_some()) {
        ExitCode::from(2)
    } else if total.confirmed > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
