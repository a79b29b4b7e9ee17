//! Per-file analysis pipeline and the plain (non-corpus) run mode.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use refutelint_core::frontend::compile;
use refutelint_core::refute::{refute_reports, RefutationSummary, SolverBackend};
use refutelint_core::reports::{
    collect_reports, dedup, render_json, render_text, BugReport, ReportStatus,
};
use refutelint_core::symexec::{execute, ExecConfig, ExplodedGraph};

#[derive(Copy, Clone, PartialEq, Eq, Debug, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Debug)]
pub struct Options {
    pub crosscheck: bool,
    pub backend: SolverBackend,
    pub timeout: Duration,
    pub show_refuted: bool,
    pub stats: bool,
    pub format: Format,
    /// Worker cap for multi-file runs; without the `parallel` feature the
    /// flag is accepted and files just run one at a time.
    #[cfg_attr(not(feature = "parallel"), allow(dead_code))]
    pub jobs: Option<usize>,
    pub max_unroll: u32,
}

impl Options {
    pub fn exec_config(&self) -> ExecConfig {
        ExecConfig {
            max_loop_unrollings: self.max_unroll,
            ..ExecConfig::default()
        }
    }
}

pub struct FileAnalysis {
    pub file: String,
    pub source: String,
    pub reports: Vec<BugReport>,
    pub exec_time: Duration,
    pub refute_time: Duration,
    pub summary: Option<RefutationSummary>,
    /// Set when the solver process could not run; reports are kept as-is.
    pub solver_down: Option<String>,
}

impl FileAnalysis {
    pub fn confirmed(&self) -> usize {
        self.reports
            .iter()
            .filter(|r| r.status != ReportStatus::Refuted)
            .count()
    }
}

pub enum FileOutcome {
    Analyzed(Box<FileAnalysis>),
    Failed(String),
}

/// Parse, execute, and optionally crosscheck one file. Every failure comes
/// back as a rendered diagnostic rather than an abort so a batch run can
/// keep going.
pub fn analyze_file(path: &Path, opts: &Options) -> FileOutcome {
    let file = path.to_string_lossy().into_owned();
    let source = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => return FileOutcome::Failed(format!("{file}: error: {e}")),
    };
    let graph = match compile_and_execute(&source, opts) {
        Ok(g) => g,
        Err(e) => return FileOutcome::Failed(format!("{file}:{e}")),
    };
    analyze_graph(graph, file, source, opts)
}

fn compile_and_execute(source: &str, opts: &Options) -> Result<TimedGraph, String> {
    let cfgs = compile(source).map_err(|e| e.to_string())?;
    let started = Instant::now();
    let graph = execute(&cfgs, &opts.exec_config());
    Ok(TimedGraph { graph, exec_time: started.elapsed() })
}

pub struct TimedGraph {
    pub graph: ExplodedGraph,
    pub exec_time: Duration,
}

fn analyze_graph(
    timed: TimedGraph,
    file: String,
    source: String,
    opts: &Options,
) -> FileOutcome {
    let TimedGraph { graph, exec_time } = timed;
    let raw = collect_reports(&graph, &file);
    let mut analysis = FileAnalysis {
        file,
        source,
        reports: Vec::new(),
        exec_time,
        refute_time: Duration::ZERO,
        summary: None,
        solver_down: None,
    };
    if !opts.crosscheck {
        analysis.reports = dedup(raw);
        return FileOutcome::Analyzed(Box::new(analysis));
    }
    let started = Instant::now();
    match refute_reports(&graph, raw, &opts.backend, opts.timeout) {
        Ok((reports, summary)) => {
            analysis.refute_time = started.elapsed();
            analysis.reports = reports;
            analysis.summary = Some(summary);
        }
        Err(e) => {
            // Conservative fallback: with no solver every report stays.
            analysis.refute_time = started.elapsed();
            analysis.reports = dedup(collect_reports(&graph, &analysis.file));
            analysis.solver_down = Some(e.to_string());
        }
    }
    FileOutcome::Analyzed(Box::new(analysis))
}

/// Analyze the files in parallel up to the jobs cap, preserving input order
/// in the result.
pub fn analyze_all(paths: &[PathBuf], opts: &Options) -> Vec<FileOutcome> {
    #[cfg(feature = "parallel")]
    {
        let threads = opts.jobs.unwrap_or(0);
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            use rayon::prelude::*;
            return pool.install(|| {
                paths.par_iter().map(|p| analyze_file(p, opts)).collect()
            });
        }
    }
    paths.iter().map(|p| analyze_file(p, opts)).collect()
}

/// The non-corpus entry point: analyze every path, print diagnostics in
/// input order, and fold the outcomes into an exit code.
pub fn run_files(paths: &[PathBuf], opts: &Options) -> ExitCode {
    let outcomes = analyze_all(paths, opts);
    let mut errored = false;
    let mut confirmed = 0usize;
    let mut analyses: Vec<&FileAnalysis> = Vec::new();
    for outcome in &outcomes {
        match outcome {
            FileOutcome::Failed(msg) => {
                eprintln!("{msg}");
                errored = true;
            }
            FileOutcome::Analyzed(a) => {
                if let Some(err) = &a.solver_down {
                    eprintln!("{}: warning: {err}; keeping all reports", a.file);
                    errored = true;
                }
                confirmed += a.confirmed();
                analyses.push(a);
            }
        }
    }

    match opts.format {
        Format::Text => {
            for a in &analyses {
                print!("{}", render_text(&a.reports, &a.source, opts.show_refuted));
            }
        }
        Format::Json => {
            let merged: Vec<BugReport> = analyses
                .iter()
                .flat_map(|a| a.reports.iter().cloned())
                .collect();
            print!("{}", render_json(&merged, opts.show_refuted));
        }
    }

    if opts.stats {
        eprint!("{}", stats_line(&analyses));
    }

    if errored {
        ExitCode::from(2)
    } else if confirmed > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn stats_line(analyses: &[&FileAnalysis]) -> String {
    let files = analyses.len();
    let exec: Duration = analyses.iter().map(|a| a.exec_time).sum();
    let refute: Duration = analyses.iter().map(|a| a.refute_time).sum();
    let reported: usize = analyses.iter().map(|a| a.reports.len()).sum();
    let refuted: usize = analyses
        .iter()
        .filter_map(|a| a.summary.map(|s| s.refuted))
        .sum();
    let queries: usize = analyses
        .iter()
        .filter_map(|a| a.summary.map(|s| s.queries))
        .sum();
    let max_query = analyses
        .iter()
        .filter_map(|a| a.summary.map(|s| s.max_query_time))
        .max()
        .unwrap_or(Duration::ZERO);
    let mut out = String::new();
    let s = if files == 1 { "" } else { "s" };
    let _ = writeln!(
        out,
        "stats: {files} file{s}, execution {:.3}s, refutation {:.3}s, queries {queries} (max {:.3}s), reported {reported}, refuted {refuted}, confirmed {}",
        exec.as_secs_f64(),
        refute.as_secs_f64(),
        max_query.as_secs_f64(),
        reported - refuted,
    );
    out
}
