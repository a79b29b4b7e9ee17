//! refutelint: analyze MiniC files for null dereferences and division by
//! zero, then drop reports whose path constraints an exact solver can prove
//! unsatisfiable.

mod corpus;
mod driver;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{ArgAction, Parser};
use refutelint_core::refute::SolverBackend;
use refutelint_core::smt::ExternalSolver;

use driver::Format;

#[derive(Parser, Debug)]
#[command(
    name = "refutelint",
    version,
    about = "Path-sensitive bug finder for a small C subset with SMT-backed report refutation"
)]
struct Cli {
    /// MiniC source files, or one directory to analyze as a corpus.
    #[arg(required = true, value_name = "PATH")]
    paths: Vec<PathBuf>,

    /// Re-check every report against an exact solver and drop the provably
    /// infeasible ones.
    #[arg(
        long,
        value_name = "BOOL",
        default_value_t = true,
        action = ArgAction::Set
    )]
    crosscheck_with_smt: bool,

    /// "builtin", or an external solver command where "{file}" receives the
    /// SMT-LIB2 query path (otherwise the query arrives on stdin).
    #[arg(long, env = "REFUTELINT_SOLVER", default_value = "builtin", value_name = "CMD")]
    solver: String,

    /// Per-report solver budget in milliseconds.
    #[arg(
        long,
        value_name = "N",
        default_value_t = 15_000,
        value_parser = clap::value_parser!(u64).range(1..)
    )]
    timeout_ms: u64,

    /// Report output format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// List refuted reports (marked) instead of hiding them.
    #[arg(long)]
    show_refuted: bool,

    /// Print timing and solver-query statistics to stderr.
    #[arg(long)]
    stats: bool,

    /// Analyze up to N files in parallel. Defaults to the core count.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,

    /// Loop unrolling budget per path.
    #[arg(long, value_name = "N", default_value_t = 4)]
    max_unroll: u32,
}

fn backend_for(solver: &str) -> Result<SolverBackend, String> {
    if solver == "builtin" {
        return Ok(SolverBackend::builtin());
    }
    match ExternalSolver::from_command(solver) {
        Some(ext) => Ok(SolverBackend::External(ext)),
        None => Err(format!("invalid --solver command: {solver:?}")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let backend = match backend_for(&cli.solver) {
        Ok(b) => b,
        Err(msg) => {
            eprintln!("refutelint: error: {msg}");
            return ExitCode::from(2);
        }
    };
    let opts = driver::Options {
        crosscheck: cli.crosscheck_with_smt,
        backend,
        timeout: Duration::from_millis(cli.timeout_ms),
        show_refuted: cli.show_refuted,
        stats: cli.stats,
        format: cli.format,
        jobs: cli.jobs.map(|n| n as usize),
        max_unroll: cli.max_unroll,
    };

    let dirs: Vec<&PathBuf> = cli.paths.iter().filter(|p| p.is_dir()).collect();
    if dirs.len() == 1 && cli.paths.len() == 1 {
        return corpus::run_corpus(&cli.paths[0], &opts);
    }
    if !dirs.is_empty() {
        eprintln!(
            "refutelint: error: pass either source files or one corpus directory, not both"
        );
        return ExitCode::from(2);
    }
    driver::run_files(&cli.paths, &opts)
}
