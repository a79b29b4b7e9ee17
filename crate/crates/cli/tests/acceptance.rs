//! Acceptance gate: one test per shipping criterion. Each test finishes
//! with a single PASS line carrying its measured numbers, so a
//! `--nocapture` run reads as a checklist.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::SeedableRng;
use refutelint_core::checkers::CheckerId;
use refutelint_core::ir::{Interval, Signedness, SymExpr, SymbolGen, Width};
use refutelint_core::loc::SourceLoc;
use refutelint_core::refute::{
    encode_constraints, formula_for_report, refute_reports, PathConstraint, SolverBackend,
};
use refutelint_core::reports::{collect_reports, dedup, BugReport, ReportStatus};
use refutelint_core::smt::{
    check_sat_builtin, check_sat_external, BuiltinConfig, ExternalSolver, SmtFormula,
    SolverVerdict,
};
use refutelint_core::{frontend, symexec};
use refutelint_testgen::genconstraints::{random_backward_list, random_formula, symbols};
use refutelint_testgen::genprog::generate;
use refutelint_testgen::interp::{enumerate_bugs, BugKind};

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn refutelint() -> Command {
    Command::new(env!("CARGO_BIN_EXE_refutelint"))
}

/// The reference SMT solver as an external process, built on demand when
/// this test target runs without the rest of the workspace.
fn bvsat_solver() -> ExternalSolver {
    let mut dir = std::env::current_exe().expect("test executable path");
    dir.pop();
    if dir.ends_with("deps") {
        dir.pop();
    }
    let bin = dir.join(format!("bvsat{}", std::env::consts::EXE_SUFFIX));
    if !bin.exists() {
        let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".to_string());
        let mut args = vec!["build", "--package", "bvsat", "--bin", "bvsat"];
        if dir.ends_with("release") {
            args.push("--release");
        }
        let status = Command::new(cargo)
            .args(args)
            .status()
            .expect("spawn cargo to build the reference solver");
        assert!(status.success(), "building the reference solver failed");
    }
    ExternalSolver::from_command(&format!("{} {{file}}", bin.display()))
        .expect("solver command template")
}

fn kind_of(checker: CheckerId) -> BugKind {
    match checker {
        CheckerId::NullDeref => BugKind::NullDeref,
        CheckerId::DivZero => BugKind::DivZero,
    }
}

#[test]
fn criterion_1_flagship_example_end_to_end() {
    let started = Instant::now();
    let off = refutelint()
        .current_dir(fixture_dir())
        .args(["--crosscheck-with-smt=false", "main.c"])
        .output()
        .expect("run refutelint");
    assert_eq!(off.status.code(), Some(1), "{off:?}");
    assert_eq!(
        String::from_utf8_lossy(&off.stdout),
        "main.c:4:12: warning: Dereference of null pointer (loaded from variable 'z')\n\
         \x20   return *z;\n\
         \x20          ^\n\
         1 warning generated.\n"
    );

    let on = refutelint()
        .current_dir(fixture_dir())
        .args(["--crosscheck-with-smt=true", "main.c"])
        .output()
        .expect("run refutelint");
    assert_eq!(on.status.code(), Some(0), "{on:?}");
    assert_eq!(String::from_utf8_lossy(&on.stdout), "0 warnings generated.\n");

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    println!(
        "criterion 1: PASS (exactly one warning without refutation, zero with, {elapsed:?} < 1s)"
    );
}

fn flagship_formula(src: &str) -> SmtFormula {
    let cfgs = frontend::compile(src).expect("flagship program compiles");
    let graph = symexec::execute(&cfgs, &symexec::ExecConfig::default());
    let reports = collect_reports(&graph, "main.c");
    assert_eq!(reports.len(), 1, "expected exactly one candidate report");
    formula_for_report(&graph, &reports[0])
}

#[test]
fn criterion_2_flagship_formula_unsat_under_both_solvers() {
    // Width-8 harness: the same always-false guard over an 8-bit input.
    let harness = "\
unsigned char func(unsigned char a) {
  unsigned char *z = 0;
  if ((a & 1) && ((a & 1) ^ 1))
    return *z;
  return 0;
}
";
    let f8 = flagship_formula(harness);
    assert_eq!(
        check_sat_builtin(&f8, &BuiltinConfig::default()),
        SolverVerdict::Unsat
    );

    // Full width through the external process interface.
    let source = std::fs::read_to_string(fixture_dir().join("main.c")).unwrap();
    let f32 = flagship_formula(&source);
    let text = f32.to_smtlib();
    assert!(text.contains("(_ BitVec 32)"), "{text}");
    let verdict = check_sat_external(&bvsat_solver(), &text, Duration::from_secs(15))
        .expect("external solver runs");
    assert_eq!(verdict, SolverVerdict::Unsat);
    println!("criterion 2: PASS (builtin w8 harness unsat, external solver unsat at full width)");
}

struct GenOutcome {
    src: String,
    truth: BTreeSet<(BugKind, u32, u32)>,
    finals: Vec<BugReport>,
}

fn run_generated(count: usize, seed: u64) -> Vec<GenOutcome> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let prog = generate(&mut rng);
        let ast = frontend::parse_and_check(&prog.src)
            .unwrap_or_else(|e| panic!("{e}\n{}", prog.src));
        let truth: BTreeSet<(BugKind, u32, u32)> = enumerate_bugs(&ast, prog.func)
            .unwrap_or_else(|e| panic!("{e:?}\n{}", prog.src))
            .into_iter()
            .map(|b| (b.kind, b.line, b.col))
            .collect();
        let cfgs = frontend::compile(&prog.src).unwrap();
        let graph = symexec::execute(&cfgs, &symexec::ExecConfig::default());
        let raw = collect_reports(&graph, "gen.c");
        let (finals, _) = refute_reports(
            &graph,
            raw,
            &SolverBackend::builtin(),
            Duration::from_secs(15),
        )
        .expect("builtin backend is always available");
        out.push(GenOutcome { src: prog.src, truth, finals });
    }
    out
}

#[test]
fn criterion_3_reachable_bugs_survive_refutation() {
    let started = Instant::now();
    let runs = run_generated(200, 0xacce);
    let mut reachable = 0usize;
    for o in &runs {
        let confirmed: BTreeSet<(BugKind, u32, u32)> = o
            .finals
            .iter()
            .filter(|r| r.status == ReportStatus::Confirmed)
            .map(|r| (kind_of(r.checker), r.line, r.col))
            .collect();
        for key in &o.truth {
            reachable += 1;
            assert!(
                confirmed.contains(key),
                "concretely reachable bug {key:?} lost after refutation\n{}",
                o.src
            );
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!(
        "criterion 3: PASS ({} programs, {reachable} reachable bugs all still confirmed, {elapsed:?} < 60s)",
        runs.len()
    );
}

#[test]
fn criterion_4_enumeration_unsat_reports_are_refuted() {
    let runs = run_generated(200, 0xacce);
    let mut refuted = 0usize;
    for o in &runs {
        for r in &o.finals {
            let key = (kind_of(r.checker), r.line, r.col);
            if o.truth.contains(&key) {
                assert_ne!(
                    r.status,
                    ReportStatus::Refuted,
                    "reachable report {key:?} refuted\n{}",
                    o.src
                );
            } else {
                assert_eq!(
                    r.status,
                    ReportStatus::Refuted,
                    "report {key:?} unreachable by enumeration but kept\n{}",
                    o.src
                );
                refuted += 1;
            }
        }
    }
    assert!(refuted > 0, "the generated set produced no spurious reports");
    println!(
        "criterion 4: PASS (all {refuted} enumeration-unsatisfiable reports refuted, zero misses)"
    );
}

#[test]
fn criterion_5_builtin_and_external_verdicts_agree() {
    let started = Instant::now();
    let solver = bvsat_solver();
    let syms = symbols(3);
    let mut rng = StdRng::seed_from_u64(0x5001);
    let config = BuiltinConfig::default();
    let (mut sat, mut unsat) = (0u32, 0u32);
    for i in 0..1000 {
        let f = random_formula(&mut rng, &syms);
        let builtin = check_sat_builtin(&f, &config);
        assert!(
            matches!(builtin, SolverVerdict::Sat | SolverVerdict::Unsat),
            "query {i} not decided by the builtin solver: {builtin:?}\n{}",
            f.to_smtlib()
        );
        let external = check_sat_external(&solver, &f.to_smtlib(), Duration::from_secs(15))
            .expect("external solver runs");
        assert_eq!(builtin, external, "query {i} disagrees\n{}", f.to_smtlib());
        match builtin {
            SolverVerdict::Sat => sat += 1,
            _ => unsat += 1,
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    println!(
        "criterion 5: PASS (1000 conjunctions, zero disagreements: {sat} sat, {unsat} unsat, {elapsed:?} < 120s)"
    );
}

fn analyze_corpus_file(path: &Path) -> (usize, usize, usize) {
    let src = std::fs::read_to_string(path).unwrap();
    let cfgs = frontend::compile(&src).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let graph = symexec::execute(&cfgs, &symexec::ExecConfig::default());
    let reported = dedup(collect_reports(&graph, "f.c")).len();
    let raw = collect_reports(&graph, "f.c");
    let (finals, summary) = refute_reports(
        &graph,
        raw,
        &SolverBackend::builtin(),
        Duration::from_secs(15),
    )
    .unwrap();
    let confirmed = finals
        .iter()
        .filter(|r| r.status == ReportStatus::Confirmed)
        .count();
    (reported, summary.refuted, confirmed)
}

const INFEASIBLE_GUARD_PROGRAMS: [&str; 8] = [
    "bit_guard.c",
    "loop_bound.c",
    "mask_rejoin.c",
    "mixed_paths.c",
    "or_mask.c",
    "rem_guard.c",
    "shift_guard.c",
    "signed_wrap.c",
];

const TRUE_BUG_PROGRAMS: [&str; 4] = [
    "call_inline.c",
    "div_input.c",
    "guarded_real.c",
    "null_flow.c",
];

#[test]
fn criterion_6_corpus_table_shape_and_counts() {
    let out = refutelint()
        .arg("--format=json")
        .arg(corpus_dir())
        .output()
        .expect("run refutelint on the corpus");
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).expect("corpus JSON parses");
    let files = v["files"].as_array().unwrap();
    assert_eq!(files.len(), 12);

    let (mut total_reported, mut total_refuted) = (0u64, 0u64);
    for row in files {
        let name = row["file"].as_str().unwrap();
        let reported = row["reported"].as_u64().unwrap();
        let refuted = row["refuted"].as_u64().unwrap();
        total_reported += reported;
        total_refuted += refuted;
        if INFEASIBLE_GUARD_PROGRAMS.contains(&name) {
            assert!(refuted >= 1, "{name}: refuted column is zero for an infeasible guard");
        } else {
            assert!(TRUE_BUG_PROGRAMS.contains(&name), "unexpected corpus file {name}");
            assert_eq!(refuted, 0, "{name}: refuted a true bug");
        }
        let (lib_reported, lib_refuted, lib_confirmed) =
            analyze_corpus_file(&corpus_dir().join(name));
        assert_eq!(
            (reported, refuted),
            (lib_reported as u64, lib_refuted as u64),
            "{name}: table disagrees with the library pipeline"
        );
        assert_eq!(
            lib_confirmed,
            lib_reported - lib_refuted,
            "{name}: confirmed != reported - refuted"
        );
    }
    assert_eq!(v["total"]["reported"].as_u64().unwrap(), total_reported);
    assert_eq!(v["total"]["refuted"].as_u64().unwrap(), total_refuted);

    let text = refutelint().arg(corpus_dir()).output().unwrap();
    let table = String::from_utf8_lossy(&text.stdout).into_owned();
    let header = table.lines().next().unwrap();
    for col in ["time-no-ref", "time-with-ref", "reported", "refuted"] {
        assert!(header.contains(col), "missing column {col}: {header}");
    }
    assert!(table.lines().last().unwrap().starts_with("total"));
    println!(
        "criterion 6: PASS (four-column table over 12 programs; refuted nonzero for {} infeasible-guard programs, zero for {} true-bug programs; confirmed = reported - refuted = {})",
        INFEASIBLE_GUARD_PROGRAMS.len(),
        TRUE_BUG_PROGRAMS.len(),
        total_reported - total_refuted
    );
}

#[test]
fn criterion_7_refutation_overhead_and_timeouts() {
    let timeout = Duration::from_secs(15);
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "c"))
        .collect();
    files.sort();
    let sources: Vec<String> = files
        .iter()
        .map(|p| std::fs::read_to_string(p).unwrap())
        .collect();
    let cfg_sets: Vec<_> = sources.iter().map(|s| frontend::compile(s).unwrap()).collect();

    // One untimed warmup pass so neither leg pays first-touch costs.
    for cfgs in &cfg_sets {
        let graph = symexec::execute(cfgs, &symexec::ExecConfig::default());
        let raw = collect_reports(&graph, "f.c");
        let _ = refute_reports(&graph, raw, &SolverBackend::builtin(), timeout).unwrap();
    }

    let mut without = Duration::ZERO;
    let mut with = Duration::ZERO;
    let mut max_query = Duration::ZERO;
    let mut queries = 0usize;
    for _round in 0..20 {
        for cfgs in &cfg_sets {
            let t = Instant::now();
            let graph = symexec::execute(cfgs, &symexec::ExecConfig::default());
            let _ = dedup(collect_reports(&graph, "f.c"));
            without += t.elapsed();

            let t = Instant::now();
            let graph = symexec::execute(cfgs, &symexec::ExecConfig::default());
            let raw = collect_reports(&graph, "f.c");
            let (_, summary) =
                refute_reports(&graph, raw, &SolverBackend::builtin(), timeout).unwrap();
            with += t.elapsed();
            max_query = max_query.max(summary.max_query_time);
            queries += summary.queries;
        }
    }
    assert!(
        max_query <= timeout,
        "a refutation query took {max_query:?}, over the {timeout:?} budget"
    );
    assert!(
        with <= without * 2,
        "with-refutation wall time {with:?} exceeds 2x the {without:?} baseline"
    );
    println!(
        "criterion 7: PASS (20 corpus rounds: {with:?} with refutation vs {without:?} without; {queries} queries, max {max_query:?} <= 15s)"
    );
}

#[test]
fn criterion_8_interval_encoding_unit_suite() {
    let mut gen = SymbolGen::new();
    let x = SymExpr::symbol(gen.fresh(
        Width::W8,
        Signedness::Unsigned,
        "x",
        SourceLoc::default(),
    ));

    // A point interval encodes as an equality.
    let mut f = SmtFormula::new();
    encode_constraints(
        &[PathConstraint::Interval {
            var: x.clone(),
            interval: Interval::point(Width::W8, 5),
        }],
        &mut f,
        true,
    );
    let text = f.to_smtlib();
    assert!(text.contains("(assert (= $0 #x05))"), "{text}");

    // A non-point interval encodes as two unsigned-ordered inequalities.
    let mut f = SmtFormula::new();
    encode_constraints(
        &[PathConstraint::Interval {
            var: x.clone(),
            interval: Interval::new(Width::W8, 3, 10).unwrap(),
        }],
        &mut f,
        true,
    );
    let text = f.to_smtlib();
    assert!(
        text.contains("(assert (and (bvuge $0 #x03) (bvule $0 #x0a)))"),
        "{text}"
    );

    // Walking backwards, a second interval for an already-constrained
    // expression is subsumed and skipped.
    let list = [
        PathConstraint::Interval {
            var: x.clone(),
            interval: Interval::new(Width::W8, 4, 6).unwrap(),
        },
        PathConstraint::Interval {
            var: x.clone(),
            interval: Interval::new(Width::W8, 2, 9).unwrap(),
        },
    ];
    let mut skipped = SmtFormula::new();
    encode_constraints(&list, &mut skipped, true);
    assert_eq!(skipped.assertions().len(), 1);
    let mut kept = SmtFormula::new();
    encode_constraints(&list, &mut kept, false);
    assert_eq!(kept.assertions().len(), 2);

    // Skip-on and skip-off encodings are equisatisfiable on random
    // backward-ordered constraint lists.
    let syms = symbols(3);
    let mut rng = StdRng::seed_from_u64(0x8e8e);
    let config = BuiltinConfig::default();
    for i in 0..500 {
        let list = random_backward_list(&mut rng, &syms);
        let mut with_skip = SmtFormula::new();
        encode_constraints(&list, &mut with_skip, true);
        let mut without_skip = SmtFormula::new();
        encode_constraints(&list, &mut without_skip, false);
        let a = check_sat_builtin(&with_skip, &config);
        let b = check_sat_builtin(&without_skip, &config);
        assert!(
            matches!(a, SolverVerdict::Sat | SolverVerdict::Unsat),
            "list {i} not decided: {a:?}"
        );
        assert_eq!(
            a,
            b,
            "list {i}: skip-on and skip-off disagree\n{}\nvs\n{}",
            with_skip.to_smtlib(),
            without_skip.to_smtlib()
        );
    }
    println!(
        "criterion 8: PASS (point = equality, range = two unsigned bounds, duplicate skipped, 500 skip-on/off lists equisatisfiable)"
    );
}
