//! The refutation stage: rebuild each report's path condition exactly,
//! hand it to a bitvector solver, and drop the report if the conjunction
//! cannot be satisfied.
//!
//! Refutation is strictly conservative. Only an unsat verdict removes a
//! report; sat, timeouts, solver errors, and over-budget answers all keep
//! it. A location is dropped only when every candidate path leading to it
//! is individually refuted, so a real bug reachable along some longer path
//! never disappears just because the shortest path was infeasible.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use indexmap::IndexMap;

use crate::checkers::CheckerId;
use crate::ir::{Interval, SymExpr};
use crate::reports::{BugReport, ReportStatus};
use crate::smt::{
    check_sat_builtin, check_sat_external, BuiltinConfig, ExternalSolver, SmtFormula,
    SolverUnavailable, SolverVerdict,
};
use crate::symexec::{ExplodedGraph, NodeId};

/// One constraint gathered from a path node: either an interval the range
/// solver established, or a condition it recorded opaquely.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PathConstraint {
    Interval { var: SymExpr, interval: Interval },
    Opaque { cond: SymExpr, truth: bool },
}

/// Walk the report's path backwards, from the violation node to the entry,
/// gathering every node's interval entries and opaque conditions. No
/// duplicate filtering happens here; that is the encoder's job.
pub fn collect_constraints(graph: &ExplodedGraph, path: &[NodeId]) -> Vec<PathConstraint> {
    let mut out = Vec::new();
    for &id in path.iter().rev() {
        let state = &graph.node(id).state;
        for (var, interval) in state.constraints.iter() {
            out.push(PathConstraint::Interval {
                var: var.clone(),
                interval: *interval,
            });
        }
        for oc in &state.opaque {
            out.push(PathConstraint::Opaque {
                cond: oc.cond.clone(),
                truth: oc.truth,
            });
        }
    }
    out
}

/// Encode a backward-ordered constraint list into `formula`.
///
/// With `skip_subsumed` on, an expression that already has an interval
/// assertion is skipped: walking backwards, the first interval seen is the
/// tightest, and every later (earlier-in-time) one is a superset, so
/// re-asserting it adds nothing. Point intervals become equalities;
/// everything else becomes a pair of unsigned bounds. Full-range intervals
/// carry no information and are not asserted. Opaque conditions skip only
/// exact structural repeats of the same (condition, truth) assertion.
pub fn encode_constraints(
    constraints: &[PathConstraint],
    formula: &mut SmtFormula,
    skip_subsumed: bool,
) {
    let mut seen_vars: HashSet<SymExpr> = HashSet::new();
    let mut seen_conds: HashSet<(SymExpr, bool)> = HashSet::new();
    for c in constraints {
        match c {
            PathConstraint::Interval { var, interval } => {
                if skip_subsumed && !seen_vars.insert(var.clone()) {
                    continue;
                }
                if interval.is_full() {
                    continue;
                }
                if interval.is_point() {
                    formula.assert_point(var.clone(), interval.lo());
                } else {
                    formula.assert_range(var.clone(), interval.lo(), interval.hi());
                }
            }
            PathConstraint::Opaque { cond, truth } => {
                if !seen_conds.insert((cond.clone(), *truth)) {
                    continue;
                }
                formula.assert_cond(cond.clone(), *truth);
            }
        }
    }
}

/// The full path condition of a report as one SMT formula.
pub fn formula_for_report(graph: &ExplodedGraph, report: &BugReport) -> SmtFormula {
    let mut formula = SmtFormula::new();
    let constraints = collect_constraints(graph, &report.path);
    encode_constraints(&constraints, &mut formula, true);
    formula
}

#[derive(Clone, Debug)]
pub enum SolverBackend {
    /// Bounded enumeration over influencing bits; needs no external tools.
    Builtin { max_bits: u32 },
    /// Any SMT-LIB2-speaking process.
    External(ExternalSolver),
}

impl SolverBackend {
    pub fn builtin() -> SolverBackend {
        SolverBackend::Builtin { max_bits: BuiltinConfig::default().max_bits }
    }

    pub fn check(
        &self,
        formula: &SmtFormula,
        timeout: Duration,
    ) -> Result<SolverVerdict, SolverUnavailable> {
        match self {
            SolverBackend::Builtin { max_bits } => {
                let config = BuiltinConfig { max_bits: *max_bits, timeout };
                Ok(check_sat_builtin(formula, &config))
            }
            SolverBackend::External(solver) => {
                check_sat_external(solver, &formula.to_smtlib(), timeout)
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RefutationStatus {
    Refuted,
    Confirmed,
}

/// Check one report: refuted iff the solver proves its path condition
/// unsatisfiable. Sat and every flavor of unknown keep the report.
pub fn refute_report(
    graph: &ExplodedGraph,
    report: &BugReport,
    backend: &SolverBackend,
    timeout: Duration,
) -> Result<RefutationStatus, SolverUnavailable> {
    let formula = formula_for_report(graph, report);
    let verdict = backend.check(&formula, timeout)?;
    Ok(match verdict {
        SolverVerdict::Unsat => RefutationStatus::Refuted,
        SolverVerdict::Sat | SolverVerdict::Unknown(_) => RefutationStatus::Confirmed,
    })
}

#[derive(Clone, Copy, Debug, Default, serde::Serialize)]
pub struct RefutationSummary {
    pub queries: usize,
    pub refuted: usize,
    #[serde(serialize_with = "ser_secs")]
    pub total_query_time: Duration,
    #[serde(serialize_with = "ser_secs")]
    pub max_query_time: Duration,
}

fn ser_secs<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

/// Crosscheck a raw (pre-dedup) report list. Reports are grouped per
/// (checker, location); within a group candidates run shortest-path-first
/// and the first confirmed candidate settles the group. Only when every
/// candidate is refuted does the location report as refuted, represented
/// by its shortest path.
pub fn refute_reports(
    graph: &ExplodedGraph,
    reports: Vec<BugReport>,
    backend: &SolverBackend,
    timeout: Duration,
) -> Result<(Vec<BugReport>, RefutationSummary), SolverUnavailable> {
    let mut groups: IndexMap<(CheckerId, u32, u32), Vec<BugReport>> = IndexMap::new();
    for r in reports {
        groups.entry(r.key()).or_default().push(r);
    }
    let mut out = Vec::new();
    let mut summary = RefutationSummary::default();
    for (_, mut group) in groups {
        group.sort_by_key(BugReport::path_length);
        let mut survivor: Option<BugReport> = None;
        for candidate in &group {
            let started = Instant::now();
            let status = refute_report(graph, candidate, backend, timeout)?;
            let elapsed = started.elapsed();
            summary.queries += 1;
            summary.total_query_time += elapsed;
            summary.max_query_time = summary.max_query_time.max(elapsed);
            if status == RefutationStatus::Confirmed {
                survivor = Some(candidate.clone());
                break;
            }
        }
        let report = match survivor {
            Some(mut r) => {
                r.status = ReportStatus::Confirmed;
                r
            }
            None => {
                summary.refuted += 1;
                let mut r = group.swap_remove(0);
                r.status = ReportStatus::Refuted;
                r
            }
        };
        out.push(report);
    }
    Ok((out, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::compile;
    use crate::ir::{BinOpKind, Signedness, SymbolGen, Width};
    use crate::loc::SourceLoc;
    use crate::reports::collect_reports;
    use crate::smt::eval_concrete;
    use crate::symexec::{execute, ExecConfig};
    use proptest::prelude::*;

    fn analyze(src: &str) -> (ExplodedGraph, Vec<BugReport>) {
        let cfgs = compile(src).unwrap();
        let graph = execute(&cfgs, &ExecConfig::default());
        let reports = collect_reports(&graph, "t.c");
        (graph, reports)
    }

    fn crosschecked(src: &str) -> (Vec<BugReport>, RefutationSummary) {
        let (graph, reports) = analyze(src);
        refute_reports(&graph, reports, &SolverBackend::builtin(), Duration::from_secs(15))
            .unwrap()
    }

    const GUARDED_NULL: &str = "\
int func(int a) {
  int *z = 0;
  if (a & 1 && (a & 1) ^ 1)
    return *z;
  return 0;
}
";

    #[test]
    fn the_masked_guard_report_is_refuted() {
        let (reports, summary) = crosschecked(GUARDED_NULL);
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0].status, ReportStatus::Refuted);
        assert_eq!(summary.refuted, 1);
        assert_eq!(summary.queries, 1);
    }

    #[test]
    fn the_masked_guard_formula_is_unsat_and_prints_the_path_condition() {
        let (graph, reports) = analyze(GUARDED_NULL);
        let formula = formula_for_report(&graph, &reports[0]);
        let text = formula.to_smtlib();
        assert!(text.contains("(declare-fun $0 () (_ BitVec 32))"), "{text}");
        assert!(
            text.contains("(assert (not (= (bvand $0 #x00000001) #x00000000)))"),
            "{text}"
        );
        assert!(
            text.contains(
                "(assert (not (= (bvxor (bvand $0 #x00000001) #x00000001) #x00000000)))"
            ),
            "{text}"
        );
        // The violating pointer is the constant null, pinned as 0 = 0.
        assert!(
            text.contains("(assert (= #x0000000000000000 #x0000000000000000))"),
            "{text}"
        );
        assert_eq!(
            SolverBackend::builtin()
                .check(&formula, Duration::from_secs(15))
                .unwrap(),
            SolverVerdict::Unsat
        );
    }

    #[test]
    fn a_reachable_bug_stays_confirmed() {
        let (reports, summary) =
            crosschecked("int f(int a) { if (a == 0) { return 10 / a; } return 0; }");
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0].status, ReportStatus::Confirmed);
        assert_eq!(summary.refuted, 0);
    }

    #[test]
    fn an_unconstrained_divisor_stays_confirmed() {
        let (reports, _) = crosschecked("int f(int a) { return 10 / a; }");
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0].status, ReportStatus::Confirmed);
    }

    #[test]
    fn a_feasible_longer_path_rescues_a_location_with_an_infeasible_short_path() {
        // Three paths converge on the same dereference. The shortest one
        // carries contradictory parity assumptions; the padded ones are
        // fine. Refuting the shortest candidate must not kill the location.
        let src = "\
int f(int b, int c) {
  int *p = 0;
  int u = 0;
  if (b & 1) {
    if ((b & 1) ^ 1) {
      u = 1;
    } else {
      c = 1; c = c + 1; c = c + 1; c = c + 1;
    }
  } else {
    c = 2; c = c + 1; c = c + 1; c = c + 1;
  }
  return *p;
}
";
        let (graph, reports) = analyze(src);
        assert_eq!(reports.len(), 3);
        let key = reports[0].key();
        assert!(reports.iter().all(|r| r.key() == key));
        let shortest = reports.iter().map(BugReport::path_length).min().unwrap();
        let shortest_formula = formula_for_report(
            &graph,
            reports
                .iter()
                .find(|r| r.path_length() == shortest)
                .unwrap(),
        );
        assert_eq!(
            SolverBackend::builtin()
                .check(&shortest_formula, Duration::from_secs(15))
                .unwrap(),
            SolverVerdict::Unsat,
            "the shortest path should be the contradictory one"
        );
        let (out, summary) =
            refute_reports(&graph, reports, &SolverBackend::builtin(), Duration::from_secs(15))
                .unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].status, ReportStatus::Confirmed);
        assert!(summary.queries >= 2, "{summary:?}");
        assert_eq!(summary.refuted, 0);
    }

    #[test]
    fn refutation_is_idempotent() {
        let (graph, reports) = analyze(GUARDED_NULL);
        let backend = SolverBackend::builtin();
        let t = Duration::from_secs(15);
        let (once, _) = refute_reports(&graph, reports, &backend, t).unwrap();
        let (twice, _) = refute_reports(&graph, once.clone(), &backend, t).unwrap();
        assert_eq!(once.len(), twice.len());
        for (a, b) in once.iter().zip(&twice) {
            assert_eq!(a.key(), b.key());
            assert_eq!(a.status, b.status);
        }
    }

    #[test]
    fn constraints_come_out_backwards_tightest_first() {
        let (graph, reports) = analyze(GUARDED_NULL);
        let cs = collect_constraints(&graph, &reports[0].path);
        // The first record for any expression comes from the node nearest
        // the violation, i.e. the tightest one: the null pointer's pin.
        let first_null = cs
            .iter()
            .find_map(|c| match c {
                PathConstraint::Interval { var, interval } if var.to_string() == "0:64" => {
                    Some(*interval)
                }
                _ => None,
            })
            .unwrap();
        assert!(first_null.is_point());
        // No filtering happened: states accumulate, so the guard's masked
        // expression shows up once per node that carries it.
        let masked_records = cs
            .iter()
            .filter(|c| matches!(c, PathConstraint::Interval { var, .. }
                if var.to_string() == "(and $0 1:32)"))
            .count();
        assert!(masked_records >= 2, "got {masked_records}");
        let opaques = cs
            .iter()
            .filter(|c| matches!(c, PathConstraint::Opaque { .. }))
            .count();
        assert!(opaques >= 3, "expected repeated opaque records, got {opaques}");
    }

    #[test]
    fn point_intervals_encode_as_equalities() {
        let mut gen = SymbolGen::new();
        let x = SymExpr::symbol(gen.fresh(
            Width::W32,
            Signedness::Unsigned,
            "x",
            SourceLoc::default(),
        ));
        let mut f = SmtFormula::new();
        encode_constraints(
            &[PathConstraint::Interval {
                var: x,
                interval: Interval::point(Width::W32, 5),
            }],
            &mut f,
            true,
        );
        let text = f.to_smtlib();
        assert!(text.contains("(assert (= $0 #x00000005))"), "{text}");
        assert!(!text.contains("bvuge"), "{text}");
    }

    #[test]
    fn ranges_encode_as_unsigned_bounds() {
        let mut gen = SymbolGen::new();
        let x = SymExpr::symbol(gen.fresh(
            Width::W32,
            Signedness::Unsigned,
            "x",
            SourceLoc::default(),
        ));
        let mut f = SmtFormula::new();
        encode_constraints(
            &[PathConstraint::Interval {
                var: x,
                interval: Interval::new(Width::W32, 2, 7).unwrap(),
            }],
            &mut f,
            true,
        );
        let text = f.to_smtlib();
        assert!(
            text.contains("(assert (and (bvuge $0 #x00000002) (bvule $0 #x00000007)))"),
            "{text}"
        );
    }

    #[test]
    fn later_duplicates_of_a_var_are_skipped() {
        let mut gen = SymbolGen::new();
        let x = SymExpr::symbol(gen.fresh(
            Width::W32,
            Signedness::Unsigned,
            "x",
            SourceLoc::default(),
        ));
        let tight = PathConstraint::Interval {
            var: x.clone(),
            interval: Interval::new(Width::W32, 2, 7).unwrap(),
        };
        let loose = PathConstraint::Interval {
            var: x,
            interval: Interval::new(Width::W32, 0, 10).unwrap(),
        };
        let mut skipped = SmtFormula::new();
        encode_constraints(&[tight.clone(), loose.clone()], &mut skipped, true);
        assert_eq!(skipped.assertions().len(), 1);
        let mut kept = SmtFormula::new();
        encode_constraints(&[tight, loose], &mut kept, false);
        assert_eq!(kept.assertions().len(), 2);
    }

    #[test]
    fn identical_opaque_conditions_assert_once() {
        let mut gen = SymbolGen::new();
        let x = SymExpr::symbol(gen.fresh(
            Width::W32,
            Signedness::Unsigned,
            "x",
            SourceLoc::default(),
        ));
        let cond = SymExpr::binop(
            BinOpKind::Ne,
            SymExpr::binop(BinOpKind::And, x, SymExpr::lit(Width::W32, 1)),
            SymExpr::lit(Width::W32, 0),
        );
        let cs = vec![
            PathConstraint::Opaque { cond: cond.clone(), truth: true },
            PathConstraint::Opaque { cond: cond.clone(), truth: true },
            PathConstraint::Opaque { cond, truth: false },
        ];
        let mut f = SmtFormula::new();
        encode_constraints(&cs, &mut f, true);
        // Same condition under both truth values: asserted once each, and
        // jointly unsatisfiable.
        assert_eq!(f.assertions().len(), 2);
        assert_eq!(
            SolverBackend::builtin().check(&f, Duration::from_secs(5)).unwrap(),
            SolverVerdict::Unsat
        );
    }

    #[test]
    fn empty_constraint_lists_leave_the_formula_alone() {
        let mut f = SmtFormula::new();
        encode_constraints(&[], &mut f, true);
        assert!(f.assertions().is_empty());
        assert_eq!(
            SolverBackend::builtin().check(&f, Duration::from_secs(5)).unwrap(),
            SolverVerdict::Sat
        );
    }

    #[test]
    fn conservativeness_on_concretely_reachable_bugs() {
        // Exhaustively determine reachability for a handful of small
        // programs over one 8-bit-equivalent input, then check refutation
        // never drops a reachable bug.
        let src = "\
int f(int a) {
  int d = 0;
  if ((a & 255) == 37) {
    return 10 / d;
  }
  return 0;
}
";
        let (reports, _) = crosschecked(src);
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0].status, ReportStatus::Confirmed);
    }

    fn arb_backward_list() -> impl Strategy<Value = Vec<PathConstraint>> {
        // Per symbol: a chain of nested intervals, emitted tightest-first
        // the way a backward path walk produces them, interleaved with a
        // few opaque parity conditions.
        let seg = (0u64..=255, 0u64..=255).prop_map(|(a, b)| (a.min(b), a.max(b)));
        let chain = proptest::collection::vec(seg, 1..4);
        (chain.clone(), chain, any::<bool>(), any::<bool>()).prop_map(
            |(c0, c1, t0, t1)| {
                let mut gen = SymbolGen::new();
                let xs = [
                    SymExpr::symbol(gen.fresh(
                        Width::W8,
                        Signedness::Unsigned,
                        "x",
                        SourceLoc::default(),
                    )),
                    SymExpr::symbol(gen.fresh(
                        Width::W8,
                        Signedness::Unsigned,
                        "y",
                        SourceLoc::default(),
                    )),
                ];
                let mut out = Vec::new();
                for (sym, chain, truth) in [(0, c0, t0), (1, c1, t1)] {
                    // Intersect progressively so the list is genuinely
                    // backward-ordered (each later entry a superset).
                    let mut lo = 0u64;
                    let mut hi = 255u64;
                    let mut nested = Vec::new();
                    for (a, b) in chain {
                        lo = lo.max(a);
                        hi = hi.min(b);
                        if lo > hi {
                            break;
                        }
                        nested.push(Interval::new(Width::W8, lo, hi).unwrap());
                    }
                    for iv in nested.iter().rev() {
                        out.push(PathConstraint::Interval {
                            var: xs[sym].clone(),
                            interval: *iv,
                        });
                    }
                    let parity = SymExpr::binop(
                        BinOpKind::Ne,
                        SymExpr::binop(
                            BinOpKind::And,
                            xs[sym].clone(),
                            SymExpr::lit(Width::W8, 1),
                        ),
                        SymExpr::lit(Width::W8, 0),
                    );
                    out.push(PathConstraint::Opaque { cond: parity, truth });
                }
                out
            },
        )
    }

    fn brute_force_sat(f: &SmtFormula) -> bool {
        let ids: Vec<_> = f.symbols().map(|s| s.id).collect();
        let n = ids.len();
        for assignment in 0u64..(1u64 << (8 * n)) {
            let env: Vec<_> = ids
                .iter()
                .enumerate()
                .map(|(i, id)| (*id, (assignment >> (8 * i)) & 0xff))
                .collect();
            let ok = f.assertions().iter().all(|a| match a {
                crate::smt::SmtAssertion::Point { expr, value } => {
                    eval_concrete(expr, &env).bits() == *value
                }
                crate::smt::SmtAssertion::Range { expr, lo, hi } => {
                    let v = eval_concrete(expr, &env).bits();
                    *lo <= v && v <= *hi
                }
                crate::smt::SmtAssertion::Cond { cond, truth } => {
                    !eval_concrete(cond, &env).is_zero() == *truth
                }
            });
            if ok {
                return true;
            }
        }
        false
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn skip_rule_preserves_satisfiability(cs in arb_backward_list()) {
            let mut with = SmtFormula::new();
            encode_constraints(&cs, &mut with, true);
            let mut without = SmtFormula::new();
            encode_constraints(&cs, &mut without, false);
            prop_assert_eq!(brute_force_sat(&with), brute_force_sat(&without));
        }

        #[test]
        fn encoder_matches_brute_force(cs in arb_backward_list()) {
            let mut f = SmtFormula::new();
            encode_constraints(&cs, &mut f, true);
            let got = SolverBackend::builtin().check(&f, Duration::from_secs(15)).unwrap();
            let want = if brute_force_sat(&f) { SolverVerdict::Sat } else { SolverVerdict::Unsat };
            prop_assert_eq!(got, want);
        }
    }
}
