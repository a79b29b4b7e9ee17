//! Round-trips emitted SMT-LIB text through a real solver.
//!
//! The built-in solver works on `SymExpr` trees directly and never parses
//! the emitted text, so these tests are the only place the textual encoding
//! is checked end to end: random formulas must get the same verdict from
//! the in-process search, a brute-force enumeration, and `bvsat` parsing
//! the exact bytes `to_smtlib` produced.

use bvsat::{check_smt2, Verdict};
use proptest::prelude::*;
use refutelint_core::ir::{
    BinOpKind, BitVecValue, Signedness, SymExpr, Symbol, SymbolGen, UnOpKind, Width,
};
use refutelint_core::loc::SourceLoc;
use refutelint_core::smt::{
    check_sat_builtin_seq, eval_concrete, BuiltinConfig, SmtFormula, SolverVerdict,
};
use refutelint_core::{frontend, refute, reports, symexec};

fn two_symbols() -> (Symbol, Symbol) {
    let mut gen = SymbolGen::new();
    let a = gen.fresh(Width::W8, Signedness::Unsigned, "a", SourceLoc::new(1, 1));
    let b = gen.fresh(Width::W8, Signedness::Signed, "b", SourceLoc::new(1, 2));
    (a, b)
}

#[derive(Clone, Debug)]
enum Assertion {
    Point(SymExpr, u64),
    Range(SymExpr, u64, u64),
    Cond(SymExpr, bool),
}

fn apply(f: &mut SmtFormula, a: &Assertion) {
    match a {
        Assertion::Point(e, v) => f.assert_point(e.clone(), *v),
        Assertion::Range(e, lo, hi) => f.assert_range(e.clone(), *lo, *hi),
        Assertion::Cond(c, truth) => f.assert_cond(c.clone(), *truth),
    }
}

fn holds(a: &Assertion, env: &[(refutelint_core::ir::SymbolId, u64)]) -> bool {
    match a {
        Assertion::Point(e, v) => eval_concrete(e, env).bits() == *v,
        Assertion::Range(e, lo, hi) => {
            let got = eval_concrete(e, env).bits();
            *lo <= got && got <= *hi
        }
        Assertion::Cond(c, truth) => !eval_concrete(c, env).is_zero() == *truth,
    }
}

fn brute_force(assertions: &[Assertion], syms: &[Symbol]) -> SolverVerdict {
    let n = syms.len() as u32;
    for bits in 0..1u64 << (8 * n) {
        let env: Vec<_> = syms
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id, (bits >> (8 * i)) & 0xff))
            .collect();
        if assertions.iter().all(|a| holds(a, &env)) {
            return SolverVerdict::Sat;
        }
    }
    SolverVerdict::Unsat
}

fn bvsat_verdict(formula: &SmtFormula) -> SolverVerdict {
    match check_smt2(&formula.to_smtlib()).expect("emitted script must parse") {
        Verdict::Sat => SolverVerdict::Sat,
        Verdict::Unsat => SolverVerdict::Unsat,
    }
}

fn arb_expr(a: &Symbol, b: &Symbol) -> impl Strategy<Value = SymExpr> {
    let leaf = prop_oneof![
        (0u64..=255).prop_map(|v| SymExpr::lit(Width::W8, v)),
        Just(SymExpr::symbol(a.clone())),
        Just(SymExpr::symbol(b.clone())),
    ];
    leaf.prop_recursive(3, 24, 2, |inner| {
        let op = prop_oneof![
            Just(BinOpKind::Add),
            Just(BinOpKind::Sub),
            Just(BinOpKind::Mul),
            Just(BinOpKind::UDiv),
            Just(BinOpKind::SDiv),
            Just(BinOpKind::URem),
            Just(BinOpKind::SRem),
            Just(BinOpKind::And),
            Just(BinOpKind::Or),
            Just(BinOpKind::Xor),
            Just(BinOpKind::Shl),
            Just(BinOpKind::LShr),
            Just(BinOpKind::AShr),
        ];
        prop_oneof![
            (op, inner.clone(), inner.clone())
                .prop_map(|(op, l, r)| SymExpr::binop(op, l, r)),
            inner.clone().prop_map(|e| SymExpr::unop(UnOpKind::Neg, e)),
            inner.prop_map(|e| SymExpr::unop(UnOpKind::BitNot, e)),
        ]
    })
}

fn arb_assertion(a: &Symbol, b: &Symbol) -> impl Strategy<Value = Assertion> {
    let cmp = prop_oneof![
        Just(BinOpKind::Eq),
        Just(BinOpKind::Ne),
        Just(BinOpKind::Ult),
        Just(BinOpKind::Ule),
        Just(BinOpKind::Slt),
        Just(BinOpKind::Sge),
    ];
    prop_oneof![
        (arb_expr(a, b), 0u64..=255).prop_map(|(e, v)| Assertion::Point(e, v)),
        (arb_expr(a, b), 0u64..=255, 0u64..=255).prop_map(|(e, x, y)| {
            Assertion::Range(e, x.min(y), x.max(y))
        }),
        (cmp, arb_expr(a, b), arb_expr(a, b), any::<bool>()).prop_map(|(op, l, r, truth)| {
            Assertion::Cond(SymExpr::binop(op, l, r), truth)
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn emitted_text_builtin_search_and_enumeration_agree(
        assertions in {
            let (a, b) = two_symbols();
            prop::collection::vec(arb_assertion(&a, &b), 1..4)
        }
    ) {
        let (a, b) = two_symbols();
        let mut formula = SmtFormula::new();
        for assertion in &assertions {
            apply(&mut formula, assertion);
        }
        let expected = brute_force(&assertions, &[a, b]);
        prop_assert_eq!(bvsat_verdict(&formula), expected);
        let config = BuiltinConfig::default();
        prop_assert_eq!(check_sat_builtin_seq(&formula, &config), expected);
    }
}

#[test]
fn mixed_width_casts_survive_the_text_encoding() {
    let mut gen = SymbolGen::new();
    let c = gen.fresh(Width::W8, Signedness::Signed, "c", SourceLoc::new(1, 1));
    let widened = SymExpr::cast(Width::W32, true, SymExpr::symbol(c.clone()));
    let sum = SymExpr::binop(BinOpKind::Add, widened, SymExpr::lit(Width::W32, 1));
    let narrowed = SymExpr::cast(Width::W8, false, sum.clone());

    let mut sat = SmtFormula::new();
    sat.assert_point(narrowed.clone(), 0x80);
    assert_eq!(bvsat_verdict(&sat), SolverVerdict::Sat);

    let mut unsat = SmtFormula::new();
    unsat.assert_point(narrowed, 0x90);
    unsat.assert_point(SymExpr::symbol(c.clone()), 0x7f);
    assert_eq!(bvsat_verdict(&unsat), SolverVerdict::Unsat);

    let env = [(c.id, 0x7fu64)];
    assert_eq!(eval_concrete(&sum, &env), BitVecValue::new(Width::W32, 0x80));
}

#[test]
fn masked_guard_path_is_unsat_for_a_full_width_solver() {
    let src = "\
int f(int a) {
    int *z = 0;
    if ((a & 1) && !(a & 1))
        return *z;
    return 0;
}
";
    let cfgs = frontend::compile(src).unwrap();
    let graph = symexec::execute(&cfgs, &symexec::ExecConfig::default());
    let all = reports::collect_reports(&graph, "main.c");
    assert_eq!(all.len(), 1);
    let formula = refute::formula_for_report(&graph, &all[0]);
    let text = formula.to_smtlib();
    assert!(text.contains("(_ BitVec 32)"), "guard symbols stay at full width:\n{text}");
    assert_eq!(check_smt2(&text).unwrap(), Verdict::Unsat);
}

#[test]
fn feasible_guard_path_is_sat_for_a_full_width_solver() {
    let src = "\
int f(int a) {
    int *z = 0;
    if ((a & 3) == 1)
        return *z;
    return 0;
}
";
    let cfgs = frontend::compile(src).unwrap();
    let graph = symexec::execute(&cfgs, &symexec::ExecConfig::default());
    let all = reports::collect_reports(&graph, "main.c");
    assert_eq!(all.len(), 1);
    let formula = refute::formula_for_report(&graph, &all[0]);
    assert_eq!(check_smt2(&formula.to_smtlib()).unwrap(), Verdict::Sat);
}
