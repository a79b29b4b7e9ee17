//! Sequential vs parallel builtin-solver walks on formulas big enough for
//! the work split to engage. The contradiction formulas force a full scan
//! of the influencing bits (worst case); the pruned conjunction shows the
//! planner collapsing the same nominal space to a few hundred probes.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use refutelint_core::ir::{BinOpKind, Signedness, SymExpr, Symbol, SymbolGen, Width};
use refutelint_core::loc::SourceLoc;
use refutelint_core::smt::{
    check_sat_builtin_par, check_sat_builtin_seq, BuiltinConfig, SmtFormula,
};

fn syms(n: usize) -> Vec<Symbol> {
    let mut gen = SymbolGen::new();
    (0..n)
        .map(|i| gen.fresh(Width::W8, Signedness::Unsigned, "v", SourceLoc::new(1, 1 + i as u32)))
        .collect()
}

/// `term < 0` is unsatisfiable for unsigned compare, but nothing in the
/// solver folds it away, so every candidate assignment gets evaluated.
fn never(term: SymExpr) -> SmtFormula {
    let mut f = SmtFormula::new();
    let zero = SymExpr::lit(term.width(), 0);
    f.assert_cond(SymExpr::binop(BinOpKind::Ult, term, zero), true);
    f
}

fn contradiction(bits: u32) -> SmtFormula {
    let s = syms(3);
    let (x, y, z) = (
        SymExpr::symbol(s[0].clone()),
        SymExpr::symbol(s[1].clone()),
        SymExpr::symbol(s[2].clone()),
    );
    let xy = SymExpr::binop(BinOpKind::Xor, x, y);
    match bits {
        16 => never(xy),
        20 => {
            let nibble = SymExpr::binop(BinOpKind::And, z, SymExpr::lit(Width::W8, 0x0f));
            never(SymExpr::binop(BinOpKind::Xor, xy, nibble))
        }
        24 => never(SymExpr::binop(BinOpKind::Xor, xy, z)),
        _ => unreachable!(),
    }
}

/// Two forced single-variable constraints plus a pair check they satisfy.
/// Nominally 16 bits of space; the search visits a few hundred points.
fn pruned_conjunction() -> SmtFormula {
    let s = syms(2);
    let (x, y) = (SymExpr::symbol(s[0].clone()), SymExpr::symbol(s[1].clone()));
    let mut f = SmtFormula::new();
    f.assert_point(
        SymExpr::binop(BinOpKind::Xor, x.clone(), SymExpr::lit(Width::W8, 0xa5)),
        0,
    );
    f.assert_point(
        SymExpr::binop(BinOpKind::Xor, y.clone(), SymExpr::lit(Width::W8, 0x3c)),
        0,
    );
    f.assert_cond(
        SymExpr::binop(
            BinOpKind::Eq,
            SymExpr::binop(BinOpKind::Xor, x, y),
            SymExpr::lit(Width::W8, 0xa5 ^ 0x3c),
        ),
        true,
    );
    f
}

fn solver_benches(c: &mut Criterion) {
    let config = BuiltinConfig::default();
    let mut group = c.benchmark_group("builtin_solver");
    group.sample_size(20);
    for bits in [16u32, 20, 24] {
        let f = contradiction(bits);
        group.bench_function(format!("contradiction_{bits}bit/seq"), |b| {
            b.iter(|| black_box(check_sat_builtin_seq(black_box(&f), &config)))
        });
        group.bench_function(format!("contradiction_{bits}bit/par"), |b| {
            b.iter(|| black_box(check_sat_builtin_par(black_box(&f), &config)))
        });
    }
    let f = pruned_conjunction();
    group.bench_function("pruned_conjunction/seq", |b| {
        b.iter(|| black_box(check_sat_builtin_seq(black_box(&f), &config)))
    });
    group.bench_function("pruned_conjunction/par", |b| {
        b.iter(|| black_box(check_sat_builtin_par(black_box(&f), &config)))
    });
    group.finish();
}

criterion_group!(benches, solver_benches);
criterion_main!(benches);
