//! Random constraint material for differential solver testing.
//!
//! Two generators live here. [`random_formula`] emits solver queries the
//! way checkers would pose them: a conjunction of point, range, and
//! condition assertions over a few width-8 symbols. [`random_backward_list`]
//! emits raw path-constraint lists the way the exploded graph yields them:
//! walked violation-to-entry, so per variable the tightest interval comes
//! first and everything after it is at least as wide. That ordering is the
//! load-bearing invariant behind the encoder's subsumption skip.

use rand::{Rng, RngExt};
use refutelint_core::ir::{
    BinOpKind, Interval, Signedness, SymExpr, Symbol, SymbolGen, UnOpKind, Width,
};
use refutelint_core::loc::SourceLoc;
use refutelint_core::refute::PathConstraint;
use refutelint_core::smt::SmtFormula;

/// Fresh width-8 symbols with alternating signedness.
pub fn symbols(n: usize) -> Vec<Symbol> {
    let mut gen = SymbolGen::new();
    (0..n)
        .map(|i| {
            let sig = if i % 2 == 0 { Signedness::Unsigned } else { Signedness::Signed };
            gen.fresh(Width::W8, sig, "s", SourceLoc::new(1, 1 + i as u32))
        })
        .collect()
}

/// A random width-8 expression tree over the given symbols.
pub fn random_expr<R: Rng>(rng: &mut R, syms: &[Symbol], depth: u32) -> SymExpr {
    if depth == 0 || rng.random_bool(0.3) {
        return if rng.random_bool(0.55) {
            let i = rng.random_range(0..syms.len());
            SymExpr::symbol(syms[i].clone())
        } else {
            SymExpr::lit(Width::W8, rng.random_range(0..=255))
        };
    }
    if rng.random_bool(0.15) {
        let op = if rng.random_bool(0.5) { UnOpKind::Neg } else { UnOpKind::BitNot };
        return SymExpr::unop(op, random_expr(rng, syms, depth - 1));
    }
    const OPS: &[BinOpKind] = &[
        BinOpKind::Add,
        BinOpKind::Sub,
        BinOpKind::Mul,
        BinOpKind::UDiv,
        BinOpKind::SDiv,
        BinOpKind::URem,
        BinOpKind::SRem,
        BinOpKind::And,
        BinOpKind::Or,
        BinOpKind::Xor,
        BinOpKind::Shl,
        BinOpKind::LShr,
        BinOpKind::AShr,
    ];
    let op = OPS[rng.random_range(0..OPS.len())];
    let lhs = random_expr(rng, syms, depth - 1);
    let rhs = random_expr(rng, syms, depth - 1);
    SymExpr::binop(op, lhs, rhs)
}

fn random_cond<R: Rng>(rng: &mut R, syms: &[Symbol]) -> SymExpr {
    const CMPS: &[BinOpKind] = &[
        BinOpKind::Eq,
        BinOpKind::Ne,
        BinOpKind::Ult,
        BinOpKind::Ule,
        BinOpKind::Ugt,
        BinOpKind::Uge,
        BinOpKind::Slt,
        BinOpKind::Sle,
        BinOpKind::Sgt,
        BinOpKind::Sge,
    ];
    let op = CMPS[rng.random_range(0..CMPS.len())];
    let lhs = random_expr(rng, syms, 2);
    let rhs = if rng.random_bool(0.6) {
        SymExpr::lit(Width::W8, rng.random_range(0..=255))
    } else {
        random_expr(rng, syms, 2)
    };
    SymExpr::binop(op, lhs, rhs)
}

/// A random conjunction mixing interval-style and opaque assertions.
pub fn random_formula<R: Rng>(rng: &mut R, syms: &[Symbol]) -> SmtFormula {
    let mut f = SmtFormula::new();
    for _ in 0..rng.random_range(1..=5) {
        match rng.random_range(0..3) {
            0 => {
                let e = random_expr(rng, syms, 2);
                f.assert_point(e, rng.random_range(0..=255));
            }
            1 => {
                let e = random_expr(rng, syms, 2);
                let a = rng.random_range(0..=255);
                let b = rng.random_range(0..=255);
                f.assert_range(e, a.min(b), a.max(b));
            }
            _ => {
                let c = random_cond(rng, syms);
                f.assert_cond(c, rng.random_bool(0.5));
            }
        }
    }
    f
}

/// The expression a variable's interval records are keyed on.
fn tracked_var<R: Rng>(rng: &mut R, sym: &Symbol) -> SymExpr {
    if rng.random_bool(0.3) {
        let mask = [1u64, 3, 7, 15][rng.random_range(0..4)];
        SymExpr::binop(
            BinOpKind::And,
            SymExpr::symbol(sym.clone()),
            SymExpr::lit(Width::W8, mask),
        )
    } else {
        SymExpr::symbol(sym.clone())
    }
}

/// A backward-ordered constraint list: per tracked variable, a nested
/// chain of intervals starting at the tightest, interleaved with opaque
/// conditions (some repeated verbatim, as revisited nodes produce).
pub fn random_backward_list<R: Rng>(rng: &mut R, syms: &[Symbol]) -> Vec<PathConstraint> {
    let mut chains: Vec<Vec<PathConstraint>> = Vec::new();
    for sym in syms {
        if rng.random_bool(0.2) {
            continue;
        }
        let var = tracked_var(rng, sym);
        let tight_lo = rng.random_range(0..=255u64);
        let tight_hi = rng.random_range(tight_lo..=255);
        let mut lo = tight_lo;
        let mut hi = tight_hi;
        let mut chain = Vec::new();
        for _ in 0..rng.random_range(1..=3) {
            let interval = Interval::new(Width::W8, lo, hi).expect("lo <= hi");
            chain.push(PathConstraint::Interval { var: var.clone(), interval });
            lo = lo.saturating_sub(rng.random_range(0..=16));
            hi = (hi + rng.random_range(0..=16)).min(255);
        }
        chains.push(chain);
    }
    let mut opaques = Vec::new();
    for _ in 0..rng.random_range(0..=4) {
        let cond = random_cond(rng, syms);
        let truth = rng.random_bool(0.5);
        opaques.push(PathConstraint::Opaque { cond: cond.clone(), truth });
        if rng.random_bool(0.3) {
            // Same node revisited later in the walk: identical record.
            opaques.push(PathConstraint::Opaque { cond, truth });
        }
    }
    // Interleave while preserving each chain's internal order.
    let mut out = Vec::new();
    chains.push(opaques);
    let mut cursors: Vec<std::vec::IntoIter<PathConstraint>> =
        chains.into_iter().map(Vec::into_iter).collect();
    while !cursors.is_empty() {
        let i = rng.random_range(0..cursors.len());
        match cursors[i].next() {
            Some(c) => out.push(c),
            None => {
                cursors.swap_remove(i);
            }
        }
    }
    out
}
