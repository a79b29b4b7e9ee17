//! The fast, deliberately imprecise constraint solver.
//!
//! Each symbolic expression gets at most one unsigned interval. Conditions
//! the solver cannot interpret (bitwise operators, remainders, compound
//! expressions, symbol-vs-symbol comparisons) do not refine anything; they
//! are recorded on the state as opaque path conditions so the SMT stage
//! can still reason about them. That split is the whole point: cheap
//! intervals decide feasibility during exploration, and whatever they
//! ignored or over-approximated stays visible for refutation.

use crate::ir::{BinOpKind, BitVecValue, Interval, OpaqueCond, ProgramState, SymExpr, UnOpKind, Width};

/// Why the interval solver accepts or rejects an expression.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SupportVerdict {
    Supported,
    /// Contains a remainder, bitwise, or shift operator anywhere.
    UnsupportedOperator,
    /// More than one operator above the leaves (a root comparison is free).
    TooComplex,
}

impl SupportVerdict {
    pub fn is_supported(self) -> bool {
        self == SupportVerdict::Supported
    }
}

/// Can the interval solver interpret `expr`? A comparison at the root does
/// not count toward the complexity budget; casts never count.
pub fn is_supported(expr: &SymExpr) -> SupportVerdict {
    if expr.contains_unsupported_op() {
        return SupportVerdict::UnsupportedOperator;
    }
    let ops = match expr.view() {
        crate::ir::ExprView::Bin { op, lhs, rhs } if op.is_comparison() => {
            lhs.operator_count() + rhs.operator_count()
        }
        _ => expr.operator_count(),
    };
    if ops > 1 {
        SupportVerdict::TooComplex
    } else {
        SupportVerdict::Supported
    }
}

/// The exact satisfying set of `operand <op> k` (with `truth` applied),
/// as at most two disjoint ascending unsigned segments. Two segments only
/// arise from signed comparisons that straddle the sign boundary and from
/// `!=` against an interior constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CmpSegments {
    pub width: Width,
    pub segments: Vec<Interval>,
}

impl CmpSegments {
    fn empty(width: Width) -> Self {
        CmpSegments { width, segments: Vec::new() }
    }

    fn one(width: Width, lo: u64, hi: u64) -> Self {
        CmpSegments { width, segments: vec![Interval::new(width, lo, hi).unwrap()] }
    }

    fn two(width: Width, a: Interval, b: Interval) -> Self {
        CmpSegments { width, segments: vec![a, b] }
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// True when the segments are a single interval, i.e. representable
    /// without loss.
    pub fn is_exact(&self) -> bool {
        self.segments.len() <= 1
    }

    /// The single conservative interval enclosing every segment. With two
    /// wrap-around segments this is the full range.
    pub fn enclosure(&self) -> Option<Interval> {
        match self.segments.as_slice() {
            [] => None,
            [iv] => Some(*iv),
            [a, b] => Interval::new(self.width, a.lo(), b.hi()),
            _ => unreachable!(),
        }
    }

    pub fn contains(&self, v: u64) -> bool {
        self.segments.iter().any(|s| s.contains(v))
    }
}

/// Satisfying values of `operand <op> k`, negated when `truth` is false.
/// `op` must be a comparison; `k`'s width is the operand width.
pub fn interval_for_comparison(op: BinOpKind, k: BitVecValue, truth: bool) -> CmpSegments {
    assert!(op.is_comparison(), "interval_for_comparison on {op:?}");
    let op = if truth { op } else { op.negate_comparison() };
    let w = k.width();
    let max = w.mask();
    let ku = k.bits();
    use BinOpKind::*;
    match op {
        Ult => {
            if ku == 0 {
                CmpSegments::empty(w)
            } else {
                CmpSegments::one(w, 0, ku - 1)
            }
        }
        Ule => CmpSegments::one(w, 0, ku),
        Ugt => {
            if ku == max {
                CmpSegments::empty(w)
            } else {
                CmpSegments::one(w, ku + 1, max)
            }
        }
        Uge => CmpSegments::one(w, ku, max),
        Eq => CmpSegments::one(w, ku, ku),
        Ne => {
            if ku == 0 {
                CmpSegments::one(w, 1, max)
            } else if ku == max {
                CmpSegments::one(w, 0, max - 1)
            } else {
                CmpSegments::two(
                    w,
                    Interval::new(w, 0, ku - 1).unwrap(),
                    Interval::new(w, ku + 1, max).unwrap(),
                )
            }
        }
        Slt | Sle | Sgt | Sge => {
            let min_s = -((w.sign_bit()) as i64);
            let max_s = (w.sign_bit() - 1) as i64;
            let ks = k.as_i64();
            let (lo_s, hi_s) = match op {
                Slt => (min_s, ks - 1),
                Sle => (min_s, ks),
                Sgt => (ks + 1, max_s),
                Sge => (ks, max_s),
                _ => unreachable!(),
            };
            if lo_s > hi_s {
                return CmpSegments::empty(w);
            }
            signed_range_to_segments(w, lo_s, hi_s)
        }
        _ => unreachable!(),
    }
}

/// Map a contiguous signed range onto unsigned segments: non-negative
/// values sit in the low half, negative values wrap into the high half.
fn signed_range_to_segments(w: Width, lo_s: i64, hi_s: i64) -> CmpSegments {
    let to_u = |s: i64| (s as u64) & w.mask();
    if lo_s >= 0 {
        CmpSegments::one(w, to_u(lo_s), to_u(hi_s))
    } else if hi_s < 0 {
        CmpSegments::one(w, to_u(lo_s), to_u(hi_s))
    } else {
        CmpSegments::two(
            w,
            Interval::new(w, 0, to_u(hi_s)).unwrap(),
            Interval::new(w, to_u(lo_s), w.mask()).unwrap(),
        )
    }
}

/// Apply a branch condition to `state`.
///
/// Returns `None` when the intervals prove the branch infeasible.
/// Otherwise returns the refined state: a supported comparison against a
/// constant tightens the operand's interval; anything lossy or opaque is
/// recorded as an opaque path condition (plus a trivially-true map entry)
/// for the SMT stage.
pub fn assume(state: &ProgramState, cond: &SymExpr, truth: bool) -> Option<ProgramState> {
    // `!e` means `e == 0`.
    if let crate::ir::ExprView::Un { op: UnOpKind::LogNot, arg } = cond.view() {
        let ne_zero = SymExpr::binop(BinOpKind::Ne, arg.clone(), SymExpr::lit(arg.width(), 0));
        return assume(state, &ne_zero, !truth);
    }
    if let Some(c) = cond.as_const() {
        return if !c.is_zero() == truth { Some(state.clone()) } else { None };
    }
    debug_assert_eq!(cond.width(), Width::W1, "assume on non-boolean condition");

    if let crate::ir::ExprView::Bin { op, lhs, rhs } = cond.view() {
        if op.is_comparison() {
            let (operand, k, op) = match (lhs.as_const(), rhs.as_const()) {
                (None, Some(k)) => (lhs, k, op),
                (Some(k), None) => (rhs, k, op.mirror_comparison()),
                // Symbol-vs-symbol: opaque.
                (None, None) => return Some(record_opaque(state, lhs, cond, truth)),
                (Some(_), Some(_)) => unreachable!("const comparison folds at construction"),
            };
            if !is_supported(cond).is_supported() {
                return Some(record_opaque(state, operand, cond, truth));
            }
            let segments = interval_for_comparison(op, k, truth);
            let existing = state.interval_of(operand);
            let surviving: Vec<Interval> = segments
                .segments
                .iter()
                .filter_map(|s| s.intersect(&existing))
                .collect();
            return match surviving.as_slice() {
                [] => None,
                [exact] => {
                    let mut next = state.clone();
                    let ok = next.constraints.refine(operand.clone(), *exact);
                    debug_assert!(ok);
                    Some(next)
                }
                [a, b] => {
                    // Two surviving segments cannot be represented; keep
                    // their enclosure and let the SMT stage see the rest.
                    let hull = Interval::new(cond_width(operand), a.lo(), b.hi()).unwrap();
                    let mut next = state.clone();
                    let ok = next.constraints.refine(operand.clone(), hull);
                    debug_assert!(ok);
                    next.opaque.push(OpaqueCond { cond: cond.clone(), truth });
                    Some(next)
                }
                _ => unreachable!(),
            };
        }
    }

    // Any other width-1 expression: treat as `cond != 0`.
    let ne_zero = SymExpr::binop(BinOpKind::Ne, cond.clone(), SymExpr::lit(Width::W1, 0));
    assume(state, &ne_zero, truth)
}

fn cond_width(operand: &SymExpr) -> Width {
    operand.width()
}

fn record_opaque(state: &ProgramState, keyed: &SymExpr, cond: &SymExpr, truth: bool) -> ProgramState {
    let mut next = state.clone();
    next.constraints.ensure_entry(keyed.clone());
    next.opaque.push(OpaqueCond { cond: cond.clone(), truth });
    next
}
