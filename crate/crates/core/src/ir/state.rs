//! Per-path analysis state: the variable environment, the interval
//! constraint map, and the side list of opaque path conditions.

use std::fmt;

use indexmap::IndexMap;

use crate::ir::expr::{Symbol, SymbolId, SymExpr};
use crate::ir::value::Width;

/// A closed unsigned interval `[lo, hi]` at a fixed width.
/// Invariant: `lo <= hi <= width.mask()`. The empty set has no
/// representation; operations that would produce it return `None`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Interval {
    width: Width,
    lo: u64,
    hi: u64,
}

impl Interval {
    pub fn new(width: Width, lo: u64, hi: u64) -> Option<Interval> {
        if lo <= hi && hi <= width.mask() {
            Some(Interval { width, lo, hi })
        } else {
            None
        }
    }

    /// The unconstrained interval `[0, 2^w - 1]`.
    pub fn full(width: Width) -> Interval {
        Interval { width, lo: 0, hi: width.mask() }
    }

    pub fn point(width: Width, v: u64) -> Interval {
        debug_assert!(v <= width.mask());
        Interval { width, lo: v, hi: v }
    }

    pub fn width(&self) -> Width {
        self.width
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn contains(&self, v: u64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_full(&self) -> bool {
        self.lo == 0 && self.hi == self.width.mask()
    }

    /// `None` when the intervals do not overlap.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        debug_assert_eq!(self.width, other.width);
        Interval::new(self.width, self.lo.max(other.lo), self.hi.min(other.hi))
    }

    /// True if `self` is contained in `other`.
    pub fn subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Ordered map from symbolic expression to its known interval. Insertion
/// order is preserved so dumps and collected constraints are deterministic.
#[derive(Clone, Default, Debug)]
pub struct ConstraintMap {
    entries: IndexMap<SymExpr, Interval>,
}

impl ConstraintMap {
    pub fn new() -> Self {
        ConstraintMap::default()
    }

    pub fn get(&self, expr: &SymExpr) -> Option<&Interval> {
        self.entries.get(expr)
    }

    /// Intersect `interval` with whatever is already known about `expr`.
    /// Returns `false` if the result would be empty (infeasible); the map
    /// is left untouched in that case.
    pub fn refine(&mut self, expr: SymExpr, interval: Interval) -> bool {
        match self.entries.get_mut(&expr) {
            Some(existing) => match existing.intersect(&interval) {
                Some(tighter) => {
                    *existing = tighter;
                    true
                }
                None => false,
            },
            None => {
                self.entries.insert(expr, interval);
                true
            }
        }
    }

    /// Record the trivially-true full range for `expr` unless something
    /// tighter is already known.
    pub fn ensure_entry(&mut self, expr: SymExpr) {
        let w = expr.width();
        self.entries.entry(expr).or_insert_with(|| Interval::full(w));
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SymExpr, &Interval)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl fmt::Display for ConstraintMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (e, iv)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e} in {iv}")?;
        }
        write!(f, "}}")
    }
}

/// A path condition the interval solver could not interpret, recorded
/// verbatim so the SMT stage can still see it.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct OpaqueCond {
    pub cond: SymExpr,
    pub truth: bool,
}

impl fmt::Display for OpaqueCond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} = {})", self.cond, self.truth)
    }
}

/// A runtime storage slot. Each declaration instance (per inlined
/// activation) gets its own slot, so shadowing and recursion cannot
/// confuse bindings.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct VarSlot(pub u32);

/// Where in the program a state sits: function, basic block, statement.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct ProgramPoint {
    pub func: u32,
    pub block: u32,
    pub stmt: u32,
}

impl fmt::Display for ProgramPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}:b{}:s{}", self.func, self.block, self.stmt)
    }
}

/// The full per-path state: variable bindings, interval constraints,
/// opaque conditions, and address bookkeeping for `&v`.
#[derive(Clone, Default, Debug)]
pub struct ProgramState {
    pub env: IndexMap<VarSlot, SymExpr>,
    pub constraints: ConstraintMap,
    pub opaque: Vec<OpaqueCond>,
    /// Slot -> the symbol standing for that slot's address. One symbol per
    /// slot, created on first `&v`, always constrained nonzero.
    pub addrs: IndexMap<VarSlot, Symbol>,
    pub point: ProgramPoint,
}

impl ProgramState {
    pub fn new() -> Self {
        ProgramState::default()
    }

    pub fn bind(&mut self, slot: VarSlot, value: SymExpr) {
        self.env.insert(slot, value);
    }

    pub fn lookup(&self, slot: VarSlot) -> Option<&SymExpr> {
        self.env.get(&slot)
    }

    /// If `sym` is the address of some slot, name that slot.
    pub fn pointee_of(&self, sym: SymbolId) -> Option<VarSlot> {
        self.addrs.iter().find(|(_, s)| s.id == sym).map(|(slot, _)| *slot)
    }

    /// The interval currently known for `expr`: a point for constants, the
    /// recorded interval if present, otherwise the full range.
    pub fn interval_of(&self, expr: &SymExpr) -> Interval {
        if let Some(c) = expr.as_const() {
            return Interval::point(c.width(), c.bits());
        }
        self.constraints
            .get(expr)
            .copied()
            .unwrap_or_else(|| Interval::full(expr.width()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::value::{BitVecValue, Signedness};
    use crate::ir::expr::SymbolGen;
    use crate::loc::SourceLoc;

    #[test]
    fn interval_invariants() {
        assert!(Interval::new(Width::W8, 5, 3).is_none());
        assert!(Interval::new(Width::W8, 0, 256).is_none());
        let iv = Interval::new(Width::W8, 2, 7).unwrap();
        assert!(iv.contains(2) && iv.contains(7) && !iv.contains(8));
        assert!(Interval::full(Width::W64).contains(u64::MAX));
    }

    #[test]
    fn intersect() {
        let a = Interval::new(Width::W8, 0, 9).unwrap();
        let b = Interval::new(Width::W8, 4, 20).unwrap();
        assert_eq!(a.intersect(&b), Interval::new(Width::W8, 4, 9));
        let c = Interval::new(Width::W8, 10, 11).unwrap();
        assert!(a.intersect(&c).is_none());
    }

    #[test]
    fn refine_tightens_never_widens() {
        let mut gen = SymbolGen::new();
        let a = SymExpr::symbol(gen.fresh(Width::W8, Signedness::Unsigned, "a", SourceLoc::default()));
        let mut map = ConstraintMap::new();
        assert!(map.refine(a.clone(), Interval::new(Width::W8, 0, 9).unwrap()));
        assert!(map.refine(a.clone(), Interval::new(Width::W8, 4, 200).unwrap()));
        assert_eq!(*map.get(&a).unwrap(), Interval::new(Width::W8, 4, 9).unwrap());
        // Disjoint refinement reports infeasibility and leaves the entry alone.
        assert!(!map.refine(a.clone(), Interval::new(Width::W8, 100, 101).unwrap()));
        assert_eq!(*map.get(&a).unwrap(), Interval::new(Width::W8, 4, 9).unwrap());
    }

    #[test]
    fn ensure_entry_does_not_clobber() {
        let mut gen = SymbolGen::new();
        let a = SymExpr::symbol(gen.fresh(Width::W8, Signedness::Unsigned, "a", SourceLoc::default()));
        let mut map = ConstraintMap::new();
        map.refine(a.clone(), Interval::new(Width::W8, 1, 2).unwrap());
        map.ensure_entry(a.clone());
        assert_eq!(*map.get(&a).unwrap(), Interval::new(Width::W8, 1, 2).unwrap());
    }

    #[test]
    fn interval_of_constant_is_point() {
        let st = ProgramState::new();
        let z = SymExpr::constant(BitVecValue::zero(Width::W64));
        assert_eq!(st.interval_of(&z), Interval::point(Width::W64, 0));
    }
}
