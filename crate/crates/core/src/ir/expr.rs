//! Symbolic expressions: immutable trees over symbols and constants.
//!
//! Construction folds constant subtrees eagerly, so `5 + 3` never survives
//! as a tree and `y - y` collapses to `0`. Equality and hashing are
//! structural; the canonical prefix rendering (`Display`) is the form used
//! in debug dumps and golden tests.

use std::fmt;
use std::sync::Arc;

use crate::ir::value::{
    eval_const, eval_unop, BinOpKind, BitVecValue, Signedness, UnOpKind, Width,
};
use crate::loc::SourceLoc;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SymbolId(pub u32);

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "${}", self.0)
    }
}

/// Where a symbol came from, kept for diagnostics only.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SymbolOrigin {
    pub name: Arc<str>,
    pub loc: SourceLoc,
}

/// An unknown input: a function parameter, an external call result, or an
/// invalidated variable.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Symbol {
    pub id: SymbolId,
    pub width: Width,
    pub signedness: Signedness,
    pub origin: SymbolOrigin,
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id)
    }
}

/// Hands out symbols with strictly increasing ids. Each analyzed function
/// gets its own generator, which keeps runs deterministic without any
/// global state.
#[derive(Default, Debug)]
pub struct SymbolGen {
    next: u32,
}

impl SymbolGen {
    pub fn new() -> Self {
        SymbolGen { next: 0 }
    }

    pub fn fresh(&mut self, width: Width, signedness: Signedness, name: &str, loc: SourceLoc) -> Symbol {
        let id = SymbolId(self.next);
        self.next += 1;
        Symbol {
            id,
            width,
            signedness,
            origin: SymbolOrigin { name: Arc::from(name), loc },
        }
    }

    pub fn count(&self) -> u32 {
        self.next
    }
}

#[derive(PartialEq, Eq, Hash, Debug)]
enum NodeKind {
    Const(BitVecValue),
    Sym(Symbol),
    Un {
        op: UnOpKind,
        arg: SymExpr,
    },
    Bin {
        op: BinOpKind,
        lhs: SymExpr,
        rhs: SymExpr,
    },
    /// Width conversion. Narrowing always stores `signed: false` so that
    /// structurally identical truncations compare equal.
    Cast {
        signed: bool,
        arg: SymExpr,
    },
}

#[derive(PartialEq, Eq, Hash, Debug)]
struct Node {
    width: Width,
    kind: NodeKind,
}

/// A shared, immutable symbolic expression.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SymExpr(Arc<Node>);

impl SymExpr {
    pub fn constant(v: BitVecValue) -> Self {
        SymExpr(Arc::new(Node { width: v.width(), kind: NodeKind::Const(v) }))
    }

    pub fn lit(width: Width, bits: u64) -> Self {
        SymExpr::constant(BitVecValue::new(width, bits))
    }

    pub fn symbol(s: Symbol) -> Self {
        SymExpr(Arc::new(Node { width: s.width, kind: NodeKind::Sym(s) }))
    }

    pub fn binop(op: BinOpKind, lhs: SymExpr, rhs: SymExpr) -> Self {
        assert_eq!(lhs.width(), rhs.width(), "binop {op:?} on mismatched widths");
        let width = if op.is_comparison() { Width::W1 } else { lhs.width() };
        if let (Some(a), Some(b)) = (lhs.as_const(), rhs.as_const()) {
            // A constant zero divisor stays symbolic; the checker decides
            // what to do with it before any evaluation happens.
            if let Ok(v) = eval_const(op, a, b) {
                return SymExpr::constant(v);
            }
        }
        // x - x and x ^ x vanish regardless of what x is.
        if matches!(op, BinOpKind::Sub | BinOpKind::Xor) && lhs == rhs {
            return SymExpr::lit(width, 0);
        }
        SymExpr(Arc::new(Node { width, kind: NodeKind::Bin { op, lhs, rhs } }))
    }

    pub fn unop(op: UnOpKind, arg: SymExpr) -> Self {
        if let Some(v) = arg.as_const() {
            return SymExpr::constant(eval_unop(op, v));
        }
        let width = match op {
            UnOpKind::LogNot => Width::W1,
            _ => arg.width(),
        };
        SymExpr(Arc::new(Node { width, kind: NodeKind::Un { op, arg } }))
    }

    pub fn cast(target: Width, signed: bool, arg: SymExpr) -> Self {
        if target == arg.width() {
            return arg;
        }
        if let Some(v) = arg.as_const() {
            return SymExpr::constant(v.cast(target, signed));
        }
        let signed = if target.bits() < arg.width().bits() { false } else { signed };
        SymExpr(Arc::new(Node { width: target, kind: NodeKind::Cast { signed, arg } }))
    }

    pub fn width(&self) -> Width {
        self.0.width
    }

    pub fn as_const(&self) -> Option<BitVecValue> {
        match &self.0.kind {
            NodeKind::Const(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&Symbol> {
        match &self.0.kind {
            NodeKind::Sym(s) => Some(s),
            _ => None,
        }
    }

    /// A structured view for consumers that walk the tree.
    pub fn view(&self) -> ExprView<'_> {
        match &self.0.kind {
            NodeKind::Const(v) => ExprView::Const(*v),
            NodeKind::Sym(s) => ExprView::Sym(s),
            NodeKind::Un { op, arg } => ExprView::Un { op: *op, arg },
            NodeKind::Bin { op, lhs, rhs } => ExprView::Bin { op: *op, lhs, rhs },
            NodeKind::Cast { signed, arg } => ExprView::Cast {
                width: self.0.width,
                signed: *signed,
                arg,
            },
        }
    }

    /// Collect every distinct symbol in the tree, sorted by id.
    pub fn collect_symbols(&self, out: &mut Vec<Symbol>) {
        match &self.0.kind {
            NodeKind::Const(_) => {}
            NodeKind::Sym(s) => {
                if !out.iter().any(|o| o.id == s.id) {
                    out.push(s.clone());
                }
            }
            NodeKind::Un { arg, .. } | NodeKind::Cast { arg, .. } => arg.collect_symbols(out),
            NodeKind::Bin { lhs, rhs, .. } => {
                lhs.collect_symbols(out);
                rhs.collect_symbols(out);
            }
        }
    }

    /// Number of operator nodes (`Un` + `Bin`) in the tree. Casts are
    /// conversions, not operators, and do not count.
    pub fn operator_count(&self) -> usize {
        match &self.0.kind {
            NodeKind::Const(_) | NodeKind::Sym(_) => 0,
            NodeKind::Cast { arg, .. } => arg.operator_count(),
            NodeKind::Un { arg, .. } => 1 + arg.operator_count(),
            NodeKind::Bin { lhs, rhs, .. } => 1 + lhs.operator_count() + rhs.operator_count(),
        }
    }

    /// True if any operator from the unsupported set appears in the tree.
    pub fn contains_unsupported_op(&self) -> bool {
        match &self.0.kind {
            NodeKind::Const(_) | NodeKind::Sym(_) => false,
            NodeKind::Cast { arg, .. } => arg.contains_unsupported_op(),
            NodeKind::Un { op, arg } => *op == UnOpKind::BitNot || arg.contains_unsupported_op(),
            NodeKind::Bin { op, lhs, rhs } => {
                is_unsupported_binop(*op) || lhs.contains_unsupported_op() || rhs.contains_unsupported_op()
            }
        }
    }
}

/// The interval solver gives up on remainders, bitwise operators, and
/// shifts; those travel to the SMT stage as opaque conditions instead.
pub fn is_unsupported_binop(op: BinOpKind) -> bool {
    use BinOpKind::*;
    matches!(op, URem | SRem | And | Or | Xor | Shl | LShr | AShr)
}

pub enum ExprView<'a> {
    Const(BitVecValue),
    Sym(&'a Symbol),
    Un { op: UnOpKind, arg: &'a SymExpr },
    Bin { op: BinOpKind, lhs: &'a SymExpr, rhs: &'a SymExpr },
    Cast { width: Width, signed: bool, arg: &'a SymExpr },
}

impl fmt::Display for SymExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.kind {
            NodeKind::Const(v) => write!(f, "{v}"),
            NodeKind::Sym(s) => write!(f, "{s}"),
            NodeKind::Un { op, arg } => write!(f, "({} {arg})", op.name()),
            NodeKind::Bin { op, lhs, rhs } => write!(f, "({} {lhs} {rhs})", op.name()),
            NodeKind::Cast { signed, arg } => {
                let name = if self.0.width.bits() < arg.width().bits() {
                    "trunc"
                } else if *signed {
                    "sext"
                } else {
                    "zext"
                };
                write!(f, "({name}{} {arg})", self.0.width.bits())
            }
        }
    }
}

impl fmt::Debug for SymExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
