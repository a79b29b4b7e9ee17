//! Core value and state representation shared by every analysis stage.

mod expr;
mod state;
mod value;

pub use expr::{is_unsupported_binop, ExprView, SymbolGen, SymbolId, SymbolOrigin, Symbol, SymExpr};
pub use state::{ConstraintMap, Interval, OpaqueCond, ProgramPoint, ProgramState, VarSlot};
pub use value::{
    eval_const, eval_smt_total, eval_unop, BinOpKind, BitVecValue, Signedness, UnOpKind,
    ValueError, Width,
};
