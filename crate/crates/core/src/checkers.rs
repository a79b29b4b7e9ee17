//! Bug checkers consulted by the symbolic executor at dangerous
//! operations: pointer dereferences and integer divisions.
//!
//! A checker fires as soon as the bad value is *admitted* by the value's
//! interval on the current path. It stays silent only when the intervals
//! already exclude the bad value, so the checkers are exactly as precise as
//! the interval solver and no more; weeding out the resulting infeasible
//! reports is the refutation stage's job.

use crate::ir::{ProgramState, SymExpr};
use crate::loc::SourceLoc;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, serde::Serialize)]
pub enum CheckerId {
    NullDeref,
    DivZero,
}

impl CheckerId {
    pub fn name(self) -> &'static str {
        match self {
            CheckerId::NullDeref => "core.NullDereference",
            CheckerId::DivZero => "core.DivideZero",
        }
    }
}

impl std::fmt::Display for CheckerId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// What a checker concluded about one dangerous value on one path.
#[derive(Clone, Debug)]
pub enum CheckOutcome {
    /// The bad value is ruled out; nothing to do.
    Safe,
    /// The value can be bad here; the path ends in a violation node.
    Violation(BugHypothesis),
}

/// The claim attached to a violation node: at `loc`, `expr` equals the bad
/// value (always zero for the current checkers).
#[derive(Clone, Debug)]
pub struct BugHypothesis {
    pub checker: CheckerId,
    pub message: String,
    pub loc: SourceLoc,
    pub expr: SymExpr,
}

fn admits_zero(state: &ProgramState, value: &SymExpr) -> bool {
    state.interval_of(value).contains(0)
}

/// Check a pointer about to be dereferenced. `source_var` is the variable
/// the pointer was read from, if there was one, and only shapes the
/// diagnostic text.
pub fn check_deref(
    state: &ProgramState,
    ptr: &SymExpr,
    loc: SourceLoc,
    source_var: Option<&str>,
) -> CheckOutcome {
    if !admits_zero(state, ptr) {
        return CheckOutcome::Safe;
    }
    let message = match source_var {
        Some(name) => {
            format!("Dereference of null pointer (loaded from variable '{name}')")
        }
        None => "Dereference of null pointer".to_string(),
    };
    CheckOutcome::Violation(BugHypothesis {
        checker: CheckerId::NullDeref,
        message,
        loc,
        expr: ptr.clone(),
    })
}

/// Check the divisor of a `/` or `%`.
pub fn check_division(state: &ProgramState, divisor: &SymExpr, loc: SourceLoc) -> CheckOutcome {
    if !admits_zero(state, divisor) {
        return CheckOutcome::Safe;
    }
    CheckOutcome::Violation(BugHypothesis {
        checker: CheckerId::DivZero,
        message: "Division by zero".to_string(),
        loc,
        expr: divisor.clone(),
    })
}
