//! Test-support crate: random program generation, random constraint
//! generation, and a reference interpreter that decides ground truth by
//! concrete execution. Everything here exists to check the analyzer from
//! the outside; nothing in the shipping pipeline depends on it.

pub mod genconstraints;
pub mod genprog;
pub mod interp;
