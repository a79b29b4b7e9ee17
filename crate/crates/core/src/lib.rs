//! refutelint-core: a path-sensitive analyzer for a small C subset.
//!
//! The pipeline has two stages. Symbolic execution over an exploded graph
//! uses a cheap interval solver to prune branches and flag candidate bugs
//! (null dereferences, division by zero). A second pass re-encodes each
//! candidate's path constraints as an SMT bit-vector formula and drops the
//! report if the formula is unsatisfiable. The second stage only ever
//! removes reports whose paths are provably infeasible; on timeout or any
//! solver trouble the report is kept.

pub mod checkers;
pub mod frontend;
pub mod intervals;
pub mod ir;
pub mod loc;
pub mod refute;
pub mod reports;
pub mod smt;
pub mod symexec;
