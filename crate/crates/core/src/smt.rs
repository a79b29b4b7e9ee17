//! SMT formula construction and solving for the refutation stage.
//!
//! Formulas are built from path constraints, printed as SMT-LIB 2 in the
//! quantifier-free bitvector logic, and discharged either by an external
//! solver process or by the built-in solver. The built-in solver is a
//! bounded model finder: it enumerates assignments over just the input
//! bits that can influence the assertions, which keeps programs like a
//! parity test over a 32-bit value down to a couple of bits of real work.

use std::fmt::Write as _;
use std::io::Write as _;
use std::time::{Duration, Instant};

use indexmap::IndexMap;

use crate::ir::{
    eval_smt_total, eval_unop, BinOpKind, BitVecValue, ExprView, SymExpr, Symbol,
    SymbolId, UnOpKind, Width,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SmtAssertion {
    /// `expr == value`
    Point { expr: SymExpr, value: u64 },
    /// `lo <= expr <= hi`, unsigned
    Range { expr: SymExpr, lo: u64, hi: u64 },
    /// `cond == truth` for a width-1 condition
    Cond { cond: SymExpr, truth: bool },
}

#[derive(Clone, Debug, Default)]
pub struct SmtFormula {
    symbols: IndexMap<SymbolId, Symbol>,
    assertions: Vec<SmtAssertion>,
}

impl SmtFormula {
    pub fn new() -> Self {
        SmtFormula::default()
    }

    pub fn assertions(&self) -> &[SmtAssertion] {
        &self.assertions
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.values()
    }

    pub fn assert_point(&mut self, expr: SymExpr, value: u64) {
        self.note(&expr);
        self.assertions.push(SmtAssertion::Point { expr, value });
    }

    pub fn assert_range(&mut self, expr: SymExpr, lo: u64, hi: u64) {
        debug_assert!(lo <= hi);
        self.note(&expr);
        self.assertions.push(SmtAssertion::Range { expr, lo, hi });
    }

    pub fn assert_cond(&mut self, cond: SymExpr, truth: bool) {
        debug_assert_eq!(cond.width(), Width::W1);
        self.note(&cond);
        self.assertions.push(SmtAssertion::Cond { cond, truth });
    }

    fn note(&mut self, expr: &SymExpr) {
        let mut syms = Vec::new();
        expr.collect_symbols(&mut syms);
        for s in syms {
            self.symbols.entry(s.id).or_insert(s);
        }
    }

    /// Render as SMT-LIB 2 text. Declarations come out in symbol-id order
    /// and the whole rendering is byte-deterministic.
    pub fn to_smtlib(&self) -> String {
        let mut out = String::new();
        out.push_str("(set-logic QF_BV)\n");
        let mut ids: Vec<&Symbol> = self.symbols.values().collect();
        ids.sort_by_key(|s| s.id.0);
        for sym in ids {
            let _ = writeln!(
                out,
                "(declare-fun ${} () (_ BitVec {}))",
                sym.id.0,
                sym.width.bits()
            );
        }
        for a in &self.assertions {
            match a {
                SmtAssertion::Point { expr, value } => {
                    let _ = writeln!(
                        out,
                        "(assert (= {} {}))",
                        term(expr),
                        hex(expr.width(), *value)
                    );
                }
                SmtAssertion::Range { expr, lo, hi } => {
                    let t = term(expr);
                    let w = expr.width();
                    let lower = (*lo != 0).then(|| format!("(bvuge {t} {})", hex(w, *lo)));
                    let upper =
                        (*hi != w.mask()).then(|| format!("(bvule {t} {})", hex(w, *hi)));
                    let body = match (lower, upper) {
                        (Some(l), Some(u)) => format!("(and {l} {u})"),
                        (Some(l), None) => l,
                        (None, Some(u)) => u,
                        (None, None) => "true".to_string(),
                    };
                    let _ = writeln!(out, "(assert {body})");
                }
                SmtAssertion::Cond { cond, truth } => {
                    let b = boolean(cond);
                    if *truth {
                        let _ = writeln!(out, "(assert {b})");
                    } else {
                        let _ = writeln!(out, "(assert (not {b}))");
                    }
                }
            }
        }
        out.push_str("(check-sat)\n");
        out
    }
}

fn hex(w: Width, v: u64) -> String {
    let v = v & w.mask();
    match w {
        Width::W1 => format!("#b{v}"),
        Width::W8 => format!("#x{v:02x}"),
        Width::W32 => format!("#x{v:08x}"),
        Width::W64 => format!("#x{v:016x}"),
    }
}

/// Encode an expression as a bitvector term.
fn term(e: &SymExpr) -> String {
    match e.view() {
        ExprView::Const(c) => hex(c.width(), c.bits()),
        ExprView::Sym(s) => format!("${}", s.id.0),
        ExprView::Bin { op, lhs, rhs } => {
            if op.is_comparison() {
                format!("(ite {} #b1 #b0)", boolean(e))
            } else {
                let name = match op {
                    BinOpKind::Add => "bvadd",
                    BinOpKind::Sub => "bvsub",
                    BinOpKind::Mul => "bvmul",
                    BinOpKind::UDiv => "bvudiv",
                    BinOpKind::SDiv => "bvsdiv",
                    BinOpKind::URem => "bvurem",
                    BinOpKind::SRem => "bvsrem",
                    BinOpKind::And => "bvand",
                    BinOpKind::Or => "bvor",
                    BinOpKind::Xor => "bvxor",
                    BinOpKind::Shl => "bvshl",
                    BinOpKind::LShr => "bvlshr",
                    BinOpKind::AShr => "bvashr",
                    _ => unreachable!(),
                };
                format!("({name} {} {})", term(lhs), term(rhs))
            }
        }
        ExprView::Un { op, arg } => match op {
            UnOpKind::Neg => format!("(bvneg {})", term(arg)),
            UnOpKind::BitNot => format!("(bvnot {})", term(arg)),
            UnOpKind::LogNot => format!("(ite {} #b1 #b0)", boolean(e)),
        },
        ExprView::Cast { signed, arg, .. } => {
            let from = arg.width().bits();
            let to = e.width().bits();
            if to > from {
                let op = if signed { "sign_extend" } else { "zero_extend" };
                format!("((_ {op} {}) {})", to - from, term(arg))
            } else {
                format!("((_ extract {} 0) {})", to - 1, term(arg))
            }
        }
    }
}

/// Encode a width-1 expression as an SMT boolean.
fn boolean(e: &SymExpr) -> String {
    debug_assert_eq!(e.width(), Width::W1);
    match e.view() {
        ExprView::Const(c) => if c.is_zero() { "false" } else { "true" }.to_string(),
        ExprView::Bin { op, lhs, rhs } if op.is_comparison() => {
            let (l, r) = (term(lhs), term(rhs));
            match op {
                BinOpKind::Eq => format!("(= {l} {r})"),
                BinOpKind::Ne => format!("(not (= {l} {r}))"),
                BinOpKind::Ult => format!("(bvult {l} {r})"),
                BinOpKind::Ule => format!("(bvule {l} {r})"),
                BinOpKind::Ugt => format!("(bvugt {l} {r})"),
                BinOpKind::Uge => format!("(bvuge {l} {r})"),
                BinOpKind::Slt => format!("(bvslt {l} {r})"),
                BinOpKind::Sle => format!("(bvsle {l} {r})"),
                BinOpKind::Sgt => format!("(bvsgt {l} {r})"),
                BinOpKind::Sge => format!("(bvsge {l} {r})"),
                _ => unreachable!(),
            }
        }
        ExprView::Un { op: UnOpKind::LogNot, arg } => {
            format!("(= {} {})", term(arg), hex(arg.width(), 0))
        }
        // Any other width-1 term: true iff equal to 1.
        _ => format!("(= {} #b1)", term(e)),
    }
}

/// Evaluate an expression under a concrete assignment of its symbols,
/// using the same total division semantics SMT-LIB defines.
pub fn eval_concrete(e: &SymExpr, env: &[(SymbolId, u64)]) -> BitVecValue {
    match e.view() {
        ExprView::Const(c) => c,
        ExprView::Sym(s) => {
            let bits = env
                .iter()
                .find(|(id, _)| *id == s.id)
                .map(|(_, v)| *v)
                .unwrap_or(0);
            BitVecValue::new(s.width, bits)
        }
        ExprView::Bin { op, lhs, rhs } => {
            eval_smt_total(op, eval_concrete(lhs, env), eval_concrete(rhs, env))
        }
        ExprView::Un { op, arg } => eval_unop(op, eval_concrete(arg, env)),
        ExprView::Cast { signed, arg, .. } => {
            eval_concrete(arg, env).cast(e.width(), signed)
        }
    }
}

/// Whether an assertion holds under a concrete assignment. This is the
/// reference semantics; the compiled search below must agree with it on
/// every input.
pub fn assertion_holds(a: &SmtAssertion, env: &[(SymbolId, u64)]) -> bool {
    match a {
        SmtAssertion::Point { expr, value } => {
            eval_concrete(expr, env).bits() == (*value & expr.width().mask())
        }
        SmtAssertion::Range { expr, lo, hi } => {
            let v = eval_concrete(expr, env).bits();
            *lo <= v && v <= *hi
        }
        SmtAssertion::Cond { cond, truth } => {
            !eval_concrete(cond, env).is_zero() == *truth
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, serde::Serialize)]
pub enum SolverVerdict {
    Sat,
    Unsat,
    Unknown(UnknownReason),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, serde::Serialize)]
pub enum UnknownReason {
    Timeout,
    OverBudget,
    SolverError,
}

impl std::fmt::Display for SolverVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolverVerdict::Sat => write!(f, "sat"),
            SolverVerdict::Unsat => write!(f, "unsat"),
            SolverVerdict::Unknown(UnknownReason::Timeout) => write!(f, "unknown (timeout)"),
            SolverVerdict::Unknown(UnknownReason::OverBudget) => {
                write!(f, "unknown (over budget)")
            }
            SolverVerdict::Unknown(UnknownReason::SolverError) => {
                write!(f, "unknown (solver error)")
            }
        }
    }
}

/// Budgets for the built-in solver.
#[derive(Clone, Copy, Debug)]
pub struct BuiltinConfig {
    /// Maximum total influencing bits enumerated; beyond this the solver
    /// answers unknown rather than grind.
    pub max_bits: u32,
    pub timeout: Duration,
}

impl Default for BuiltinConfig {
    fn default() -> Self {
        BuiltinConfig { max_bits: 24, timeout: Duration::from_secs(15) }
    }
}

/// Per-symbol masks of bits that can influence the listed assertions. Bits
/// outside the mask are provably irrelevant and get fixed to zero during
/// enumeration.
fn influence_masks_for(
    formula: &SmtFormula,
    idxs: &[usize],
) -> IndexMap<SymbolId, (Width, u64)> {
    let mut masks: IndexMap<SymbolId, (Width, u64)> = IndexMap::new();
    for &i in idxs {
        match &formula.assertions[i] {
            SmtAssertion::Point { expr, .. } | SmtAssertion::Range { expr, .. } => {
                demand(expr, expr.width().mask(), &mut masks);
            }
            SmtAssertion::Cond { cond, .. } => {
                demand(cond, Width::W1.mask(), &mut masks);
            }
        }
    }
    masks
}

/// Mark which bits of the symbols under `e` can affect the demanded output
/// bits `out`. Conservative: may demand extra bits, never too few.
fn demand(e: &SymExpr, out: u64, masks: &mut IndexMap<SymbolId, (Width, u64)>) {
    if out == 0 {
        return;
    }
    let w = e.width();
    let out = out & w.mask();
    match e.view() {
        ExprView::Const(_) => {}
        ExprView::Sym(s) => {
            masks.entry(s.id).or_insert((s.width, 0)).1 |= out;
        }
        ExprView::Bin { op, lhs, rhs } => {
            use BinOpKind::*;
            match op {
                And | Or => {
                    // A constant mask blanks out some operand bits.
                    let (l_out, r_out) = match (lhs.as_const(), rhs.as_const()) {
                        (_, Some(c)) if op == And => (out & c.bits(), 0),
                        (_, Some(c)) => (out & !c.bits(), 0),
                        (Some(c), _) if op == And => (0, out & c.bits()),
                        (Some(c), _) => (0, out & !c.bits()),
                        _ => (out, out),
                    };
                    demand(lhs, l_out, masks);
                    demand(rhs, r_out, masks);
                }
                Xor => {
                    demand(lhs, out, masks);
                    demand(rhs, out, masks);
                }
                Shl => match rhs.as_const() {
                    Some(k) if k.bits() < w.bits() as u64 => {
                        demand(lhs, out >> k.bits(), masks);
                    }
                    Some(_) => {}
                    None => {
                        demand(lhs, w.mask(), masks);
                        demand(rhs, w.mask(), masks);
                    }
                },
                LShr => match rhs.as_const() {
                    Some(k) if k.bits() < w.bits() as u64 => {
                        demand(lhs, (out << k.bits()) & w.mask(), masks);
                    }
                    Some(_) => {}
                    None => {
                        demand(lhs, w.mask(), masks);
                        demand(rhs, w.mask(), masks);
                    }
                },
                AShr => match rhs.as_const() {
                    Some(k) if k.bits() < w.bits() as u64 => {
                        let shifted = (out << k.bits()) & w.mask();
                        demand(lhs, shifted | w.sign_bit(), masks);
                    }
                    Some(_) => demand(lhs, w.sign_bit(), masks),
                    None => {
                        demand(lhs, w.mask(), masks);
                        demand(rhs, w.mask(), masks);
                    }
                },
                Add | Sub | Mul => {
                    // Carries only travel upward, so everything at or below
                    // the highest demanded bit matters.
                    let top = 63 - out.leading_zeros() as u64;
                    let low = if top >= 63 { u64::MAX } else { (1u64 << (top + 1)) - 1 };
                    demand(lhs, low, masks);
                    demand(rhs, low, masks);
                }
                UDiv | SDiv | URem | SRem => {
                    demand(lhs, lhs.width().mask(), masks);
                    demand(rhs, rhs.width().mask(), masks);
                }
                Ult | Ule | Ugt | Uge | Slt | Sle | Sgt | Sge | Eq | Ne => {
                    demand(lhs, lhs.width().mask(), masks);
                    demand(rhs, rhs.width().mask(), masks);
                }
            }
        }
        ExprView::Un { op, arg } => match op {
            UnOpKind::BitNot => demand(arg, out, masks),
            UnOpKind::Neg => {
                let top = 63 - out.leading_zeros() as u64;
                let low = if top >= 63 { u64::MAX } else { (1u64 << (top + 1)) - 1 };
                demand(arg, low, masks);
            }
            UnOpKind::LogNot => demand(arg, arg.width().mask(), masks),
        },
        ExprView::Cast { signed, arg, .. } => {
            let aw = arg.width();
            if w.bits() > aw.bits() {
                let mut need = out & aw.mask();
                if signed && (out & !aw.mask()) != 0 {
                    need |= aw.sign_bit();
                }
                demand(arg, need, masks);
            } else {
                demand(arg, out & aw.mask(), masks);
            }
        }
    }
}

/// One step of a flattened assertion term. Compiling each tree once per
/// component keeps the search loop free of pointer chasing and of scans
/// over an association-list environment.
enum TapeOp {
    Const(BitVecValue),
    Sym { slot: usize, width: Width },
    Bin(BinOpKind),
    Un(UnOpKind),
    Cast { width: Width, signed: bool },
}

enum TapeCheck {
    Point(u64),
    Range(u64, u64),
    Cond(bool),
}

struct Tape {
    code: Vec<TapeOp>,
    check: TapeCheck,
}

fn compile_term(e: &SymExpr, slots: &IndexMap<SymbolId, usize>, code: &mut Vec<TapeOp>) {
    match e.view() {
        ExprView::Const(c) => code.push(TapeOp::Const(c)),
        ExprView::Sym(s) => code.push(TapeOp::Sym { slot: slots[&s.id], width: s.width }),
        ExprView::Bin { op, lhs, rhs } => {
            compile_term(lhs, slots, code);
            compile_term(rhs, slots, code);
            code.push(TapeOp::Bin(op));
        }
        ExprView::Un { op, arg } => {
            compile_term(arg, slots, code);
            code.push(TapeOp::Un(op));
        }
        ExprView::Cast { signed, arg, .. } => {
            compile_term(arg, slots, code);
            code.push(TapeOp::Cast { width: e.width(), signed });
        }
    }
}

fn compile_assertion(a: &SmtAssertion, slots: &IndexMap<SymbolId, usize>) -> Tape {
    let mut code = Vec::new();
    let check = match a {
        SmtAssertion::Point { expr, value } => {
            compile_term(expr, slots, &mut code);
            TapeCheck::Point(*value & expr.width().mask())
        }
        SmtAssertion::Range { expr, lo, hi } => {
            compile_term(expr, slots, &mut code);
            TapeCheck::Range(*lo, *hi)
        }
        SmtAssertion::Cond { cond, truth } => {
            compile_term(cond, slots, &mut code);
            TapeCheck::Cond(*truth)
        }
    };
    Tape { code, check }
}

/// Mirrors `assertion_holds` exactly, over slot values instead of an
/// association list.
fn run_tape(tape: &Tape, values: &[u64], stack: &mut Vec<BitVecValue>) -> bool {
    stack.clear();
    for op in &tape.code {
        match op {
            TapeOp::Const(c) => stack.push(*c),
            TapeOp::Sym { slot, width } => {
                stack.push(BitVecValue::new(*width, values[*slot]));
            }
            TapeOp::Bin(op) => {
                let r = stack.pop().unwrap();
                let l = stack.pop().unwrap();
                stack.push(eval_smt_total(*op, l, r));
            }
            TapeOp::Un(op) => {
                let v = stack.pop().unwrap();
                stack.push(eval_unop(*op, v));
            }
            TapeOp::Cast { width, signed } => {
                let v = stack.pop().unwrap();
                stack.push(v.cast(*width, *signed));
            }
        }
    }
    let v = stack.pop().unwrap();
    match tape.check {
        TapeCheck::Point(x) => v.bits() == x,
        TapeCheck::Range(lo, hi) => lo <= v.bits() && v.bits() <= hi,
        TapeCheck::Cond(truth) => !v.is_zero() == truth,
    }
}

/// One search variable: the influencing bit positions of a symbol and, when
/// small enough to be worth the memory, its candidate values spelled out
/// ahead of time.
struct SlotInfo {
    bits: Vec<u32>,
    candidates: Option<Vec<u64>>,
}

impl SlotInfo {
    fn new(bits: Vec<u32>) -> Self {
        let candidates = if bits.len() <= 16 {
            Some((0..1u64 << bits.len()).map(|k| scatter(k, &bits)).collect())
        } else {
            None
        };
        SlotInfo { bits, candidates }
    }

    fn count(&self) -> u64 {
        1u64 << self.bits.len()
    }

    fn value(&self, k: u64) -> u64 {
        match &self.candidates {
            Some(c) => c[k as usize],
            None => scatter(k, &self.bits),
        }
    }
}

fn scatter(k: u64, bits: &[u32]) -> u64 {
    let mut v = 0u64;
    for (j, b) in bits.iter().enumerate() {
        if k & (1u64 << j) != 0 {
            v |= 1u64 << b;
        }
    }
    v
}

/// A component compiled for backtracking search: variables are assigned one
/// at a time and every assertion runs as soon as its last variable has a
/// value, so a conjunction of narrow constraints prunes long before the
/// full cross product is spelled out.
struct SearchPlan {
    slots: Vec<SlotInfo>,
    tapes: Vec<Tape>,
    /// Tape indices to check right after slot `d` is assigned.
    scheduled: Vec<Vec<usize>>,
    /// Tapes with no symbols at all, checked once up front.
    ground: Vec<usize>,
    total_bits: u32,
}

fn build_search_plan(
    formula: &SmtFormula,
    idxs: &[usize],
    masks: &IndexMap<SymbolId, (Width, u64)>,
) -> SearchPlan {
    let mut per_assertion: Vec<(usize, Vec<SymbolId>)> = idxs
        .iter()
        .map(|&i| {
            let mut ids: Vec<SymbolId> = assertion_symbols(&formula.assertions[i])
                .into_iter()
                .map(|s| s.id)
                .collect();
            ids.sort_by_key(|id| id.0);
            ids.dedup();
            (i, ids)
        })
        .collect();
    // Assertions over few variables go first. That both fixes the slot
    // order (their variables are assigned early) and makes them fire early.
    per_assertion.sort_by_key(|(_, ids)| ids.len());

    let mut slot_of: IndexMap<SymbolId, usize> = IndexMap::new();
    for (_, ids) in &per_assertion {
        for id in ids {
            let next = slot_of.len();
            slot_of.entry(*id).or_insert(next);
        }
    }

    let slots: Vec<SlotInfo> = slot_of
        .keys()
        .map(|id| {
            let mask = masks.get(id).map_or(0, |(_, m)| *m);
            let bits = (0..64).filter(|b| mask & (1u64 << b) != 0).collect();
            SlotInfo::new(bits)
        })
        .collect();
    let total_bits = slots.iter().map(|s| s.bits.len() as u32).sum();

    let mut tapes = Vec::with_capacity(per_assertion.len());
    let mut scheduled = vec![Vec::new(); slots.len()];
    let mut ground = Vec::new();
    for (i, ids) in &per_assertion {
        let t = tapes.len();
        tapes.push(compile_assertion(&formula.assertions[*i], &slot_of));
        match ids.iter().map(|id| slot_of[id]).max() {
            Some(depth) => scheduled[depth].push(t),
            None => ground.push(t),
        }
    }
    SearchPlan { slots, tapes, scheduled, ground, total_bits }
}

fn search_from(
    plan: &SearchPlan,
    depth: usize,
    values: &mut Vec<u64>,
    stack: &mut Vec<BitVecValue>,
    ticks: &mut u64,
    deadline: Instant,
) -> Result<bool, UnknownReason> {
    if depth == plan.slots.len() {
        return Ok(true);
    }
    let slot = &plan.slots[depth];
    for k in 0..slot.count() {
        if *ticks % 4096 == 0 && Instant::now() >= deadline {
            return Err(UnknownReason::Timeout);
        }
        *ticks += 1;
        values[depth] = slot.value(k);
        if plan.scheduled[depth]
            .iter()
            .all(|&t| run_tape(&plan.tapes[t], values, stack))
            && search_from(plan, depth + 1, values, stack, ticks, deadline)?
        {
            return Ok(true);
        }
    }
    Ok(false)
}

fn run_search(plan: &SearchPlan, deadline: Instant) -> SolverVerdict {
    let mut values = vec![0u64; plan.slots.len()];
    let mut stack = Vec::with_capacity(16);
    if !plan.ground.iter().all(|&t| run_tape(&plan.tapes[t], &values, &mut stack)) {
        return SolverVerdict::Unsat;
    }
    let mut ticks = 0u64;
    match search_from(plan, 0, &mut values, &mut stack, &mut ticks, deadline) {
        Ok(true) => SolverVerdict::Sat,
        Ok(false) => SolverVerdict::Unsat,
        Err(r) => SolverVerdict::Unknown(r),
    }
}

fn assertion_symbols(a: &SmtAssertion) -> Vec<Symbol> {
    let mut out = Vec::new();
    match a {
        SmtAssertion::Point { expr, .. } | SmtAssertion::Range { expr, .. } => {
            expr.collect_symbols(&mut out);
        }
        SmtAssertion::Cond { cond, .. } => cond.collect_symbols(&mut out),
    }
    out
}

/// Assertion indices grouped into connected components: two assertions land
/// in the same group iff they transitively share a symbol. Symbol-free
/// assertions form one extra group that evaluates in a single pass.
fn split_components(formula: &SmtFormula) -> Vec<Vec<usize>> {
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }

    let n = formula.assertions.len();
    let syms: Vec<Vec<Symbol>> = formula.assertions.iter().map(assertion_symbols).collect();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut owner: IndexMap<SymbolId, usize> = IndexMap::new();
    for i in 0..n {
        for s in &syms[i] {
            if let Some(&j) = owner.get(&s.id) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            } else {
                owner.insert(s.id, i);
            }
        }
    }
    let mut groups: IndexMap<usize, Vec<usize>> = IndexMap::new();
    let mut ground: Vec<usize> = Vec::new();
    for i in 0..n {
        if syms[i].is_empty() {
            ground.push(i);
        } else {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push(i);
        }
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    if !ground.is_empty() {
        out.push(ground);
    }
    out
}

/// `Some(sat)` when every assertion in the component is a raw-symbol
/// `Point`/`Range`. Such a component is an intersection of unsigned
/// intervals and needs no search; this is what keeps a 64-bit address
/// symbol with a not-null range from eating the whole enumeration budget.
fn intersect_bare_intervals(formula: &SmtFormula, idxs: &[usize]) -> Option<bool> {
    let mut bounds: IndexMap<SymbolId, (u64, u64)> = IndexMap::new();
    for &i in idxs {
        let (sym, lo, hi) = match &formula.assertions[i] {
            SmtAssertion::Point { expr, value } => match expr.view() {
                ExprView::Sym(s) => {
                    let v = *value & s.width.mask();
                    (s.clone(), v, v)
                }
                _ => return None,
            },
            SmtAssertion::Range { expr, lo, hi } => match expr.view() {
                ExprView::Sym(s) => (s.clone(), *lo, *hi),
                _ => return None,
            },
            SmtAssertion::Cond { .. } => return None,
        };
        let cur = bounds.entry(sym.id).or_insert((0, sym.width.mask()));
        cur.0 = cur.0.max(lo);
        cur.1 = cur.1.min(hi);
    }
    Some(bounds.values().all(|(lo, hi)| lo <= hi))
}

/// Parallel variant of the backtracking search: the top slot's candidates
/// are split across rayon workers, each finishing the subtree below its
/// value. Verdicts match the sequential walk.
#[cfg(feature = "parallel")]
fn run_search_par(plan: &SearchPlan, deadline: Instant) -> SolverVerdict {
    use rayon::prelude::*;
    use std::sync::atomic::{AtomicBool, Ordering};

    if plan.slots.is_empty() {
        return run_search(plan, deadline);
    }
    {
        let values = vec![0u64; plan.slots.len()];
        let mut stack = Vec::with_capacity(16);
        if !plan.ground.iter().all(|&t| run_tape(&plan.tapes[t], &values, &mut stack)) {
            return SolverVerdict::Unsat;
        }
    }
    let top = &plan.slots[0];
    let timed_out = AtomicBool::new(false);
    let found = (0..top.count()).into_par_iter().find_map_any(|k| {
        if timed_out.load(Ordering::Relaxed) {
            return None;
        }
        let mut values = vec![0u64; plan.slots.len()];
        let mut stack = Vec::with_capacity(16);
        values[0] = top.value(k);
        if !plan.scheduled[0]
            .iter()
            .all(|&t| run_tape(&plan.tapes[t], &values, &mut stack))
        {
            return None;
        }
        let mut ticks = 0u64;
        match search_from(plan, 1, &mut values, &mut stack, &mut ticks, deadline) {
            Ok(true) => Some(()),
            Ok(false) => None,
            Err(_) => {
                timed_out.store(true, Ordering::Relaxed);
                None
            }
        }
    });
    if found.is_some() {
        SolverVerdict::Sat
    } else if timed_out.load(Ordering::Relaxed) {
        SolverVerdict::Unknown(UnknownReason::Timeout)
    } else {
        SolverVerdict::Unsat
    }
}

fn run_component(plan: &SearchPlan, deadline: Instant, par: bool) -> SolverVerdict {
    #[cfg(feature = "parallel")]
    if par && plan.total_bits >= 16 {
        return run_search_par(plan, deadline);
    }
    #[cfg(not(feature = "parallel"))]
    let _ = par;
    run_search(plan, deadline)
}

enum ComponentPlan {
    Decided(SolverVerdict),
    Search(SearchPlan),
}

/// Decide each component up front where that is free, otherwise compile it
/// for a bounded search over its influencing bits. Instant verdicts sort
/// first so an unsatisfiable component is noticed before any search starts.
fn plan_components(formula: &SmtFormula, max_bits: u32) -> Vec<ComponentPlan> {
    let mut plans = Vec::new();
    for idxs in split_components(formula) {
        if let Some(sat) = intersect_bare_intervals(formula, &idxs) {
            let verdict = if sat { SolverVerdict::Sat } else { SolverVerdict::Unsat };
            plans.push(ComponentPlan::Decided(verdict));
            continue;
        }
        let masks = influence_masks_for(formula, &idxs);
        let total_bits: u32 = masks.values().map(|(_, m)| m.count_ones()).sum();
        if total_bits > max_bits || total_bits >= 64 {
            plans.push(ComponentPlan::Decided(SolverVerdict::Unknown(
                UnknownReason::OverBudget,
            )));
        } else {
            plans.push(ComponentPlan::Search(build_search_plan(formula, &idxs, &masks)));
        }
    }
    plans.sort_by_key(|p| match p {
        ComponentPlan::Decided(_) => 0u64,
        ComponentPlan::Search(plan) => 1 + plan.total_bits as u64,
    });
    plans
}

/// A conjunction over disjoint variables is satisfiable iff every component
/// is, so unsat anywhere settles the formula even when another component is
/// over budget. Only when no component refutes do the unknowns surface.
fn run_plans(plans: Vec<ComponentPlan>, deadline: Instant, par: bool) -> SolverVerdict {
    let mut unknown: Option<UnknownReason> = None;
    for plan in plans {
        let verdict = match plan {
            ComponentPlan::Decided(v) => v,
            ComponentPlan::Search(plan) => run_component(&plan, deadline, par),
        };
        match verdict {
            SolverVerdict::Unsat => return SolverVerdict::Unsat,
            SolverVerdict::Sat => {}
            SolverVerdict::Unknown(UnknownReason::Timeout) => {
                return SolverVerdict::Unknown(UnknownReason::Timeout);
            }
            SolverVerdict::Unknown(r) => {
                unknown.get_or_insert(r);
            }
        }
    }
    match unknown {
        Some(r) => SolverVerdict::Unknown(r),
        None => SolverVerdict::Sat,
    }
}

/// Sequential bounded search over the influencing bits, one variable-disjoint
/// component at a time.
pub fn check_sat_builtin_seq(formula: &SmtFormula, config: &BuiltinConfig) -> SolverVerdict {
    let deadline = Instant::now() + config.timeout;
    let plans = plan_components(formula, config.max_bits);
    run_plans(plans, deadline, false)
}

/// Parallel bounded search; large components are split across rayon workers.
#[cfg(feature = "parallel")]
pub fn check_sat_builtin_par(formula: &SmtFormula, config: &BuiltinConfig) -> SolverVerdict {
    let deadline = Instant::now() + config.timeout;
    let plans = plan_components(formula, config.max_bits);
    run_plans(plans, deadline, true)
}

/// Bounded search; uses the parallel walk when it is compiled in and some
/// component is big enough to be worth splitting.
pub fn check_sat_builtin(formula: &SmtFormula, config: &BuiltinConfig) -> SolverVerdict {
    let deadline = Instant::now() + config.timeout;
    let plans = plan_components(formula, config.max_bits);
    #[cfg(feature = "parallel")]
    let par = plans
        .iter()
        .any(|p| matches!(p, ComponentPlan::Search(s) if s.total_bits >= 16));
    #[cfg(not(feature = "parallel"))]
    let par = false;
    run_plans(plans, deadline, par)
}

/// An external SMT solver invoked per query. The command template is
/// whitespace-split; a `{file}` placeholder receives the formula path,
/// otherwise the formula is piped to stdin.
#[derive(Clone, Debug)]
pub struct ExternalSolver {
    pub argv: Vec<String>,
}

impl ExternalSolver {
    pub fn from_command(command: &str) -> Option<ExternalSolver> {
        let argv: Vec<String> = command.split_whitespace().map(str::to_string).collect();
        if argv.is_empty() {
            None
        } else {
            Some(ExternalSolver { argv })
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("solver unavailable: {0}")]
pub struct SolverUnavailable(pub String);

pub fn check_sat_external(
    solver: &ExternalSolver,
    smtlib: &str,
    timeout: Duration,
) -> Result<SolverVerdict, SolverUnavailable> {
    use std::process::{Command, Stdio};

    let uses_file = solver.argv.iter().any(|a| a.contains("{file}"));
    let mut tmp = None;
    let mut argv = solver.argv.clone();
    if uses_file {
        let mut f = tempfile::Builder::new()
            .prefix("refutelint-")
            .suffix(".smt2")
            .tempfile()
            .map_err(|e| SolverUnavailable(format!("cannot create temp file: {e}")))?;
        f.write_all(smtlib.as_bytes())
            .map_err(|e| SolverUnavailable(format!("cannot write temp file: {e}")))?;
        let path = f.path().to_string_lossy().into_owned();
        for a in &mut argv {
            *a = a.replace("{file}", &path);
        }
        tmp = Some(f);
    }

    let mut cmd = Command::new(&argv[0]);
    cmd.args(&argv[1..])
        .stdin(if uses_file { Stdio::null() } else { Stdio::piped() })
        .stdout(Stdio::piped())
        .stderr(Stdio::null());
    let mut child = cmd
        .spawn()
        .map_err(|e| SolverUnavailable(format!("cannot run `{}`: {e}", argv[0])))?;

    if !uses_file {
        if let Some(mut stdin) = child.stdin.take() {
            // The solver may exit before reading everything; that's its
            // business, not an error here.
            let _ = stdin.write_all(smtlib.as_bytes());
        }
    }

    let deadline = Instant::now() + timeout;
    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) => {
                if Instant::now() >= deadline {
                    let _ = child.kill();
                    let _ = child.wait();
                    drop(tmp);
                    return Ok(SolverVerdict::Unknown(UnknownReason::Timeout));
                }
                std::thread::sleep(Duration::from_millis(5));
            }
            Err(e) => {
                drop(tmp);
                return Err(SolverUnavailable(format!("wait failed: {e}")));
            }
        }
    }
    let output = child
        .wait_with_output()
        .map_err(|e| SolverUnavailable(format!("cannot read solver output: {e}")))?;
    drop(tmp);
    let stdout = String::from_utf8_lossy(&output.stdout);
    for line in stdout.lines() {
        match line.trim() {
            "sat" => return Ok(SolverVerdict::Sat),
            "unsat" => return Ok(SolverVerdict::Unsat),
            "unknown" => return Ok(SolverVerdict::Unknown(UnknownReason::SolverError)),
            _ => {}
        }
    }
    Ok(SolverVerdict::Unknown(UnknownReason::SolverError))
}
