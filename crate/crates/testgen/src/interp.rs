//! A concrete AST interpreter used as ground truth for the analyzer.
//!
//! The interpreter shares nothing with the symbolic executor except the
//! typed AST: values are plain `(width, bits)` pairs, operators run on
//! wrapping host arithmetic, and the total division and shift semantics
//! are restated here instead of imported, so a disagreement between this
//! module and the analysis pipeline always points at a real bug.
//!
//! Execution stops at the first triggered bug, mirroring how an analysis
//! path ends at its violation node.

use std::collections::HashMap;

use refutelint_core::frontend::ast::{
    Ast, AstBinOp, AstUnOp, Block, DeclId, Expr, ExprKind, LValue, Stmt, StmtKind, Type,
};
use refutelint_core::ir::{Signedness, Width};
use refutelint_core::loc::SourceLoc;
use thiserror::Error;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum BugKind {
    NullDeref,
    DivZero,
}

/// A concretely triggered bug: the kind plus the source position the
/// diagnostics key on.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct BugEvent {
    pub kind: BugKind,
    pub line: u32,
    pub col: u32,
}

impl BugEvent {
    fn at(kind: BugKind, loc: SourceLoc) -> BugEvent {
        BugEvent { kind, line: loc.line, col: loc.col }
    }
}

#[derive(Debug, Error)]
pub enum InterpError {
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error("read of uninitialized variable")]
    Uninit,
    #[error("step budget exhausted")]
    OutOfFuel,
    #[error("unknown function {0}")]
    NoSuchFunction(String),
}

/// A machine integer: `bits` is kept masked to `width`.
#[derive(Clone, Copy, Debug)]
struct CV {
    width: u32,
    bits: u64,
}

impl CV {
    fn new(width: u32, bits: u64) -> CV {
        let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
        CV { width, bits: bits & mask }
    }

    fn signed(self) -> i64 {
        ((self.bits << (64 - self.width)) as i64) >> (64 - self.width)
    }
}

#[derive(Clone, Copy, Debug)]
enum Val {
    Num(CV),
    Ptr(Option<DeclId>),
}

impl Val {
    fn truthy(self) -> bool {
        match self {
            Val::Num(c) => c.bits != 0,
            Val::Ptr(p) => p.is_some(),
        }
    }
}

/// Why evaluation stopped early.
enum Halt {
    Bug(BugEvent),
    Fail(InterpError),
}

impl From<InterpError> for Halt {
    fn from(e: InterpError) -> Halt {
        Halt::Fail(e)
    }
}

type EResult<T> = Result<T, Halt>;

/// Result of one concrete run.
#[derive(Debug)]
pub struct Outcome {
    /// First bug triggered, if any; execution stops there.
    pub bug: Option<BugEvent>,
    /// Return value bits when the run finished normally with a value.
    pub ret: Option<u64>,
}

struct Interp<'a> {
    ast: &'a Ast,
    env: HashMap<DeclId, Val>,
    fuel: u64,
}

enum Flow {
    Next,
    Return(Option<Val>),
}

fn unsupported<T>(what: &str) -> EResult<T> {
    Err(Halt::Fail(InterpError::Unsupported(what.to_string())))
}

/// The common type of a two-operand integer operation: wider width wins,
/// unsigned wins a width tie, and nothing narrower than `int` is used.
fn usual(a: Type, b: Type) -> (u32, bool) {
    let (aw, bw) = (a.width.bits(), b.width.bits());
    let (w, signed) = if aw > bw {
        (aw, a.signedness == Signedness::Signed)
    } else if bw > aw {
        (bw, b.signedness == Signedness::Signed)
    } else {
        (
            aw,
            a.signedness == Signedness::Signed && b.signedness == Signedness::Signed,
        )
    };
    if w < 32 {
        (32, true)
    } else {
        (w, signed)
    }
}

impl<'a> Interp<'a> {
    fn spend(&mut self) -> EResult<()> {
        if self.fuel == 0 {
            return Err(Halt::Fail(InterpError::OutOfFuel));
        }
        self.fuel -= 1;
        Ok(())
    }

    fn convert(&self, v: Val, from: Type, to: Type) -> EResult<Val> {
        if to.is_pointer() {
            return match v {
                Val::Ptr(p) if from.is_pointer() => Ok(Val::Ptr(p)),
                Val::Num(c) if c.bits == 0 => Ok(Val::Ptr(None)),
                _ => unsupported("non-null integer to pointer conversion"),
            };
        }
        if to.value_width() == Width::W1 {
            return Ok(Val::Num(CV::new(1, v.truthy() as u64)));
        }
        let Val::Num(c) = v else {
            return unsupported("pointer to integer conversion");
        };
        let tw = to.value_width().bits();
        let bits = if tw <= c.width {
            c.bits
        } else if from.value_signedness() == Signedness::Signed {
            c.signed() as u64
        } else {
            c.bits
        };
        Ok(Val::Num(CV::new(tw, bits)))
    }

    fn read(&self, decl: DeclId) -> EResult<Val> {
        match self.env.get(&decl) {
            Some(v) => Ok(*v),
            None => Err(Halt::Fail(InterpError::Uninit)),
        }
    }

    fn eval(&mut self, e: &Expr) -> EResult<Val> {
        self.spend()?;
        match &e.kind {
            ExprKind::IntLit(v) => {
                Ok(Val::Num(CV::new(e.type_of().value_width().bits(), *v)))
            }
            ExprKind::Var { decl, .. } => self.read(*decl),
            ExprKind::Un { op, operand } => self.eval_un(e, *op, operand),
            ExprKind::Bin { op, op_span, lhs, rhs } => {
                self.eval_bin(*op, op_span.start, lhs, rhs)
            }
            ExprKind::Cast { ty, operand } => {
                let v = self.eval(operand)?;
                self.convert(v, operand.type_of(), *ty)
            }
            ExprKind::Call { .. } => unsupported("function call"),
        }
    }

    fn eval_un(&mut self, whole: &Expr, op: AstUnOp, operand: &Expr) -> EResult<Val> {
        match op {
            AstUnOp::Deref => {
                let pv = self.eval(operand)?;
                match pv {
                    Val::Ptr(Some(decl)) => self.read(decl),
                    Val::Ptr(None) => Err(Halt::Bug(BugEvent::at(
                        BugKind::NullDeref,
                        whole.span.start,
                    ))),
                    Val::Num(_) => unsupported("dereference of an integer"),
                }
            }
            AstUnOp::AddrOf => {
                let ExprKind::Var { decl, .. } = &operand.kind else {
                    return unsupported("address of a non-variable");
                };
                Ok(Val::Ptr(Some(*decl)))
            }
            AstUnOp::Neg | AstUnOp::BitNot => {
                let v = self.eval(operand)?;
                let Val::Num(c) = v else {
                    return unsupported("arithmetic on a pointer");
                };
                let bits = if op == AstUnOp::Neg {
                    c.bits.wrapping_neg()
                } else {
                    !c.bits
                };
                Ok(Val::Num(CV::new(c.width, bits)))
            }
            AstUnOp::LogNot => {
                let v = self.eval(operand)?;
                Ok(Val::Num(CV::new(32, !v.truthy() as u64)))
            }
        }
    }

    fn eval_bin(
        &mut self,
        op: AstBinOp,
        op_loc: SourceLoc,
        lhs: &Expr,
        rhs: &Expr,
    ) -> EResult<Val> {
        if op.is_short_circuit() {
            let l = self.eval(lhs)?.truthy();
            let taken = match op {
                AstBinOp::LogAnd if !l => false,
                AstBinOp::LogOr if l => true,
                _ => self.eval(rhs)?.truthy(),
            };
            return Ok(Val::Num(CV::new(32, taken as u64)));
        }
        let lt = lhs.type_of();
        let rt = rhs.type_of();
        let lv = self.eval(lhs)?;
        let rv = self.eval(rhs)?;
        if op.is_comparison() {
            return self.compare(op, lv, lt, rv, rt);
        }
        if matches!(op, AstBinOp::Shl | AstBinOp::Shr) {
            let (Val::Num(l), amt) = (lv, self.convert(rv, rt, lt)?) else {
                return unsupported("shift on a pointer");
            };
            let Val::Num(a) = amt else {
                return unsupported("shift by a pointer");
            };
            let w = l.width;
            let bits = if a.bits >= w as u64 {
                match (op, l.signed() < 0, lt.value_signedness()) {
                    (AstBinOp::Shr, true, Signedness::Signed) => u64::MAX,
                    _ => 0,
                }
            } else if op == AstBinOp::Shl {
                l.bits << a.bits
            } else if lt.value_signedness() == Signedness::Signed {
                (l.signed() >> a.bits) as u64
            } else {
                l.bits >> a.bits
            };
            return Ok(Val::Num(CV::new(w, bits)));
        }
        let (w, signed) = usual(lt, rt);
        let ct = Type::scalar(
            Width::new(w).expect("usual width"),
            if signed { Signedness::Signed } else { Signedness::Unsigned },
        );
        let Val::Num(l) = self.convert(lv, lt, ct)? else {
            return unsupported("arithmetic on a pointer");
        };
        let Val::Num(r) = self.convert(rv, rt, ct)? else {
            return unsupported("arithmetic on a pointer");
        };
        let bits = match op {
            AstBinOp::Add => l.bits.wrapping_add(r.bits),
            AstBinOp::Sub => l.bits.wrapping_sub(r.bits),
            AstBinOp::Mul => l.bits.wrapping_mul(r.bits),
            AstBinOp::BitAnd => l.bits & r.bits,
            AstBinOp::BitOr => l.bits | r.bits,
            AstBinOp::BitXor => l.bits ^ r.bits,
            AstBinOp::Div | AstBinOp::Rem => {
                if r.bits == 0 {
                    return Err(Halt::Bug(BugEvent::at(BugKind::DivZero, op_loc)));
                }
                match (op, signed) {
                    (AstBinOp::Div, false) => l.bits / r.bits,
                    (AstBinOp::Rem, false) => l.bits % r.bits,
                    (AstBinOp::Div, true) => l.signed().wrapping_div(r.signed()) as u64,
                    (AstBinOp::Rem, true) => l.signed().wrapping_rem(r.signed()) as u64,
                    _ => unreachable!(),
                }
            }
            _ => unreachable!("comparisons and shifts handled above"),
        };
        Ok(Val::Num(CV::new(w, bits)))
    }

    fn compare(&self, op: AstBinOp, lv: Val, lt: Type, rv: Val, rt: Type) -> EResult<Val> {
        let truth = match (lv, rv) {
            (Val::Ptr(a), Val::Ptr(b)) => match op {
                AstBinOp::Eq => a == b,
                AstBinOp::Ne => a != b,
                _ => return unsupported("relational pointer comparison"),
            },
            (Val::Ptr(p), Val::Num(c)) | (Val::Num(c), Val::Ptr(p)) => {
                if c.bits != 0 {
                    return unsupported("pointer compared with a non-null integer");
                }
                match op {
                    AstBinOp::Eq => p.is_none(),
                    AstBinOp::Ne => p.is_some(),
                    _ => return unsupported("relational pointer comparison"),
                }
            }
            (Val::Num(_), Val::Num(_)) => {
                let (w, signed) = usual(lt, rt);
                let ct = Type::scalar(
                    Width::new(w).expect("usual width"),
                    if signed { Signedness::Signed } else { Signedness::Unsigned },
                );
                let Val::Num(l) = self.convert(lv, lt, ct)? else { unreachable!() };
                let Val::Num(r) = self.convert(rv, rt, ct)? else { unreachable!() };
                if signed {
                    let (a, b) = (l.signed(), r.signed());
                    match op {
                        AstBinOp::Lt => a < b,
                        AstBinOp::Le => a <= b,
                        AstBinOp::Gt => a > b,
                        AstBinOp::Ge => a >= b,
                        AstBinOp::Eq => a == b,
                        AstBinOp::Ne => a != b,
                        _ => unreachable!(),
                    }
                } else {
                    let (a, b) = (l.bits, r.bits);
                    match op {
                        AstBinOp::Lt => a < b,
                        AstBinOp::Le => a <= b,
                        AstBinOp::Gt => a > b,
                        AstBinOp::Ge => a >= b,
                        AstBinOp::Eq => a == b,
                        AstBinOp::Ne => a != b,
                        _ => unreachable!(),
                    }
                }
            }
        };
        Ok(Val::Num(CV::new(32, truth as u64)))
    }

    fn exec_block(&mut self, b: &Block) -> EResult<Flow> {
        for s in &b.stmts {
            if let Flow::Return(v) = self.exec_stmt(s)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Next)
    }

    fn exec_stmt(&mut self, s: &Stmt) -> EResult<Flow> {
        self.spend()?;
        match &s.kind {
            StmtKind::Decl { ty, init, decl, .. } => {
                if let Some(e) = init {
                    let v = self.eval(e)?;
                    let v = self.convert(v, e.type_of(), *ty)?;
                    self.env.insert(*decl, v);
                }
                Ok(Flow::Next)
            }
            StmtKind::Assign { target, value } => {
                match target {
                    LValue::Var { decl, .. } => {
                        let v = self.eval(value)?;
                        let ty = self.ast.decl(*decl).ty;
                        let v = self.convert(v, value.type_of(), ty)?;
                        self.env.insert(*decl, v);
                    }
                    LValue::Deref { ptr, star_span } => {
                        let pv = self.eval(ptr)?;
                        let Val::Ptr(target) = pv else {
                            return unsupported("store through an integer");
                        };
                        let Some(decl) = target else {
                            return Err(Halt::Bug(BugEvent::at(
                                BugKind::NullDeref,
                                star_span.start,
                            )));
                        };
                        let v = self.eval(value)?;
                        let v =
                            self.convert(v, value.type_of(), ptr.type_of().pointee())?;
                        self.env.insert(decl, v);
                    }
                }
                Ok(Flow::Next)
            }
            StmtKind::If { cond, then_blk, else_blk } => {
                if self.eval(cond)?.truthy() {
                    self.exec_block(then_blk)
                } else if let Some(b) = else_blk {
                    self.exec_block(b)
                } else {
                    Ok(Flow::Next)
                }
            }
            StmtKind::While { cond, body } => {
                while self.eval(cond)?.truthy() {
                    self.spend()?;
                    if let Flow::Return(v) = self.exec_block(body)? {
                        return Ok(Flow::Return(v));
                    }
                }
                Ok(Flow::Next)
            }
            StmtKind::Return { value } => {
                let v = match value {
                    Some(e) => Some(self.eval(e)?),
                    None => None,
                };
                Ok(Flow::Return(v))
            }
            StmtKind::Expr(e) => {
                self.eval(e)?;
                Ok(Flow::Next)
            }
            StmtKind::Block(b) => self.exec_block(b),
        }
    }
}

/// Run `name` on the given argument bit patterns. Arguments are masked to
/// each parameter's width; missing arguments are an error.
pub fn run_function(ast: &Ast, name: &str, args: &[u64]) -> Result<Outcome, InterpError> {
    let f = ast
        .function(name)
        .filter(|f| f.body.is_some())
        .ok_or_else(|| InterpError::NoSuchFunction(name.to_string()))?;
    if args.len() != f.params.len() {
        return Err(InterpError::Unsupported(format!(
            "{name} takes {} arguments, got {}",
            f.params.len(),
            args.len()
        )));
    }
    let mut it = Interp { ast, env: HashMap::new(), fuel: 200_000 };
    for (p, &a) in f.params.iter().zip(args) {
        if p.ty.is_pointer() {
            return Err(InterpError::Unsupported(
                "pointer parameters have no concrete domain".to_string(),
            ));
        }
        it.env
            .insert(p.decl, Val::Num(CV::new(p.ty.value_width().bits(), a)));
    }
    let body = f.body.as_ref().expect("checked above");
    match it.exec_block(body) {
        Ok(Flow::Return(v)) => Ok(Outcome {
            bug: None,
            ret: v.map(|v| match v {
                Val::Num(c) => c.bits,
                Val::Ptr(p) => p.is_some() as u64,
            }),
        }),
        Ok(Flow::Next) => Ok(Outcome { bug: None, ret: None }),
        Err(Halt::Bug(b)) => Ok(Outcome { bug: Some(b), ret: None }),
        Err(Halt::Fail(e)) => Err(e),
    }
}

/// Every distinct bug triggered by some input, found by running `name` on
/// its whole input domain. Parameters must be scalars of width 8 or less,
/// at most two of them, so the domain stays enumerable.
pub fn enumerate_bugs(
    ast: &Ast,
    name: &str,
) -> Result<std::collections::BTreeSet<BugEvent>, InterpError> {
    let f = ast
        .function(name)
        .ok_or_else(|| InterpError::NoSuchFunction(name.to_string()))?;
    let widths: Vec<u32> = f.params.iter().map(|p| p.ty.value_width().bits()).collect();
    let total: u32 = widths.iter().sum();
    assert!(
        widths.len() <= 2 && widths.iter().all(|&w| w <= 8),
        "domain too large to enumerate"
    );
    let mut bugs = std::collections::BTreeSet::new();
    for input in 0..1u64 << total {
        let mut rest = input;
        let args: Vec<u64> = widths
            .iter()
            .map(|&w| {
                let v = rest & ((1 << w) - 1);
                rest >>= w;
                v
            })
            .collect();
        if let Some(bug) = run_function(ast, name, &args)?.bug {
            bugs.insert(bug);
        }
    }
    Ok(bugs)
}
