//! Name resolution and type checking.
//!
//! Walks the parsed AST, assigns a [`DeclId`] to every variable, fills in
//! `Expr::ty` annotations, and rejects programs that are syntactically in
//! the subset but not typeable in it (pointer arithmetic, void values in
//! expressions, mismatched calls, ...).

use std::collections::HashMap;

use crate::ir::{Signedness, Width};
use crate::loc::SourceLoc;

use super::ast::*;
use super::FrontendError;

#[derive(Clone, Debug)]
pub struct FuncSig {
    pub params: Vec<Type>,
    pub ret: Option<Type>,
    pub defined: bool,
}

pub fn analyze(ast: &mut Ast) -> Result<HashMap<String, FuncSig>, FrontendError> {
    let mut sigs: HashMap<String, FuncSig> = HashMap::new();
    for f in &ast.functions {
        let sig = FuncSig {
            params: f.params.iter().map(|p| p.ty).collect(),
            ret: f.ret,
            defined: f.body.is_some(),
        };
        match sigs.get_mut(&f.name) {
            None => {
                sigs.insert(f.name.clone(), sig);
            }
            Some(existing) => {
                if existing.params != sig.params || existing.ret != sig.ret {
                    return Err(FrontendError::Type {
                        loc: f.span.start,
                        message: format!("conflicting declarations of `{}`", f.name),
                    });
                }
                if existing.defined && sig.defined {
                    return Err(FrontendError::Type {
                        loc: f.span.start,
                        message: format!("redefinition of `{}`", f.name),
                    });
                }
                existing.defined |= sig.defined;
            }
        }
    }

    let mut functions = std::mem::take(&mut ast.functions);
    for f in &mut functions {
        let mut cx = FnContext {
            decls: &mut ast.decls,
            sigs: &sigs,
            scopes: vec![HashMap::new()],
            ret: f.ret,
        };
        for p in &mut f.params {
            p.decl = cx.declare(&p.name, p.ty, p.span)?.ok_or_else(|| {
                FrontendError::Type {
                    loc: p.span.start,
                    message: format!("duplicate parameter `{}`", p.name),
                }
            })?;
        }
        if let Some(body) = &mut f.body {
            cx.check_block(body)?;
        }
    }
    ast.functions = functions;
    Ok(sigs)
}

struct FnContext<'a> {
    decls: &'a mut Vec<DeclInfo>,
    sigs: &'a HashMap<String, FuncSig>,
    scopes: Vec<HashMap<String, DeclId>>,
    ret: Option<Type>,
}

impl<'a> FnContext<'a> {
    fn declare(
        &mut self,
        name: &str,
        ty: Type,
        span: crate::loc::Span,
    ) -> Result<Option<DeclId>, FrontendError> {
        let scope = self.scopes.last_mut().unwrap();
        if scope.contains_key(name) {
            return Ok(None);
        }
        let id = DeclId(self.decls.len() as u32);
        self.decls.push(DeclInfo { name: name.to_string(), ty, span });
        scope.insert(name.to_string(), id);
        Ok(Some(id))
    }

    fn lookup(&self, name: &str) -> Option<DeclId> {
        self.scopes.iter().rev().find_map(|s| s.get(name)).copied()
    }

    fn check_block(&mut self, block: &mut Block) -> Result<(), FrontendError> {
        self.scopes.push(HashMap::new());
        for stmt in &mut block.stmts {
            self.check_stmt(stmt)?;
        }
        self.scopes.pop();
        Ok(())
    }

    fn check_stmt(&mut self, stmt: &mut Stmt) -> Result<(), FrontendError> {
        let loc = stmt.span.start;
        match &mut stmt.kind {
            StmtKind::Decl { name, ty, init, decl } => {
                if let Some(init) = init {
                    self.check_expr(init)?;
                    require_assignable(*ty, init)?;
                }
                *decl = self.declare(name, *ty, stmt.span)?.ok_or_else(|| {
                    FrontendError::Type {
                        loc,
                        message: format!("redeclaration of `{name}` in the same scope"),
                    }
                })?;
            }
            StmtKind::Assign { target, value } => {
                self.check_expr(value)?;
                match target {
                    LValue::Var { name, decl } => {
                        let id = self.lookup(name).ok_or_else(|| {
                            undeclared(loc, name)
                        })?;
                        *decl = id;
                        require_assignable(self.decls[id.0 as usize].ty, value)?;
                    }
                    LValue::Deref { ptr, star_span } => {
                        self.check_expr(ptr)?;
                        let pt = require_value(ptr)?;
                        if !pt.is_pointer() {
                            return Err(FrontendError::Type {
                                loc: star_span.start,
                                message: "cannot store through a non-pointer".into(),
                            });
                        }
                        require_assignable(pt.pointee(), value)?;
                    }
                }
            }
            StmtKind::If { cond, then_blk, else_blk } => {
                self.check_expr(cond)?;
                require_value(cond)?;
                self.check_block(then_blk)?;
                if let Some(else_blk) = else_blk {
                    self.check_block(else_blk)?;
                }
            }
            StmtKind::While { cond, body } => {
                self.check_expr(cond)?;
                require_value(cond)?;
                self.check_block(body)?;
            }
            StmtKind::Return { value } => match (self.ret, value) {
                (Some(rty), Some(value)) => {
                    self.check_expr(value)?;
                    require_assignable(rty, value)?;
                }
                (None, None) => {}
                (Some(_), None) => {
                    return Err(FrontendError::Type {
                        loc,
                        message: "non-void function must return a value".into(),
                    });
                }
                (None, Some(_)) => {
                    return Err(FrontendError::Type {
                        loc,
                        message: "void function cannot return a value".into(),
                    });
                }
            },
            StmtKind::Expr(e) => {
                self.check_expr(e)?;
            }
            StmtKind::Block(b) => self.check_block(b)?,
        }
        Ok(())
    }

    fn check_expr(&mut self, expr: &mut Expr) -> Result<(), FrontendError> {
        let loc = expr.span.start;
        let ty: Option<Type> = match &mut expr.kind {
            ExprKind::IntLit(v) => Some(literal_type(*v)),
            ExprKind::Var { name, decl } => {
                let id = self.lookup(name).ok_or_else(|| undeclared(loc, name))?;
                *decl = id;
                Some(self.decls[id.0 as usize].ty)
            }
            ExprKind::Un { op, operand } => {
                self.check_expr(operand)?;
                let oty = require_value(operand)?;
                match op {
                    AstUnOp::Neg | AstUnOp::BitNot => {
                        if oty.is_pointer() {
                            return Err(FrontendError::Type {
                                loc,
                                message: format!(
                                    "operator `{}` requires an integer operand",
                                    op.symbol()
                                ),
                            });
                        }
                        Some(oty)
                    }
                    AstUnOp::LogNot => Some(Type::int()),
                    AstUnOp::Deref => {
                        if !oty.is_pointer() {
                            return Err(FrontendError::Type {
                                loc,
                                message: "cannot dereference a non-pointer".into(),
                            });
                        }
                        Some(oty.pointee())
                    }
                    AstUnOp::AddrOf => match &operand.kind {
                        ExprKind::Var { .. } => Some(oty.pointer_to()),
                        _ => {
                            return Err(FrontendError::Type {
                                loc,
                                message: "`&` requires a named variable".into(),
                            });
                        }
                    },
                }
            }
            ExprKind::Bin { op, op_span, lhs, rhs } => {
                self.check_expr(lhs)?;
                self.check_expr(rhs)?;
                let at = op_span.start;
                let lt = require_value(lhs)?;
                let rt = require_value(rhs)?;
                match op {
                    AstBinOp::LogAnd | AstBinOp::LogOr => Some(Type::int()),
                    AstBinOp::Eq | AstBinOp::Ne => {
                        check_comparable(at, lt, rt, lhs, rhs, true)?;
                        Some(Type::int())
                    }
                    AstBinOp::Lt | AstBinOp::Le | AstBinOp::Gt | AstBinOp::Ge => {
                        check_comparable(at, lt, rt, lhs, rhs, false)?;
                        Some(Type::int())
                    }
                    AstBinOp::Shl | AstBinOp::Shr => {
                        if lt.is_pointer() || rt.is_pointer() {
                            return Err(integer_op_error(at, op.symbol()));
                        }
                        Some(lt)
                    }
                    _ => {
                        if lt.is_pointer() || rt.is_pointer() {
                            return Err(FrontendError::Unsupported {
                                loc: at,
                                construct: "pointer arithmetic".into(),
                            });
                        }
                        Some(usual_type(lt, rt))
                    }
                }
            }
            ExprKind::Cast { ty, operand } => {
                self.check_expr(operand)?;
                let oty = require_value(operand)?;
                if ty.is_pointer() && !oty.is_pointer() && !operand.is_literal_zero() {
                    return Err(FrontendError::Unsupported {
                        loc,
                        construct: "casting integers to pointers".into(),
                    });
                }
                Some(*ty)
            }
            ExprKind::Call { name, args } => {
                let Some(sig) = self.sigs.get(name.as_str()) else {
                    return Err(FrontendError::Type {
                        loc,
                        message: format!("call to undeclared function `{name}`"),
                    });
                };
                let sig = sig.clone();
                if args.len() != sig.params.len() {
                    return Err(FrontendError::Type {
                        loc,
                        message: format!(
                            "`{name}` expects {} argument(s), got {}",
                            sig.params.len(),
                            args.len()
                        ),
                    });
                }
                for (arg, pty) in args.iter_mut().zip(&sig.params) {
                    self.check_expr(arg)?;
                    require_assignable(*pty, arg)?;
                }
                sig.ret
            }
        };
        expr.ty = ty;
        Ok(())
    }
}

fn undeclared(loc: SourceLoc, name: &str) -> FrontendError {
    FrontendError::Type {
        loc,
        message: format!("use of undeclared identifier `{name}`"),
    }
}

fn integer_op_error(loc: SourceLoc, op: &str) -> FrontendError {
    FrontendError::Type {
        loc,
        message: format!("operator `{op}` requires integer operands"),
    }
}

/// The type of an expression used for its value. Errors on void calls.
fn require_value(expr: &Expr) -> Result<Type, FrontendError> {
    expr.ty.ok_or_else(|| FrontendError::Type {
        loc: expr.span.start,
        message: "void value is not usable in an expression".into(),
    })
}

/// Decimal literals get the first of int/long that fits; hex literals wear
/// unsigned types, matching how C picks from its candidate list.
pub fn literal_type(v: u64) -> Type {
    if v <= i32::MAX as u64 {
        Type::int()
    } else if v <= u32::MAX as u64 {
        Type::scalar(Width::W32, Signedness::Unsigned)
    } else if v <= i64::MAX as u64 {
        Type::scalar(Width::W64, Signedness::Signed)
    } else {
        Type::scalar(Width::W64, Signedness::Unsigned)
    }
}

/// The common type two integer operands convert to: the wider width wins
/// and brings its signedness; at equal width unsigned wins.
pub fn usual_type(a: Type, b: Type) -> Type {
    debug_assert!(!a.is_pointer() && !b.is_pointer());
    let (aw, bw) = (a.width.bits(), b.width.bits());
    let ty = if aw > bw {
        a
    } else if bw > aw {
        b
    } else if a.signedness == Signedness::Unsigned || b.signedness == Signedness::Unsigned {
        Type::scalar(a.width, Signedness::Unsigned)
    } else {
        a
    };
    // Comparisons and arithmetic happen at width >= int.
    if ty.width.bits() < 32 {
        Type::int()
    } else {
        ty
    }
}

fn check_comparable(
    loc: SourceLoc,
    lt: Type,
    rt: Type,
    lhs: &Expr,
    rhs: &Expr,
    equality: bool,
) -> Result<(), FrontendError> {
    match (lt.is_pointer(), rt.is_pointer()) {
        (false, false) => Ok(()),
        (true, true) => {
            if lt == rt && equality {
                Ok(())
            } else {
                Err(FrontendError::Type {
                    loc,
                    message: "pointers only support `==` and `!=` against the same type"
                        .into(),
                })
            }
        }
        (true, false) if equality && rhs.is_literal_zero() => Ok(()),
        (false, true) if equality && lhs.is_literal_zero() => Ok(()),
        _ => Err(FrontendError::Type {
            loc,
            message: "cannot compare a pointer with an integer".into(),
        }),
    }
}

/// Whether `value` may initialize or be assigned to an lvalue of type
/// `target`. Integers convert freely; pointers require the same type or a
/// literal zero.
fn require_assignable(target: Type, value: &Expr) -> Result<(), FrontendError> {
    let vt = require_value(value)?;
    let ok = if target.is_pointer() {
        vt == target || value.is_literal_zero()
    } else {
        !vt.is_pointer()
    };
    if ok {
        Ok(())
    } else {
        Err(FrontendError::Type {
            loc: value.span.start,
            message: format!("cannot convert `{vt}` to `{target}`"),
        })
    }
}
