//! Lowering from the typed AST to a per-function control-flow graph.
//!
//! The symbolic executor wants branch conditions it can assume atomically,
//! so `&&`, `||` and `!` never survive into a [`Terminator::Branch`]:
//! short-circuit operators become chains of blocks, and negation swaps the
//! branch targets. A short-circuit expression in value position is hoisted
//! into a fresh temporary assigned 0 or 1 through the same block chain.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::loc::Span;

use super::ast::*;
use super::pretty::print_expr;
use super::sema::FuncSig;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct BlockId(pub u32);

impl BlockId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug)]
pub struct CfgSet {
    pub functions: Vec<Cfg>,
    pub by_name: HashMap<String, usize>,
    /// Declared functions without a body; calls to these conjure fresh
    /// symbols during execution.
    pub externals: HashMap<String, FuncSig>,
    /// All declarations, including compiler temporaries introduced here.
    pub decls: Vec<DeclInfo>,
}

impl CfgSet {
    pub fn function(&self, name: &str) -> Option<&Cfg> {
        self.by_name.get(name).map(|&i| &self.functions[i])
    }

    pub fn decl(&self, id: DeclId) -> &DeclInfo {
        &self.decls[id.0 as usize]
    }
}

#[derive(Clone, Debug)]
pub struct Cfg {
    pub name: String,
    pub ret: Option<Type>,
    pub params: Vec<(DeclId, Type)>,
    pub blocks: Vec<BasicBlock>,
    pub entry: BlockId,
    pub span: Span,
}

impl Cfg {
    pub fn block(&self, id: BlockId) -> &BasicBlock {
        &self.blocks[id.index()]
    }
}

#[derive(Clone, Debug)]
pub struct BasicBlock {
    pub stmts: Vec<CfgStmt>,
    pub term: Terminator,
}

#[derive(Clone, Debug)]
pub enum CfgStmt {
    Decl {
        decl: DeclId,
        ty: Type,
        init: Option<Expr>,
        span: Span,
    },
    Assign {
        decl: DeclId,
        value: Expr,
        span: Span,
    },
    Store {
        ptr: Expr,
        value: Expr,
        star_span: Span,
    },
    Eval {
        expr: Expr,
    },
}

#[derive(Clone, Debug)]
pub enum Terminator {
    Jump(BlockId),
    Branch {
        cond: Expr,
        then_blk: BlockId,
        else_blk: BlockId,
    },
    Ret {
        value: Option<Expr>,
        span: Span,
    },
}

pub fn lower_ast(ast: &Ast, sigs: &HashMap<String, FuncSig>) -> CfgSet {
    let mut decls = ast.decls.clone();
    let mut functions = Vec::new();
    let mut by_name = HashMap::new();
    for f in &ast.functions {
        let Some(body) = &f.body else { continue };
        let mut lw = Lowerer {
            blocks: Vec::new(),
            current: None,
            decls: &mut decls,
        };
        let entry = lw.new_block();
        lw.current = Some(entry);
        lw.lower_block(body);
        lw.seal(Terminator::Ret { value: None, span: Span::at(f.span.end) });
        by_name.insert(f.name.clone(), functions.len());
        functions.push(Cfg {
            name: f.name.clone(),
            ret: f.ret,
            params: f.params.iter().map(|p| (p.decl, p.ty)).collect(),
            blocks: lw.blocks.into_iter().map(|b| b.finish()).collect(),
            entry,
            span: f.span,
        });
    }
    let externals = sigs
        .iter()
        .filter(|(_, s)| !s.defined)
        .map(|(n, s)| (n.clone(), s.clone()))
        .collect();
    CfgSet { functions, by_name, externals, decls }
}

struct BlockBuilder {
    stmts: Vec<CfgStmt>,
    term: Option<Terminator>,
}

impl BlockBuilder {
    fn finish(self) -> BasicBlock {
        BasicBlock {
            stmts: self.stmts,
            // Only blocks made unreachable by dead code lack a terminator.
            term: self.term.unwrap_or(Terminator::Ret {
                value: None,
                span: Span::at(crate::loc::SourceLoc::new(1, 1)),
            }),
        }
    }
}

struct Lowerer<'a> {
    blocks: Vec<BlockBuilder>,
    current: Option<BlockId>,
    decls: &'a mut Vec<DeclInfo>,
}

impl<'a> Lowerer<'a> {
    fn new_block(&mut self) -> BlockId {
        let id = BlockId(self.blocks.len() as u32);
        self.blocks.push(BlockBuilder { stmts: Vec::new(), term: None });
        id
    }

    fn ensure_current(&mut self) -> BlockId {
        match self.current {
            Some(b) => b,
            None => {
                let b = self.new_block();
                self.current = Some(b);
                b
            }
        }
    }

    fn push_stmt(&mut self, stmt: CfgStmt) {
        let b = self.ensure_current();
        self.blocks[b.index()].stmts.push(stmt);
    }

    fn seal(&mut self, term: Terminator) {
        if let Some(b) = self.current.take() {
            self.blocks[b.index()].term = Some(term);
        }
    }

    fn seal_block(&mut self, block: BlockId, term: Terminator) {
        let slot = &mut self.blocks[block.index()].term;
        debug_assert!(slot.is_none());
        *slot = Some(term);
    }

    fn fresh_temp(&mut self, span: Span) -> DeclId {
        let id = DeclId(self.decls.len() as u32);
        self.decls.push(DeclInfo {
            name: format!("_cc{}", id.0),
            ty: Type::int(),
            span,
        });
        id
    }

    fn lower_block(&mut self, block: &Block) {
        for stmt in &block.stmts {
            self.lower_stmt(stmt);
        }
    }

    fn lower_stmt(&mut self, stmt: &Stmt) {
        match &stmt.kind {
            StmtKind::Decl { ty, init, decl, .. } => {
                let init = init.as_ref().map(|e| self.flatten(e));
                self.push_stmt(CfgStmt::Decl {
                    decl: *decl,
                    ty: *ty,
                    init,
                    span: stmt.span,
                });
            }
            StmtKind::Assign { target, value } => {
                let value = self.flatten(value);
                match target {
                    LValue::Var { decl, .. } => {
                        self.push_stmt(CfgStmt::Assign {
                            decl: *decl,
                            value,
                            span: stmt.span,
                        });
                    }
                    LValue::Deref { ptr, star_span } => {
                        let ptr = self.flatten(ptr);
                        self.push_stmt(CfgStmt::Store {
                            ptr,
                            value,
                            star_span: *star_span,
                        });
                    }
                }
            }
            StmtKind::If { cond, then_blk, else_blk } => {
                self.ensure_current();
                let then_b = self.new_block();
                let else_b = self.new_block();
                self.lower_cond(cond, then_b, else_b);

                self.current = Some(then_b);
                self.lower_block(then_blk);
                let then_end = self.current.take();

                self.current = Some(else_b);
                if let Some(else_blk) = else_blk {
                    self.lower_block(else_blk);
                }
                let else_end = self.current.take();

                if then_end.is_none() && else_end.is_none() {
                    return;
                }
                let join = self.new_block();
                if let Some(b) = then_end {
                    self.seal_block(b, Terminator::Jump(join));
                }
                if let Some(b) = else_end {
                    self.seal_block(b, Terminator::Jump(join));
                }
                self.current = Some(join);
            }
            StmtKind::While { cond, body } => {
                self.ensure_current();
                let header = self.new_block();
                self.seal(Terminator::Jump(header));
                self.current = Some(header);
                let body_b = self.new_block();
                let exit_b = self.new_block();
                self.lower_cond(cond, body_b, exit_b);
                self.current = Some(body_b);
                self.lower_block(body);
                self.seal(Terminator::Jump(header));
                self.current = Some(exit_b);
            }
            StmtKind::Return { value } => {
                self.ensure_current();
                let value = value.as_ref().map(|e| self.flatten(e));
                self.seal(Terminator::Ret { value, span: stmt.span });
            }
            StmtKind::Expr(e) => {
                let expr = self.flatten(e);
                self.push_stmt(CfgStmt::Eval { expr });
            }
            StmtKind::Block(b) => self.lower_block(b),
        }
    }

    /// Emit branches for `cond` so control reaches `t` exactly when it is
    /// nonzero. Short-circuit operators split into blocks, `!` swaps the
    /// targets, and whatever remains is an atomic branch condition.
    fn lower_cond(&mut self, cond: &Expr, t: BlockId, f: BlockId) {
        match &cond.kind {
            ExprKind::Bin { op: AstBinOp::LogAnd, lhs, rhs, .. } => {
                let mid = self.new_block();
                self.lower_cond(lhs, mid, f);
                self.current = Some(mid);
                self.lower_cond(rhs, t, f);
            }
            ExprKind::Bin { op: AstBinOp::LogOr, lhs, rhs, .. } => {
                let mid = self.new_block();
                self.lower_cond(lhs, t, mid);
                self.current = Some(mid);
                self.lower_cond(rhs, t, f);
            }
            ExprKind::Un { op: AstUnOp::LogNot, operand } => {
                self.lower_cond(operand, f, t);
            }
            _ => {
                let cond = self.flatten(cond);
                self.seal(Terminator::Branch { cond, then_blk: t, else_blk: f });
            }
        }
    }

    /// Rebuild `e` with every short-circuit subexpression replaced by a
    /// temporary computed through explicit control flow.
    fn flatten(&mut self, e: &Expr) -> Expr {
        match &e.kind {
            ExprKind::Bin { op, .. } if op.is_short_circuit() => self.hoist_bool(e),
            ExprKind::IntLit(_) | ExprKind::Var { .. } => e.clone(),
            ExprKind::Un { op, operand } => Expr {
                kind: ExprKind::Un {
                    op: *op,
                    operand: Box::new(self.flatten(operand)),
                },
                ..e.clone()
            },
            ExprKind::Bin { op, op_span, lhs, rhs } => Expr {
                kind: ExprKind::Bin {
                    op: *op,
                    op_span: *op_span,
                    lhs: Box::new(self.flatten(lhs)),
                    rhs: Box::new(self.flatten(rhs)),
                },
                ..e.clone()
            },
            ExprKind::Cast { ty, operand } => Expr {
                kind: ExprKind::Cast {
                    ty: *ty,
                    operand: Box::new(self.flatten(operand)),
                },
                ..e.clone()
            },
            ExprKind::Call { name, args } => Expr {
                kind: ExprKind::Call {
                    name: name.clone(),
                    args: args.iter().map(|a| self.flatten(a)).collect(),
                },
                ..e.clone()
            },
        }
    }

    fn hoist_bool(&mut self, e: &Expr) -> Expr {
        let tmp = self.fresh_temp(e.span);
        let name = self.decls[tmp.0 as usize].name.clone();
        self.push_stmt(CfgStmt::Decl {
            decl: tmp,
            ty: Type::int(),
            init: None,
            span: e.span,
        });
        let tb = self.new_block();
        let fb = self.new_block();
        self.lower_cond(e, tb, fb);
        let join = self.new_block();
        for (blk, bit) in [(tb, 1u64), (fb, 0u64)] {
            self.current = Some(blk);
            let mut lit = Expr::new(ExprKind::IntLit(bit), e.span);
            lit.ty = Some(Type::int());
            self.push_stmt(CfgStmt::Assign { decl: tmp, value: lit, span: e.span });
            self.seal(Terminator::Jump(join));
        }
        self.current = Some(join);
        let mut var = Expr::new(ExprKind::Var { name, decl: tmp }, e.span);
        var.ty = Some(Type::int());
        var
    }
}

/// Render a CFG in a stable text form, mainly for tests and debugging.
pub fn dump_cfg(cfg: &Cfg, decls: &[DeclInfo]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "fn {} (entry b{})", cfg.name, cfg.entry.0);
    for (i, block) in cfg.blocks.iter().enumerate() {
        let _ = writeln!(out, "b{i}:");
        for stmt in &block.stmts {
            match stmt {
                CfgStmt::Decl { decl, ty, init, .. } => {
                    let name = &decls[decl.0 as usize].name;
                    match init {
                        Some(e) => {
                            let _ = writeln!(out, "  decl {name}: {ty} = {}", print_expr(e));
                        }
                        None => {
                            let _ = writeln!(out, "  decl {name}: {ty}");
                        }
                    }
                }
                CfgStmt::Assign { decl, value, .. } => {
                    let name = &decls[decl.0 as usize].name;
                    let _ = writeln!(out, "  {name} = {}", print_expr(value));
                }
                CfgStmt::Store { ptr, value, .. } => {
                    let _ = writeln!(out, "  *({}) = {}", print_expr(ptr), print_expr(value));
                }
                CfgStmt::Eval { expr } => {
                    let _ = writeln!(out, "  eval {}", print_expr(expr));
                }
            }
        }
        match &block.term {
            Terminator::Jump(b) => {
                let _ = writeln!(out, "  jump b{}", b.0);
            }
            Terminator::Branch { cond, then_blk, else_blk } => {
                let _ = writeln!(
                    out,
                    "  branch {} ? b{} : b{}",
                    print_expr(cond),
                    then_blk.0,
                    else_blk.0
                );
            }
            Terminator::Ret { value, .. } => match value {
                Some(e) => {
                    let _ = writeln!(out, "  ret {}", print_expr(e));
                }
                None => {
                    let _ = writeln!(out, "  ret");
                }
            },
        }
    }
    out
}
