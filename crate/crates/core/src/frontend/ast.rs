//! Abstract syntax for MiniC, the analyzed C subset.
//!
//! Trees come out of the parser untyped; the sema pass resolves names to
//! declaration ids and fills in the `ty` annotations that lowering and
//! symbolic execution rely on.

use std::fmt;

use crate::ir::{Signedness, Width};
use crate::loc::Span;

/// A scalar or pointer type. All pointers are 64-bit values; `ptr_depth`
/// counts the stars.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Type {
    pub width: Width,
    pub signedness: Signedness,
    pub ptr_depth: u8,
}

impl Type {
    pub fn scalar(width: Width, signedness: Signedness) -> Type {
        Type { width, signedness, ptr_depth: 0 }
    }

    pub fn int() -> Type {
        Type::scalar(Width::W32, Signedness::Signed)
    }

    pub fn is_pointer(self) -> bool {
        self.ptr_depth > 0
    }

    /// The width of a value of this type.
    pub fn value_width(self) -> Width {
        if self.is_pointer() {
            Width::W64
        } else {
            self.width
        }
    }

    /// Signedness of the value; pointers compare unsigned.
    pub fn value_signedness(self) -> Signedness {
        if self.is_pointer() {
            Signedness::Unsigned
        } else {
            self.signedness
        }
    }

    pub fn pointee(self) -> Type {
        debug_assert!(self.is_pointer());
        Type { ptr_depth: self.ptr_depth - 1, ..self }
    }

    pub fn pointer_to(self) -> Type {
        Type { ptr_depth: self.ptr_depth + 1, ..self }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = match (self.width, self.signedness) {
            (Width::W1, _) => "_Bool",
            (Width::W8, Signedness::Signed) => "char",
            (Width::W8, Signedness::Unsigned) => "unsigned char",
            (Width::W32, Signedness::Signed) => "int",
            (Width::W32, Signedness::Unsigned) => "unsigned int",
            (Width::W64, Signedness::Signed) => "long",
            (Width::W64, Signedness::Unsigned) => "unsigned long",
        };
        write!(f, "{base}")?;
        if self.ptr_depth > 0 {
            write!(f, " {}", "*".repeat(self.ptr_depth as usize))?;
        }
        Ok(())
    }
}

/// Index into [`Ast::decls`]. Assigned by sema; the parser leaves the
/// placeholder value.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct DeclId(pub u32);

impl DeclId {
    pub const UNRESOLVED: DeclId = DeclId(u32::MAX);
}

#[derive(Clone, Debug)]
pub struct DeclInfo {
    pub name: String,
    pub ty: Type,
    pub span: Span,
}

#[derive(Clone, Debug, Default)]
pub struct Ast {
    pub functions: Vec<Function>,
    /// Every variable declaration in the translation unit (parameters and
    /// locals), indexed by [`DeclId`].
    pub decls: Vec<DeclInfo>,
}

impl Ast {
    pub fn decl(&self, id: DeclId) -> &DeclInfo {
        &self.decls[id.0 as usize]
    }

    pub fn function(&self, name: &str) -> Option<&Function> {
        self.functions.iter().find(|f| f.name == name)
    }

    /// Total number of statements, counting nested ones.
    pub fn statement_count(&self) -> usize {
        fn count_block(b: &Block) -> usize {
            b.stmts.iter().map(count_stmt).sum()
        }
        fn count_stmt(s: &Stmt) -> usize {
            1 + match &s.kind {
                StmtKind::If { then_blk, else_blk, .. } => {
                    count_block(then_blk) + else_blk.as_ref().map_or(0, count_block)
                }
                StmtKind::While { body, .. } => count_block(body),
                StmtKind::Block(b) => count_block(b),
                _ => 0,
            }
        }
        self.functions
            .iter()
            .filter_map(|f| f.body.as_ref())
            .map(count_block)
            .sum()
    }
}

#[derive(Clone, Debug)]
pub struct Function {
    pub name: String,
    /// `None` is `void`.
    pub ret: Option<Type>,
    pub params: Vec<Param>,
    /// `None` for a prototype (declared-but-undefined external).
    pub body: Option<Block>,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct Param {
    pub name: String,
    pub ty: Type,
    pub decl: DeclId,
    pub span: Span,
}

#[derive(Clone, Debug, Default)]
pub struct Block {
    pub stmts: Vec<Stmt>,
}

#[derive(Clone, Debug)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub enum StmtKind {
    Decl {
        name: String,
        ty: Type,
        init: Option<Expr>,
        decl: DeclId,
    },
    Assign {
        target: LValue,
        value: Expr,
    },
    If {
        cond: Expr,
        then_blk: Block,
        else_blk: Option<Block>,
    },
    While {
        cond: Expr,
        body: Block,
    },
    Return {
        value: Option<Expr>,
    },
    Expr(Expr),
    Block(Block),
}

#[derive(Clone, Debug)]
pub enum LValue {
    Var { name: String, decl: DeclId },
    Deref { ptr: Expr, star_span: Span },
}

#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
    /// Resolved type; `None` until sema runs (or for `void` calls).
    pub ty: Option<Type>,
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Expr {
        Expr { kind, span, ty: None }
    }

    /// The resolved type. Panics if sema has not run.
    pub fn type_of(&self) -> Type {
        self.ty.expect("expression not typed")
    }

    pub fn is_literal_zero(&self) -> bool {
        matches!(self.kind, ExprKind::IntLit(0))
    }
}

#[derive(Clone, Debug)]
pub enum ExprKind {
    IntLit(u64),
    Var {
        name: String,
        decl: DeclId,
    },
    Un {
        op: AstUnOp,
        operand: Box<Expr>,
    },
    Bin {
        op: AstBinOp,
        op_span: Span,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Cast {
        ty: Type,
        operand: Box<Expr>,
    },
    Call {
        name: String,
        args: Vec<Expr>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AstUnOp {
    Neg,
    LogNot,
    BitNot,
    Deref,
    AddrOf,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AstBinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Shl,
    Shr,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    BitAnd,
    BitXor,
    BitOr,
    LogAnd,
    LogOr,
}

impl AstBinOp {
    pub fn is_comparison(self) -> bool {
        use AstBinOp::*;
        matches!(self, Lt | Le | Gt | Ge | Eq | Ne)
    }

    pub fn is_short_circuit(self) -> bool {
        matches!(self, AstBinOp::LogAnd | AstBinOp::LogOr)
    }

    pub fn symbol(self) -> &'static str {
        use AstBinOp::*;
        match self {
            Add => "+",
            Sub => "-",
            Mul => "*",
            Div => "/",
            Rem => "%",
            Shl => "<<",
            Shr => ">>",
            Lt => "<",
            Le => "<=",
            Gt => ">",
            Ge => ">=",
            Eq => "==",
            Ne => "!=",
            BitAnd => "&",
            BitXor => "^",
            BitOr => "|",
            LogAnd => "&&",
            LogOr => "||",
        }
    }
}

impl AstUnOp {
    pub fn symbol(self) -> &'static str {
        match self {
            AstUnOp::Neg => "-",
            AstUnOp::LogNot => "!",
            AstUnOp::BitNot => "~",
            AstUnOp::Deref => "*",
            AstUnOp::AddrOf => "&",
        }
    }
}
