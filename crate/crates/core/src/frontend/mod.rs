//! MiniC frontend: lexing, parsing, semantic analysis, and CFG lowering.
//!
//! The accepted language is a small C subset: the integer types `_Bool`,
//! `char`, `int`, `long` with optional sign specifiers, pointers to those,
//! `if`/`else`, `while`, `return`, declarations, assignments, calls, and the
//! usual integer operators. Everything else is rejected up front with an
//! [`FrontendError::Unsupported`] rather than silently mismodeled.

pub mod ast;
pub mod cfg;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod sema;

use crate::loc::SourceLoc;

pub use ast::{Ast, DeclId, DeclInfo, Type};
pub use cfg::{BasicBlock, BlockId, Cfg, CfgSet, CfgStmt, Terminator};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FrontendError {
    #[error("{loc}: syntax error: {message}")]
    Syntax { loc: SourceLoc, message: String },
    #[error("{loc}: unsupported construct: {construct}")]
    Unsupported { loc: SourceLoc, construct: String },
    #[error("{loc}: type error: {message}")]
    Type { loc: SourceLoc, message: String },
}

impl FrontendError {
    pub fn loc(&self) -> SourceLoc {
        match self {
            FrontendError::Syntax { loc, .. }
            | FrontendError::Unsupported { loc, .. }
            | FrontendError::Type { loc, .. } => *loc,
        }
    }
}

/// Front half of the pipeline: source text in, control-flow graphs out.
pub fn compile(src: &str) -> Result<CfgSet, FrontendError> {
    let mut ast = parser::parse_source(src)?;
    let sigs = sema::analyze(&mut ast)?;
    Ok(cfg::lower_ast(&ast, &sigs))
}

/// Parse and type-check without lowering; handy for tools that only need
/// the AST.
pub fn parse_and_check(src: &str) -> Result<Ast, FrontendError> {
    let mut ast = parser::parse_source(src)?;
    sema::analyze(&mut ast)?;
    Ok(ast)
}
