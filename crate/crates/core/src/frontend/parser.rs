//! Recursive-descent parser. Produces an untyped [`Ast`]; name resolution
//! and typing happen in the sema pass.

use crate::ir::{Signedness, Width};
use crate::loc::{SourceLoc, Span};

use super::ast::*;
use super::lexer::{lex, Keyword, Punct, Token, TokenKind};
use super::FrontendError;

pub fn parse_tokens(tokens: Vec<Token>) -> Result<Ast, FrontendError> {
    let mut p = Parser { tokens, pos: 0 };
    let mut ast = Ast::default();
    while !p.at_eof() {
        ast.functions.push(p.function()?);
    }
    Ok(ast)
}

pub fn parse_source(src: &str) -> Result<Ast, FrontendError> {
    parse_tokens(lex(src)?)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek_ahead(&self, n: usize) -> &Token {
        &self.tokens[(self.pos + n).min(self.tokens.len() - 1)]
    }

    fn bump(&mut self) -> Token {
        let t = self.peek().clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn at_eof(&self) -> bool {
        self.peek().kind == TokenKind::Eof
    }

    fn at_punct(&self, p: Punct) -> bool {
        self.peek().kind == TokenKind::Punct(p)
    }

    fn eat_punct(&mut self, p: Punct) -> bool {
        if self.at_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: Punct) -> Result<Token, FrontendError> {
        if self.at_punct(p) {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&format!("`{}`", p.display())))
        }
    }

    fn unexpected(&self, wanted: &str) -> FrontendError {
        let tok = self.peek();
        FrontendError::Syntax {
            loc: tok.span.start,
            message: format!("expected {wanted}, found {}", tok.describe()),
        }
    }

    fn at_type_start(&self) -> bool {
        matches!(self.peek().kind, TokenKind::Keyword(k) if k.starts_type())
    }

    /// Base type specifier without declarator stars. `None` means `void`.
    fn base_type(&mut self) -> Result<Option<Type>, FrontendError> {
        let loc = self.peek().span.start;
        let mut signed: Option<Signedness> = None;
        loop {
            match self.peek().kind {
                TokenKind::Keyword(Keyword::Unsigned) => {
                    self.bump();
                    signed = Some(Signedness::Unsigned);
                }
                TokenKind::Keyword(Keyword::Signed) => {
                    self.bump();
                    signed = Some(Signedness::Signed);
                }
                _ => break,
            }
        }
        let width = match self.peek().kind {
            TokenKind::Keyword(Keyword::Int) => {
                self.bump();
                Width::W32
            }
            TokenKind::Keyword(Keyword::Char) => {
                self.bump();
                Width::W8
            }
            TokenKind::Keyword(Keyword::Long) => {
                self.bump();
                // Accept the spelling `long int` too.
                if self.peek().kind == TokenKind::Keyword(Keyword::Int) {
                    self.bump();
                }
                Width::W64
            }
            TokenKind::Keyword(Keyword::Bool) => {
                if signed.is_some() {
                    return Err(FrontendError::Syntax {
                        loc,
                        message: "`_Bool` cannot have a sign specifier".into(),
                    });
                }
                self.bump();
                return Ok(Some(Type::scalar(Width::W1, Signedness::Unsigned)));
            }
            TokenKind::Keyword(Keyword::Void) => {
                if signed.is_some() {
                    return Err(FrontendError::Syntax {
                        loc,
                        message: "`void` cannot have a sign specifier".into(),
                    });
                }
                self.bump();
                return Ok(None);
            }
            _ if signed.is_some() => Width::W32, // bare `unsigned` / `signed`
            _ => return Err(self.unexpected("a type")),
        };
        Ok(Some(Type::scalar(width, signed.unwrap_or(Signedness::Signed))))
    }

    fn pointer_stars(&mut self, base: Option<Type>, loc: SourceLoc) -> Result<Option<Type>, FrontendError> {
        let mut ty = base;
        while self.eat_punct(Punct::Star) {
            ty = match ty {
                Some(t) => Some(t.pointer_to()),
                None => {
                    // `void *` has no place in the subset: there is nothing
                    // it could point at that we can model.
                    return Err(FrontendError::Unsupported {
                        loc,
                        construct: "`void *`".into(),
                    });
                }
            };
        }
        Ok(ty)
    }

    fn ident(&mut self) -> Result<(String, Span), FrontendError> {
        match &self.peek().kind {
            TokenKind::Ident(name) => {
                let name = name.clone();
                let span = self.peek().span;
                self.bump();
                Ok((name, span))
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn function(&mut self) -> Result<Function, FrontendError> {
        let start = self.peek().span.start;
        if !self.at_type_start() {
            return Err(self.unexpected("a function definition"));
        }
        let base = self.base_type()?;
        let ret = self.pointer_stars(base, start)?;
        let (name, _) = self.ident()?;
        if !self.at_punct(Punct::LParen) {
            // A top-level declarator without a parameter list would be a
            // global variable.
            return Err(FrontendError::Unsupported {
                loc: self.peek().span.start,
                construct: "global variables".into(),
            });
        }
        self.bump();
        let mut params = Vec::new();
        if !self.at_punct(Punct::RParen) {
            if self.peek().kind == TokenKind::Keyword(Keyword::Void)
                && self.peek_ahead(1).kind == TokenKind::Punct(Punct::RParen)
            {
                self.bump();
            } else {
                loop {
                    params.push(self.param()?);
                    if !self.eat_punct(Punct::Comma) {
                        break;
                    }
                }
            }
        }
        self.expect_punct(Punct::RParen)?;
        let body = if self.eat_punct(Punct::Semi) {
            None
        } else if self.at_punct(Punct::LBrace) {
            Some(self.block()?)
        } else {
            return Err(self.unexpected("`{` or `;`"));
        };
        let end = self.tokens[self.pos.saturating_sub(1)].span.end;
        Ok(Function { name, ret, params, body, span: Span::new(start, end) })
    }

    fn param(&mut self) -> Result<Param, FrontendError> {
        let start = self.peek().span.start;
        let base = self.base_type()?;
        let ty = self.pointer_stars(base, start)?;
        let Some(ty) = ty else {
            return Err(FrontendError::Syntax {
                loc: start,
                message: "parameter cannot have type `void`".into(),
            });
        };
        let (name, span) = self.ident()?;
        Ok(Param { name, ty, decl: DeclId::UNRESOLVED, span })
    }

    fn block(&mut self) -> Result<Block, FrontendError> {
        self.expect_punct(Punct::LBrace)?;
        let mut stmts = Vec::new();
        while !self.at_punct(Punct::RBrace) {
            if self.at_eof() {
                return Err(self.unexpected("`}`"));
            }
            stmts.push(self.stmt()?);
        }
        self.bump();
        Ok(Block { stmts })
    }

    fn stmt(&mut self) -> Result<Stmt, FrontendError> {
        let start = self.peek().span.start;
        match self.peek().kind {
            TokenKind::Keyword(Keyword::If) => self.if_stmt(),
            TokenKind::Keyword(Keyword::While) => self.while_stmt(),
            TokenKind::Keyword(Keyword::Return) => {
                self.bump();
                let value = if self.at_punct(Punct::Semi) {
                    None
                } else {
                    Some(self.expr()?)
                };
                let end = self.expect_punct(Punct::Semi)?.span.end;
                Ok(Stmt {
                    kind: StmtKind::Return { value },
                    span: Span::new(start, end),
                })
            }
            TokenKind::Punct(Punct::LBrace) => {
                let block = self.block()?;
                let end = self.tokens[self.pos - 1].span.end;
                Ok(Stmt {
                    kind: StmtKind::Block(block),
                    span: Span::new(start, end),
                })
            }
            TokenKind::Keyword(k) if k.starts_type() => self.decl_stmt(),
            _ => self.expr_or_assign_stmt(),
        }
    }

    fn if_stmt(&mut self) -> Result<Stmt, FrontendError> {
        let start = self.bump().span.start;
        self.expect_punct(Punct::LParen)?;
        let cond = self.expr()?;
        self.expect_punct(Punct::RParen)?;
        let then_blk = self.stmt_as_block()?;
        let else_blk = if self.peek().kind == TokenKind::Keyword(Keyword::Else) {
            self.bump();
            Some(self.stmt_as_block()?)
        } else {
            None
        };
        let end = self.tokens[self.pos - 1].span.end;
        Ok(Stmt {
            kind: StmtKind::If { cond, then_blk, else_blk },
            span: Span::new(start, end),
        })
    }

    fn while_stmt(&mut self) -> Result<Stmt, FrontendError> {
        let start = self.bump().span.start;
        self.expect_punct(Punct::LParen)?;
        let cond = self.expr()?;
        self.expect_punct(Punct::RParen)?;
        let body = self.stmt_as_block()?;
        let end = self.tokens[self.pos - 1].span.end;
        Ok(Stmt {
            kind: StmtKind::While { cond, body },
            span: Span::new(start, end),
        })
    }

    /// Branch and loop bodies: either a braced block or a single statement
    /// wrapped into one.
    fn stmt_as_block(&mut self) -> Result<Block, FrontendError> {
        if self.at_punct(Punct::LBrace) {
            self.block()
        } else {
            Ok(Block { stmts: vec![self.stmt()?] })
        }
    }

    fn decl_stmt(&mut self) -> Result<Stmt, FrontendError> {
        let start = self.peek().span.start;
        let base = self.base_type()?;
        // One statement per declarator; `int a, b;` splits into a block of
        // two declarations so later passes only ever see single declarators.
        let mut decls = Vec::new();
        loop {
            let star_loc = self.peek().span.start;
            let ty = self.pointer_stars(base, star_loc)?;
            let Some(ty) = ty else {
                return Err(FrontendError::Syntax {
                    loc: start,
                    message: "variable cannot have type `void`".into(),
                });
            };
            let (name, name_span) = self.ident()?;
            let init = if self.eat_punct(Punct::Assign) {
                Some(self.expr()?)
            } else {
                None
            };
            decls.push(Stmt {
                kind: StmtKind::Decl { name, ty, init, decl: DeclId::UNRESOLVED },
                span: name_span,
            });
            if !self.eat_punct(Punct::Comma) {
                break;
            }
        }
        let end = self.expect_punct(Punct::Semi)?.span.end;
        if decls.len() == 1 {
            let mut stmt = decls.pop().unwrap();
            stmt.span = Span::new(start, end);
            Ok(stmt)
        } else {
            Ok(Stmt {
                kind: StmtKind::Block(Block { stmts: decls }),
                span: Span::new(start, end),
            })
        }
    }

    fn expr_or_assign_stmt(&mut self) -> Result<Stmt, FrontendError> {
        let start = self.peek().span.start;
        // `*p = e;` is a store; `x = e;` an assignment; anything else an
        // expression statement.
        let lhs = self.expr()?;
        if self.eat_punct(Punct::Assign) {
            let target = match lhs.kind {
                ExprKind::Var { name, decl } => LValue::Var { name, decl },
                ExprKind::Un { op: AstUnOp::Deref, operand } => LValue::Deref {
                    ptr: *operand,
                    star_span: Span::at(lhs.span.start),
                },
                _ => {
                    return Err(FrontendError::Syntax {
                        loc: lhs.span.start,
                        message: "assignment target must be a variable or `*pointer`".into(),
                    });
                }
            };
            let value = self.expr()?;
            let end = self.expect_punct(Punct::Semi)?.span.end;
            Ok(Stmt {
                kind: StmtKind::Assign { target, value },
                span: Span::new(start, end),
            })
        } else {
            let end = self.expect_punct(Punct::Semi)?.span.end;
            Ok(Stmt { kind: StmtKind::Expr(lhs), span: Span::new(start, end) })
        }
    }

    fn expr(&mut self) -> Result<Expr, FrontendError> {
        self.binary_expr(0)
    }

    fn binary_expr(&mut self, min_prec: u8) -> Result<Expr, FrontendError> {
        let mut lhs = self.unary_expr()?;
        loop {
            let Some((op, prec)) = self.peek_binop() else { break };
            if prec < min_prec {
                break;
            }
            let op_span = self.bump().span;
            let rhs = self.binary_expr(prec + 1)?;
            let span = Span::new(lhs.span.start, rhs.span.end);
            lhs = Expr::new(
                ExprKind::Bin { op, op_span, lhs: Box::new(lhs), rhs: Box::new(rhs) },
                span,
            );
        }
        Ok(lhs)
    }

    fn peek_binop(&self) -> Option<(AstBinOp, u8)> {
        let TokenKind::Punct(p) = self.peek().kind else { return None };
        Some(match p {
            Punct::PipePipe => (AstBinOp::LogOr, 1),
            Punct::AmpAmp => (AstBinOp::LogAnd, 2),
            Punct::Pipe => (AstBinOp::BitOr, 3),
            Punct::Caret => (AstBinOp::BitXor, 4),
            Punct::Amp => (AstBinOp::BitAnd, 5),
            Punct::EqEq => (AstBinOp::Eq, 6),
            Punct::Ne => (AstBinOp::Ne, 6),
            Punct::Lt => (AstBinOp::Lt, 7),
            Punct::Le => (AstBinOp::Le, 7),
            Punct::Gt => (AstBinOp::Gt, 7),
            Punct::Ge => (AstBinOp::Ge, 7),
            Punct::Shl => (AstBinOp::Shl, 8),
            Punct::Shr => (AstBinOp::Shr, 8),
            Punct::Plus => (AstBinOp::Add, 9),
            Punct::Minus => (AstBinOp::Sub, 9),
            Punct::Star => (AstBinOp::Mul, 10),
            Punct::Slash => (AstBinOp::Div, 10),
            Punct::Percent => (AstBinOp::Rem, 10),
            _ => return None,
        })
    }

    fn unary_expr(&mut self) -> Result<Expr, FrontendError> {
        let start = self.peek().span.start;
        let op = match self.peek().kind {
            TokenKind::Punct(Punct::Minus) => Some(AstUnOp::Neg),
            TokenKind::Punct(Punct::Bang) => Some(AstUnOp::LogNot),
            TokenKind::Punct(Punct::Tilde) => Some(AstUnOp::BitNot),
            TokenKind::Punct(Punct::Star) => Some(AstUnOp::Deref),
            TokenKind::Punct(Punct::Amp) => Some(AstUnOp::AddrOf),
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            let operand = self.unary_expr()?;
            let span = Span::new(start, operand.span.end);
            return Ok(Expr::new(ExprKind::Un { op, operand: Box::new(operand) }, span));
        }
        // A parenthesized type is a cast, which binds at unary level.
        if self.at_punct(Punct::LParen) {
            if let TokenKind::Keyword(k) = self.peek_ahead(1).kind {
                if k.starts_type() {
                    self.bump();
                    let base = self.base_type()?;
                    let ty = self.pointer_stars(base, start)?;
                    let Some(ty) = ty else {
                        return Err(FrontendError::Unsupported {
                            loc: start,
                            construct: "casts to `void`".into(),
                        });
                    };
                    self.expect_punct(Punct::RParen)?;
                    let operand = self.unary_expr()?;
                    let span = Span::new(start, operand.span.end);
                    return Ok(Expr::new(
                        ExprKind::Cast { ty, operand: Box::new(operand) },
                        span,
                    ));
                }
            }
        }
        self.primary_expr()
    }

    fn primary_expr(&mut self) -> Result<Expr, FrontendError> {
        let tok = self.peek().clone();
        match tok.kind {
            TokenKind::Int(v) => {
                self.bump();
                Ok(Expr::new(ExprKind::IntLit(v), tok.span))
            }
            TokenKind::Ident(name) => {
                self.bump();
                if self.at_punct(Punct::LParen) {
                    self.bump();
                    let mut args = Vec::new();
                    if !self.at_punct(Punct::RParen) {
                        loop {
                            args.push(self.expr()?);
                            if !self.eat_punct(Punct::Comma) {
                                break;
                            }
                        }
                    }
                    let end = self.expect_punct(Punct::RParen)?.span.end;
                    Ok(Expr::new(
                        ExprKind::Call { name, args },
                        Span::new(tok.span.start, end),
                    ))
                } else {
                    Ok(Expr::new(
                        ExprKind::Var { name, decl: DeclId::UNRESOLVED },
                        tok.span,
                    ))
                }
            }
            TokenKind::Punct(Punct::LParen) => {
                self.bump();
                let inner = self.expr()?;
                let end = self.expect_punct(Punct::RParen)?.span.end;
                Ok(Expr { span: Span::new(tok.span.start, end), ..inner })
            }
            _ => Err(self.unexpected("an expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_small_function() {
        let src = "unsigned int func(unsigned int a) {\n\
                   \x20 unsigned int *z = 0;\n\
                   \x20 if ((a & 1) && ((a & 1) ^ 1))\n\
                   \x20   return *z;\n\
                   \x20 return 0;\n\
                   }\n";
        let ast = parse_source(src).unwrap();
        assert_eq!(ast.functions.len(), 1);
        let f = &ast.functions[0];
        assert_eq!(f.name, "func");
        assert_eq!(f.ret, Some(Type::scalar(Width::W32, Signedness::Unsigned)));
        assert_eq!(f.params.len(), 1);
        assert_eq!(ast.statement_count(), 4);
    }

    #[test]
    fn empty_input_parses_to_empty_ast() {
        let ast = parse_source("").unwrap();
        assert_eq!(ast.functions.len(), 0);
    }

    #[test]
    fn truncated_header_is_a_syntax_error_on_line_one() {
        let err = parse_source("int f( {").unwrap_err();
        match err {
            FrontendError::Syntax { loc, .. } => assert_eq!(loc.line, 1),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn precedence_matches_c() {
        // a & 1 == 0 parses as a & (1 == 0) in C.
        let ast = parse_source("int f(int a) { return a & 1 == 0; }").unwrap();
        let f = &ast.functions[0];
        let StmtKind::Return { value: Some(e) } = &f.body.as_ref().unwrap().stmts[0].kind
        else {
            panic!()
        };
        let ExprKind::Bin { op, rhs, .. } = &e.kind else { panic!() };
        assert_eq!(*op, AstBinOp::BitAnd);
        let ExprKind::Bin { op: inner, .. } = &rhs.kind else { panic!() };
        assert_eq!(*inner, AstBinOp::Eq);
    }

    #[test]
    fn multi_declarator_splits() {
        let ast = parse_source("void f(void) { int a = 1, b; }").unwrap();
        let body = ast.functions[0].body.as_ref().unwrap();
        assert_eq!(body.stmts.len(), 1);
        let StmtKind::Block(inner) = &body.stmts[0].kind else { panic!() };
        assert_eq!(inner.stmts.len(), 2);
        assert!(matches!(inner.stmts[0].kind, StmtKind::Decl { .. }));
        assert!(matches!(inner.stmts[1].kind, StmtKind::Decl { .. }));
    }

    #[test]
    fn cast_binds_tighter_than_binary_ops() {
        let ast = parse_source("int f(int a) { return (long)a + 1; }").unwrap();
        let f = &ast.functions[0];
        let StmtKind::Return { value: Some(e) } = &f.body.as_ref().unwrap().stmts[0].kind
        else {
            panic!()
        };
        let ExprKind::Bin { op: AstBinOp::Add, lhs, .. } = &e.kind else {
            panic!("expected addition at root")
        };
        assert!(matches!(lhs.kind, ExprKind::Cast { .. }));
    }

    #[test]
    fn prototypes_have_no_body() {
        let ast = parse_source("int getchar(void); void f() { getchar(); }").unwrap();
        assert_eq!(ast.functions.len(), 2);
        assert!(ast.functions[0].body.is_none());
        assert!(ast.functions[1].body.is_some());
    }

    #[test]
    fn store_through_pointer_parses_as_assignment() {
        let ast = parse_source("void f(int *p) { *p = 3; }").unwrap();
        let body = ast.functions[0].body.as_ref().unwrap();
        let StmtKind::Assign { target: LValue::Deref { .. }, .. } = &body.stmts[0].kind
        else {
            panic!("expected deref store")
        };
    }

    #[test]
    fn deref_star_span_points_at_the_star() {
        let src = "int f(int *z) {\n  return *z;\n}";
        let ast = parse_source(src).unwrap();
        let body = ast.functions[0].body.as_ref().unwrap();
        let StmtKind::Return { value: Some(e) } = &body.stmts[0].kind else { panic!() };
        assert_eq!(e.span.start, SourceLoc::new(2, 10));
    }

    #[test]
    fn global_variables_are_unsupported() {
        let err = parse_source("int g;").unwrap_err();
        assert!(matches!(err, FrontendError::Unsupported { .. }));
        assert!(err.to_string().contains("global"));
    }

    #[test]
    fn dangling_else_binds_to_nearest_if() {
        let ast =
            parse_source("int f(int a, int b) { if (a) if (b) return 1; else return 2; return 0; }")
                .unwrap();
        let body = ast.functions[0].body.as_ref().unwrap();
        let StmtKind::If { then_blk, else_blk, .. } = &body.stmts[0].kind else { panic!() };
        assert!(else_blk.is_none());
        let StmtKind::If { else_blk: inner_else, .. } = &then_blk.stmts[0].kind else {
            panic!()
        };
        assert!(inner_else.is_some());
    }
}
