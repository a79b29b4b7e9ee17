//! AST pretty printer. Expressions come out fully parenthesized so the
//! output is unambiguous regardless of operator precedence; printing and
//! reparsing reaches a fixpoint, which the round-trip tests lean on.

use std::fmt::Write;

use super::ast::*;

pub fn print_ast(ast: &Ast) -> String {
    let mut out = String::new();
    for (i, f) in ast.functions.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_function(&mut out, f);
    }
    out
}

fn print_function(out: &mut String, f: &Function) {
    match f.ret {
        Some(ty) => {
            let _ = write!(out, "{ty} {}(", f.name);
        }
        None => {
            let _ = write!(out, "void {}(", f.name);
        }
    }
    if f.params.is_empty() {
        out.push_str("void");
    } else {
        for (i, p) in f.params.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "{} {}", p.ty, p.name);
        }
    }
    out.push(')');
    match &f.body {
        None => out.push_str(";\n"),
        Some(body) => {
            out.push_str(" {\n");
            for stmt in &body.stmts {
                print_stmt(out, stmt, 1);
            }
            out.push_str("}\n");
        }
    }
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

fn print_stmt(out: &mut String, stmt: &Stmt, level: usize) {
    indent(out, level);
    match &stmt.kind {
        StmtKind::Decl { name, ty, init, .. } => {
            let _ = write!(out, "{ty} {name}");
            if let Some(init) = init {
                let _ = write!(out, " = {}", print_expr(init));
            }
            out.push_str(";\n");
        }
        StmtKind::Assign { target, value } => {
            match target {
                LValue::Var { name, .. } => {
                    let _ = write!(out, "{name}");
                }
                LValue::Deref { ptr, .. } => {
                    let _ = write!(out, "*{}", print_expr_parens(ptr));
                }
            }
            let _ = write!(out, " = {};\n", print_expr(value));
        }
        StmtKind::If { cond, then_blk, else_blk } => {
            let _ = write!(out, "if ({}) {{\n", print_expr(cond));
            for s in &then_blk.stmts {
                print_stmt(out, s, level + 1);
            }
            indent(out, level);
            out.push('}');
            if let Some(else_blk) = else_blk {
                out.push_str(" else {\n");
                for s in &else_blk.stmts {
                    print_stmt(out, s, level + 1);
                }
                indent(out, level);
                out.push('}');
            }
            out.push('\n');
        }
        StmtKind::While { cond, body } => {
            let _ = write!(out, "while ({}) {{\n", print_expr(cond));
            for s in &body.stmts {
                print_stmt(out, s, level + 1);
            }
            indent(out, level);
            out.push_str("}\n");
        }
        StmtKind::Return { value } => {
            match value {
                Some(v) => {
                    let _ = write!(out, "return {};\n", print_expr(v));
                }
                None => out.push_str("return;\n"),
            }
        }
        StmtKind::Expr(e) => {
            let _ = write!(out, "{};\n", print_expr(e));
        }
        StmtKind::Block(b) => {
            out.push_str("{\n");
            for s in &b.stmts {
                print_stmt(out, s, level + 1);
            }
            indent(out, level);
            out.push_str("}\n");
        }
    }
}

pub fn print_expr(expr: &Expr) -> String {
    match &expr.kind {
        ExprKind::IntLit(v) => v.to_string(),
        ExprKind::Var { name, .. } => name.clone(),
        ExprKind::Un { op, operand } => {
            format!("{}{}", op.symbol(), print_expr_parens(operand))
        }
        ExprKind::Bin { op, lhs, rhs, .. } => format!(
            "{} {} {}",
            print_expr_parens(lhs),
            op.symbol(),
            print_expr_parens(rhs)
        ),
        ExprKind::Cast { ty, operand } => {
            format!("({ty}){}", print_expr_parens(operand))
        }
        ExprKind::Call { name, args } => {
            let args: Vec<String> = args.iter().map(print_expr).collect();
            format!("{name}({})", args.join(", "))
        }
    }
}

/// Like [`print_expr`] but wraps anything compound in parentheses.
fn print_expr_parens(expr: &Expr) -> String {
    match &expr.kind {
        ExprKind::IntLit(_) | ExprKind::Var { .. } | ExprKind::Call { .. } => {
            print_expr(expr)
        }
        _ => format!("({})", print_expr(expr)),
    }
}
