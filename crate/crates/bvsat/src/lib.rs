//! bvsat: a small SMT solver for quantifier-free bitvector formulas.
//!
//! Accepts the SMT-LIB 2 subset needed for program path conditions:
//! bitvector declarations, the core boolean connectives, and the full
//! QF_BV operator set including total division, extraction, and
//! extensions. Formulas are bit-blasted to CNF and decided by a CDCL
//! solver.

mod blast;
mod cdcl;
mod parse;

use std::collections::HashMap;

pub use blast::{Bv, Circuit};
pub use cdcl::{Lit, Solver, Var};
use parse::Sexpr;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Verdict {
    Sat,
    Unsat,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Sat => f.write_str("sat"),
            Verdict::Unsat => f.write_str("unsat"),
        }
    }
}

enum Val {
    Bool(Lit),
    Bv(Bv),
}

struct Script {
    circuit: Circuit,
    env: HashMap<String, Bv>,
}

impl Script {
    fn new() -> Script {
        Script { circuit: Circuit::new(), env: HashMap::new() }
    }

    fn declare(&mut self, name: &str, width: u32) -> Result<(), String> {
        if self.env.contains_key(name) {
            return Err(format!("duplicate declaration of {name}"));
        }
        let bv = self.circuit.bv_fresh(width);
        self.env.insert(name.to_string(), bv);
        Ok(())
    }

    fn eval_bool(&mut self, s: &Sexpr) -> Result<Lit, String> {
        match self.eval(s)? {
            Val::Bool(l) => Ok(l),
            Val::Bv(_) => Err(format!("expected a boolean term: {s}")),
        }
    }

    fn eval_bv(&mut self, s: &Sexpr) -> Result<Bv, String> {
        match self.eval(s)? {
            Val::Bv(v) => Ok(v),
            Val::Bool(_) => Err(format!("expected a bitvector term: {s}")),
        }
    }

    fn eval_bv_width(&mut self, s: &Sexpr, width: usize) -> Result<Bv, String> {
        let v = self.eval_bv(s)?;
        if v.len() != width {
            return Err(format!(
                "width mismatch: {s} has width {} where {width} is needed",
                v.len()
            ));
        }
        Ok(v)
    }

    fn eval(&mut self, s: &Sexpr) -> Result<Val, String> {
        match s {
            Sexpr::Atom(a) => self.eval_atom(a),
            Sexpr::List(items) => self.eval_list(items, s),
        }
    }

    fn eval_atom(&mut self, a: &str) -> Result<Val, String> {
        if let Some(hex) = a.strip_prefix("#x") {
            if hex.is_empty() || hex.len() > 16 {
                return Err(format!("unsupported hex literal width: #x{hex}"));
            }
            let bits = u64::from_str_radix(hex, 16)
                .map_err(|_| format!("bad hex literal #x{hex}"))?;
            let width = 4 * hex.len() as u32;
            return Ok(Val::Bv(self.circuit.bv_const(width, bits)));
        }
        if let Some(bin) = a.strip_prefix("#b") {
            if bin.is_empty() || bin.len() > 64 {
                return Err(format!("unsupported binary literal width: #b{bin}"));
            }
            let bits = u64::from_str_radix(bin, 2)
                .map_err(|_| format!("bad binary literal #b{bin}"))?;
            return Ok(Val::Bv(self.circuit.bv_const(bin.len() as u32, bits)));
        }
        match a {
            "true" => Ok(Val::Bool(self.circuit.tru())),
            "false" => Ok(Val::Bool(self.circuit.fls())),
            name => match self.env.get(name) {
                Some(bv) => Ok(Val::Bv(bv.clone())),
                None => Err(format!("unknown symbol {name}")),
            },
        }
    }

    fn eval_list(&mut self, items: &[Sexpr], whole: &Sexpr) -> Result<Val, String> {
        let Some(head) = items.first() else {
            return Err("empty application".to_string());
        };
        if let Some(indexed) = head.list() {
            return self.eval_indexed(indexed, &items[1..], whole);
        }
        let op = head.atom().expect("atom or list");
        let args = &items[1..];
        match op {
            "not" => {
                self.expect_arity(args, 1, whole)?;
                let b = self.eval_bool(&args[0])?;
                Ok(Val::Bool(!b))
            }
            "and" | "or" => {
                let mut acc = self.circuit.konst(op == "and");
                for a in args {
                    let b = self.eval_bool(a)?;
                    acc = if op == "and" {
                        self.circuit.and2(acc, b)
                    } else {
                        self.circuit.or2(acc, b)
                    };
                }
                Ok(Val::Bool(acc))
            }
            "=>" => {
                self.expect_arity(args, 2, whole)?;
                let a = self.eval_bool(&args[0])?;
                let b = self.eval_bool(&args[1])?;
                Ok(Val::Bool(self.circuit.or2(!a, b)))
            }
            "xor" => {
                self.expect_arity(args, 2, whole)?;
                let a = self.eval_bool(&args[0])?;
                let b = self.eval_bool(&args[1])?;
                Ok(Val::Bool(self.circuit.xor2(a, b)))
            }
            "=" => {
                if args.len() < 2 {
                    return Err(format!("= needs at least two arguments: {whole}"));
                }
                let first = self.eval(&args[0])?;
                let mut acc = self.circuit.tru();
                match first {
                    Val::Bool(mut prev) => {
                        for a in &args[1..] {
                            let b = self.eval_bool(a)?;
                            let e = self.circuit.eq2(prev, b);
                            acc = self.circuit.and2(acc, e);
                            prev = b;
                        }
                    }
                    Val::Bv(mut prev) => {
                        for a in &args[1..] {
                            let b = self.eval_bv_width(a, prev.len())?;
                            let e = self.circuit.bv_eq(&prev, &b);
                            acc = self.circuit.and2(acc, e);
                            prev = b;
                        }
                    }
                }
                Ok(Val::Bool(acc))
            }
            "ite" => {
                self.expect_arity(args, 3, whole)?;
                let c = self.eval_bool(&args[0])?;
                match self.eval(&args[1])? {
                    Val::Bool(a) => {
                        let b = self.eval_bool(&args[2])?;
                        Ok(Val::Bool(self.circuit.mux(c, a, b)))
                    }
                    Val::Bv(a) => {
                        let b = self.eval_bv_width(&args[2], a.len())?;
                        Ok(Val::Bv(self.circuit.bv_mux(c, &a, &b)))
                    }
                }
            }
            "bvnot" | "bvneg" => {
                self.expect_arity(args, 1, whole)?;
                let a = self.eval_bv(&args[0])?;
                let out = if op == "bvnot" {
                    self.circuit.bv_not(&a)
                } else {
                    self.circuit.bv_neg(&a)
                };
                Ok(Val::Bv(out))
            }
            "bvand" | "bvor" | "bvxor" | "bvadd" | "bvmul" => {
                if args.len() < 2 {
                    return Err(format!("{op} needs at least two arguments: {whole}"));
                }
                let mut acc = self.eval_bv(&args[0])?;
                for a in &args[1..] {
                    let b = self.eval_bv_width(a, acc.len())?;
                    acc = match op {
                        "bvand" => self.circuit.bv_and(&acc, &b),
                        "bvor" => self.circuit.bv_or(&acc, &b),
                        "bvxor" => self.circuit.bv_xor(&acc, &b),
                        "bvadd" => self.circuit.bv_add(&acc, &b),
                        "bvmul" => self.circuit.bv_mul(&acc, &b),
                        _ => unreachable!(),
                    };
                }
                Ok(Val::Bv(acc))
            }
            "bvsub" | "bvudiv" | "bvsdiv" | "bvurem" | "bvsrem" | "bvshl" | "bvlshr"
            | "bvashr" => {
                self.expect_arity(args, 2, whole)?;
                let a = self.eval_bv(&args[0])?;
                let b = self.eval_bv_width(&args[1], a.len())?;
                let out = match op {
                    "bvsub" => self.circuit.bv_sub(&a, &b),
                    "bvudiv" => self.circuit.bv_udiv_urem(&a, &b).0,
                    "bvurem" => self.circuit.bv_udiv_urem(&a, &b).1,
                    "bvsdiv" => self.circuit.bv_sdiv(&a, &b),
                    "bvsrem" => self.circuit.bv_srem(&a, &b),
                    "bvshl" => self.circuit.bv_shl(&a, &b),
                    "bvlshr" => self.circuit.bv_lshr(&a, &b),
                    "bvashr" => self.circuit.bv_ashr(&a, &b),
                    _ => unreachable!(),
                };
                Ok(Val::Bv(out))
            }
            "bvult" | "bvule" | "bvugt" | "bvuge" | "bvslt" | "bvsle" | "bvsgt" | "bvsge" => {
                self.expect_arity(args, 2, whole)?;
                let a = self.eval_bv(&args[0])?;
                let b = self.eval_bv_width(&args[1], a.len())?;
                let out = match op {
                    "bvult" => self.circuit.bv_ult(&a, &b),
                    "bvugt" => self.circuit.bv_ult(&b, &a),
                    "bvule" => !self.circuit.bv_ult(&b, &a),
                    "bvuge" => !self.circuit.bv_ult(&a, &b),
                    "bvslt" => self.circuit.bv_slt(&a, &b),
                    "bvsgt" => self.circuit.bv_slt(&b, &a),
                    "bvsle" => !self.circuit.bv_slt(&b, &a),
                    "bvsge" => !self.circuit.bv_slt(&a, &b),
                    _ => unreachable!(),
                };
                Ok(Val::Bool(out))
            }
            other => Err(format!("unsupported operator {other}")),
        }
    }

    fn eval_indexed(
        &mut self,
        indexed: &[Sexpr],
        args: &[Sexpr],
        whole: &Sexpr,
    ) -> Result<Val, String> {
        let tag = indexed
            .first()
            .and_then(Sexpr::atom)
            .ok_or_else(|| format!("bad indexed operator: {whole}"))?;
        if tag != "_" {
            return Err(format!("unsupported application head: {whole}"));
        }
        let name = indexed
            .get(1)
            .and_then(Sexpr::atom)
            .ok_or_else(|| format!("bad indexed operator: {whole}"))?;
        let index = |k: usize| -> Result<u32, String> {
            indexed
                .get(k)
                .and_then(Sexpr::atom)
                .and_then(|a| a.parse().ok())
                .ok_or_else(|| format!("bad index in {whole}"))
        };
        match name {
            "zero_extend" | "sign_extend" => {
                self.expect_arity(args, 1, whole)?;
                let k = index(2)?;
                let a = self.eval_bv(&args[0])?;
                let w = a.len() as u32 + k;
                let out = if name == "zero_extend" {
                    self.circuit.bv_zext(&a, w)
                } else {
                    self.circuit.bv_sext(&a, w)
                };
                Ok(Val::Bv(out))
            }
            "extract" => {
                self.expect_arity(args, 1, whole)?;
                let hi = index(2)?;
                let lo = index(3)?;
                let a = self.eval_bv(&args[0])?;
                if lo > hi || hi as usize >= a.len() {
                    return Err(format!("extract range out of bounds: {whole}"));
                }
                Ok(Val::Bv(self.circuit.bv_extract(&a, hi, lo)))
            }
            other => Err(format!("unsupported indexed operator {other}")),
        }
    }

    fn expect_arity(&self, args: &[Sexpr], n: usize, whole: &Sexpr) -> Result<(), String> {
        if args.len() == n {
            Ok(())
        } else {
            Err(format!("wrong number of arguments: {whole}"))
        }
    }
}

fn parse_bv_sort(s: &Sexpr) -> Result<u32, String> {
    let items = s.list().ok_or_else(|| format!("unsupported sort {s}"))?;
    let ok = items.len() == 3
        && items[0].atom() == Some("_")
        && items[1].atom() == Some("BitVec");
    if !ok {
        return Err(format!("unsupported sort {s}"));
    }
    let w: u32 = items[2]
        .atom()
        .and_then(|a| a.parse().ok())
        .ok_or_else(|| format!("bad bitvector width in {s}"))?;
    if w == 0 || w > 64 {
        return Err(format!("unsupported bitvector width {w}"));
    }
    Ok(w)
}

/// Run an SMT-LIB script and return the answer to its first `(check-sat)`.
pub fn check_smt2(input: &str) -> Result<Verdict, String> {
    let script = parse::parse_all(input)?;
    let mut st = Script::new();
    for cmd in &script {
        let items = cmd
            .list()
            .ok_or_else(|| format!("stray atom at top level: {cmd}"))?;
        let head = items
            .first()
            .and_then(Sexpr::atom)
            .ok_or_else(|| format!("bad command: {cmd}"))?;
        match head {
            "set-logic" | "set-option" | "set-info" => {}
            "declare-fun" => {
                if items.len() != 4 || items[2].list().is_none_or(|p| !p.is_empty()) {
                    return Err(format!("unsupported declaration: {cmd}"));
                }
                let name = items[1]
                    .atom()
                    .ok_or_else(|| format!("bad declaration name: {cmd}"))?;
                let width = parse_bv_sort(&items[3])?;
                st.declare(name, width)?;
            }
            "declare-const" => {
                if items.len() != 3 {
                    return Err(format!("unsupported declaration: {cmd}"));
                }
                let name = items[1]
                    .atom()
                    .ok_or_else(|| format!("bad declaration name: {cmd}"))?;
                let width = parse_bv_sort(&items[2])?;
                st.declare(name, width)?;
            }
            "assert" => {
                if items.len() != 2 {
                    return Err(format!("assert takes one term: {cmd}"));
                }
                let b = st.eval_bool(&items[1])?;
                st.circuit.assert_lit(b);
            }
            "check-sat" => {
                return Ok(if st.circuit.solver.solve() {
                    Verdict::Sat
                } else {
                    Verdict::Unsat
                });
            }
            "exit" => break,
            other => return Err(format!("unsupported command {other}")),
        }
    }
    Err("script contains no (check-sat)".to_string())
}
