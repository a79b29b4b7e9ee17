//! Random loop-free MiniC programs with enumerable input domains.
//!
//! Every generated function takes at most two parameters of width 8, so
//! exhaustive input enumeration (via [`crate::interp`]) decides exactly
//! which bugs are reachable. Guards mix interval-friendly comparisons with
//! bitmask, remainder, and xor tests the interval domain must treat as
//! opaque; some guard combinations are contradictory on purpose, which is
//! what gives the refutation stage something to prove.
//!
//! One structural rule keeps ground truth aligned with path-based
//! reporting: each control path contains at most one statement that can
//! trigger a bug (a division with a non-constant divisor, or a dereference
//! of a possibly-null pointer). Bug sites only ever appear as branch
//! leaves, so a run never passes one bug site on the way to another.

use rand::{Rng, RngExt};

/// A generated program plus the name of its entry function.
#[derive(Clone, Debug)]
pub struct Generated {
    pub src: String,
    pub func: &'static str,
}

struct Builder<'a, R: Rng> {
    rng: &'a mut R,
    lines: Vec<String>,
    indent: usize,
    /// Scalar variable names usable in expressions.
    scalars: Vec<String>,
    has_ptr: bool,
}

impl<'a, R: Rng> Builder<'a, R> {
    fn stmt(&mut self, text: String) {
        self.lines.push(format!("{}{}", "    ".repeat(self.indent), text));
    }

    fn pick<'t>(&mut self, options: &[&'t str]) -> &'t str {
        options[self.rng.random_range(0..options.len())]
    }

    fn scalar(&mut self) -> String {
        let i = self.rng.random_range(0..self.scalars.len());
        self.scalars[i].clone()
    }

    /// A side-effect-free expression that can never divide or dereference.
    fn filler_expr(&mut self) -> String {
        let v = self.scalar();
        let k = self.rng.random_range(1..16);
        match self.rng.random_range(0..5) {
            0 => format!("{v} + {k}"),
            1 => format!("{v} * {k}"),
            2 => format!("({v} ^ {k}) - {}", self.rng.random_range(0..8)),
            3 => format!("({v} << {}) + {k}", self.rng.random_range(0..3)),
            _ => format!("{v} | {}", self.rng.random_range(1..16)),
        }
    }

    fn guard(&mut self) -> String {
        let v = self.scalar();
        match self.rng.random_range(0..8) {
            0 => {
                let m = self.pick(&["1", "3", "7", "15", "31"]);
                let k = self.rng.random_range(0..24);
                format!("({v} & {m}) == {k}")
            }
            1 => {
                let d = self.pick(&["2", "3", "5", "7"]);
                let k = self.rng.random_range(0..8);
                format!("({v} % {d}) == {k}")
            }
            2 => {
                let k1 = self.rng.random_range(0..64);
                let k2 = self.rng.random_range(0..64);
                format!("({v} ^ {k1}) == {k2}")
            }
            3 => {
                let op = self.pick(&["<", ">", "<=", ">=", "=="]);
                let k = self.rng.random_range(0..40);
                format!("{v} {op} {k}")
            }
            4 => {
                let m = self.pick(&["1", "2", "4", "8", "12"]);
                format!("{v} & {m}")
            }
            5 => {
                let m = self.pick(&["1", "2", "4", "8"]);
                format!("!({v} & {m})")
            }
            6 => format!("({v} & 1) && !({v} & 1)"),
            _ => {
                let m = self.pick(&["3", "7"]);
                let k1 = self.rng.random_range(0..4);
                let k2 = self.rng.random_range(0..4);
                format!("({v} & {m}) == {k1} || ({v} & {m}) == {k2}")
            }
        }
    }

    /// A divisor that the checker has to treat as possibly zero.
    fn divisor(&mut self) -> String {
        let v = self.scalar();
        match self.rng.random_range(0..5) {
            0 => {
                let m = self.pick(&["1", "3", "7", "15"]);
                format!("({v} & {m})")
            }
            1 => {
                let d = self.pick(&["3", "5", "7"]);
                format!("({v} % {d})")
            }
            2 => format!("({v} ^ {})", self.rng.random_range(0..32)),
            3 => format!("({v} - {})", self.rng.random_range(0..16)),
            _ => {
                let m = self.pick(&["3", "7", "15"]);
                format!("(({v} & {m}) - {})", self.rng.random_range(0..4))
            }
        }
    }

    /// One terminal statement for a path: either harmless or the path's
    /// single bug site.
    fn leaf(&mut self) {
        let ptr_leaves = if self.has_ptr { 2 } else { 0 };
        match self.rng.random_range(0..4 + ptr_leaves) {
            0 | 1 => {
                let e = self.filler_expr();
                self.stmt(format!("x = {e};"));
            }
            2 => {
                let num = self.rng.random_range(1..100);
                let d = self.divisor();
                self.stmt(format!("x = {num} / {d};"));
            }
            3 => {
                let v = self.scalar();
                let d = self.divisor();
                self.stmt(format!("x = {v} % {d};"));
            }
            4 => self.stmt("x = *p;".to_string()),
            _ => {
                let e = self.filler_expr();
                self.stmt(format!("*p = {e};"));
            }
        }
    }

    fn arm_body(&mut self, depth: u32) {
        if self.has_ptr && self.rng.random_bool(0.25) {
            let target = self.pick(&["0", "&q"]);
            self.stmt(format!("p = {target};"));
        }
        if self.rng.random_bool(0.4) {
            let e = self.filler_expr();
            self.stmt(format!("x = {e};"));
        }
        if depth > 0 && self.rng.random_bool(0.6) {
            self.tree(depth - 1);
        } else {
            self.leaf();
        }
    }

    fn tree(&mut self, depth: u32) {
        let g = self.guard();
        self.stmt(format!("if ({g}) {{"));
        self.indent += 1;
        self.arm_body(depth);
        self.indent -= 1;
        if self.rng.random_bool(0.6) {
            self.stmt("} else {".to_string());
            self.indent += 1;
            self.arm_body(depth);
            self.indent -= 1;
        }
        self.stmt("}".to_string());
    }
}

/// Generate one random program. Drive this with a seeded RNG to get a
/// reproducible corpus.
pub fn generate<R: Rng>(rng: &mut R) -> Generated {
    let two_params = rng.random_bool(0.6);
    let has_ptr = rng.random_bool(0.5);
    let mut b = Builder {
        rng,
        lines: Vec::new(),
        indent: 1,
        scalars: vec!["a".to_string()],
        has_ptr,
    };
    if two_params {
        b.scalars.push("b".to_string());
    }
    let params = if two_params {
        "unsigned char a, char b"
    } else {
        "unsigned char a"
    };
    b.lines.push(format!("int f({params}) {{"));
    let init = b.filler_expr();
    b.stmt(format!("int x = {init};"));
    b.scalars.push("x".to_string());
    if has_ptr {
        let qv = b.rng.random_range(1..50);
        b.stmt(format!("int q = {qv};"));
        let init = b.pick(&["0", "&q"]);
        b.stmt(format!("int *p = {init};"));
    }
    let depth = b.rng.random_range(0..=2);
    if depth == 0 {
        b.leaf();
    } else {
        b.tree(depth - 1);
    }
    b.stmt("return x;".to_string());
    b.lines.push("}".to_string());
    let mut src = b.lines.join("\n");
    src.push('\n');
    Generated { src, func: "f" }
}
