//! Tseitin bit-blasting of bitvector terms into CNF.
//!
//! Vectors are little-endian (`bits[0]` is the LSB). Gate constructors
//! fold constants aggressively, so circuits over constant operands
//! collapse to constants without touching the SAT solver.

use crate::cdcl::{Lit, Solver};

pub type Bv = Vec<Lit>;

pub struct Circuit {
    pub solver: Solver,
    t: Lit,
}

impl Default for Circuit {
    fn default() -> Self {
        Circuit::new()
    }
}

impl Circuit {
    pub fn new() -> Circuit {
        let mut solver = Solver::new();
        let v = solver.new_var();
        let t = Lit::pos(v);
        solver.add_clause(&[t]);
        Circuit { solver, t }
    }

    pub fn tru(&self) -> Lit {
        self.t
    }

    pub fn fls(&self) -> Lit {
        !self.t
    }

    pub fn konst(&self, b: bool) -> Lit {
        if b {
            self.t
        } else {
            !self.t
        }
    }

    fn lit_const(&self, l: Lit) -> Option<bool> {
        if l == self.t {
            Some(true)
        } else if l == !self.t {
            Some(false)
        } else {
            None
        }
    }

    pub fn fresh(&mut self) -> Lit {
        Lit::pos(self.solver.new_var())
    }

    pub fn assert_lit(&mut self, l: Lit) {
        self.solver.add_clause(&[l]);
    }

    pub fn and2(&mut self, a: Lit, b: Lit) -> Lit {
        match (self.lit_const(a), self.lit_const(b)) {
            (Some(false), _) | (_, Some(false)) => return self.fls(),
            (Some(true), _) => return b,
            (_, Some(true)) => return a,
            _ => {}
        }
        if a == b {
            return a;
        }
        if a == !b {
            return self.fls();
        }
        let g = self.fresh();
        self.solver.add_clause(&[!g, a]);
        self.solver.add_clause(&[!g, b]);
        self.solver.add_clause(&[g, !a, !b]);
        g
    }

    pub fn or2(&mut self, a: Lit, b: Lit) -> Lit {
        !self.and2(!a, !b)
    }

    pub fn xor2(&mut self, a: Lit, b: Lit) -> Lit {
        if let Some(av) = self.lit_const(a) {
            return if av { !b } else { b };
        }
        if let Some(bv) = self.lit_const(b) {
            return if bv { !a } else { a };
        }
        if a == b {
            return self.fls();
        }
        if a == !b {
            return self.tru();
        }
        let g = self.fresh();
        self.solver.add_clause(&[!g, a, b]);
        self.solver.add_clause(&[!g, !a, !b]);
        self.solver.add_clause(&[g, !a, b]);
        self.solver.add_clause(&[g, a, !b]);
        g
    }

    pub fn eq2(&mut self, a: Lit, b: Lit) -> Lit {
        !self.xor2(a, b)
    }

    /// `c ? a : b`
    pub fn mux(&mut self, c: Lit, a: Lit, b: Lit) -> Lit {
        if let Some(cv) = self.lit_const(c) {
            return if cv { a } else { b };
        }
        if a == b {
            return a;
        }
        match (self.lit_const(a), self.lit_const(b)) {
            (Some(true), Some(false)) => return c,
            (Some(false), Some(true)) => return !c,
            (Some(true), None) => return self.or2(c, b),
            (Some(false), None) => {
                let nc = !c;
                return self.and2(nc, b);
            }
            (None, Some(true)) => {
                let nc = !c;
                return self.or2(nc, a);
            }
            (None, Some(false)) => return self.and2(c, a),
            _ => {}
        }
        let g = self.fresh();
        self.solver.add_clause(&[!c, !a, g]);
        self.solver.add_clause(&[!c, a, !g]);
        self.solver.add_clause(&[c, !b, g]);
        self.solver.add_clause(&[c, b, !g]);
        g
    }

    pub fn bv_const(&self, width: u32, bits: u64) -> Bv {
        (0..width)
            .map(|i| self.konst(i < 64 && (bits >> i) & 1 == 1))
            .collect()
    }

    pub fn bv_fresh(&mut self, width: u32) -> Bv {
        (0..width).map(|_| self.fresh()).collect()
    }

    /// Read a vector back from the model after a sat answer.
    pub fn bv_model(&self, a: &Bv) -> u64 {
        let mut out = 0u64;
        for (i, &l) in a.iter().enumerate().take(64) {
            let bit = match self.lit_const(l) {
                Some(b) => b,
                None => self.solver.model(l.var()) == l.is_positive(),
            };
            if bit {
                out |= 1 << i;
            }
        }
        out
    }

    pub fn bv_not(&self, a: &Bv) -> Bv {
        a.iter().map(|&l| !l).collect()
    }

    pub fn bv_and(&mut self, a: &Bv, b: &Bv) -> Bv {
        a.iter().zip(b).map(|(&x, &y)| self.and2(x, y)).collect()
    }

    pub fn bv_or(&mut self, a: &Bv, b: &Bv) -> Bv {
        a.iter().zip(b).map(|(&x, &y)| self.or2(x, y)).collect()
    }

    pub fn bv_xor(&mut self, a: &Bv, b: &Bv) -> Bv {
        a.iter().zip(b).map(|(&x, &y)| self.xor2(x, y)).collect()
    }

    fn full_add(&mut self, a: Lit, b: Lit, cin: Lit) -> (Lit, Lit) {
        let axb = self.xor2(a, b);
        let sum = self.xor2(axb, cin);
        let ab = self.and2(a, b);
        let c2 = self.and2(cin, axb);
        let cout = self.or2(ab, c2);
        (sum, cout)
    }

    fn add_with_carry(&mut self, a: &Bv, b: &Bv, mut carry: Lit) -> Bv {
        debug_assert_eq!(a.len(), b.len());
        let mut out = Vec::with_capacity(a.len());
        for (&x, &y) in a.iter().zip(b) {
            let (s, c) = self.full_add(x, y, carry);
            out.push(s);
            carry = c;
        }
        out
    }

    pub fn bv_add(&mut self, a: &Bv, b: &Bv) -> Bv {
        let f = self.fls();
        self.add_with_carry(a, b, f)
    }

    pub fn bv_sub(&mut self, a: &Bv, b: &Bv) -> Bv {
        let nb = self.bv_not(b);
        let t = self.tru();
        self.add_with_carry(a, &nb, t)
    }

    pub fn bv_neg(&mut self, a: &Bv) -> Bv {
        let zero = self.bv_const(a.len() as u32, 0);
        self.bv_sub(&zero, a)
    }

    pub fn bv_mul(&mut self, a: &Bv, b: &Bv) -> Bv {
        debug_assert_eq!(a.len(), b.len());
        let w = a.len();
        let mut acc = self.bv_const(w as u32, 0);
        for i in 0..w {
            let mut row = vec![self.fls(); w];
            for j in 0..w - i {
                row[i + j] = self.and2(a[j], b[i]);
            }
            acc = self.bv_add(&acc, &row);
        }
        acc
    }

    pub fn bv_eq(&mut self, a: &Bv, b: &Bv) -> Lit {
        debug_assert_eq!(a.len(), b.len());
        let mut acc = self.tru();
        for (&x, &y) in a.iter().zip(b) {
            let e = self.eq2(x, y);
            acc = self.and2(acc, e);
        }
        acc
    }

    pub fn bv_ult(&mut self, a: &Bv, b: &Bv) -> Lit {
        debug_assert_eq!(a.len(), b.len());
        let mut lt = self.fls();
        for (&x, &y) in a.iter().zip(b) {
            let e = self.eq2(x, y);
            let here = self.and2(!x, y);
            lt = self.mux(e, lt, here);
        }
        lt
    }

    pub fn bv_slt(&mut self, a: &Bv, b: &Bv) -> Lit {
        // Flip the sign bits and compare unsigned.
        let mut a2 = a.clone();
        let mut b2 = b.clone();
        let last = a2.len() - 1;
        a2[last] = !a2[last];
        b2[last] = !b2[last];
        self.bv_ult(&a2, &b2)
    }

    pub fn bv_mux(&mut self, c: Lit, a: &Bv, b: &Bv) -> Bv {
        a.iter().zip(b).map(|(&x, &y)| self.mux(c, x, y)).collect()
    }

    pub fn bv_zext(&self, a: &Bv, width: u32) -> Bv {
        let mut out = a.clone();
        out.resize(width as usize, self.fls());
        out
    }

    pub fn bv_sext(&self, a: &Bv, width: u32) -> Bv {
        let sign = *a.last().expect("empty vector");
        let mut out = a.clone();
        out.resize(width as usize, sign);
        out
    }

    pub fn bv_extract(&self, a: &Bv, hi: u32, lo: u32) -> Bv {
        a[lo as usize..=hi as usize].to_vec()
    }

    /// Left shift by a symbolic amount; shifts of `width` or more zero out.
    pub fn bv_shl(&mut self, a: &Bv, s: &Bv) -> Bv {
        self.barrel(a, s, false, false)
    }

    pub fn bv_lshr(&mut self, a: &Bv, s: &Bv) -> Bv {
        self.barrel(a, s, true, false)
    }

    pub fn bv_ashr(&mut self, a: &Bv, s: &Bv) -> Bv {
        self.barrel(a, s, true, true)
    }

    fn barrel(&mut self, a: &Bv, s: &Bv, right: bool, arith: bool) -> Bv {
        let w = a.len();
        let fill_far = if arith { *a.last().unwrap() } else { self.fls() };
        let mut cur = a.clone();
        let mut stage = 0usize;
        while (1usize << stage) < w {
            let k = 1usize << stage;
            let mut shifted = vec![fill_far; w];
            if right {
                for j in 0..w - k {
                    shifted[j] = cur[j + k];
                }
            } else {
                for j in k..w {
                    shifted[j] = cur[j - k];
                }
            }
            let sel = if stage < s.len() { s[stage] } else { self.fls() };
            cur = self.bv_mux(sel, &shifted, &cur);
            stage += 1;
        }
        // Any amount bit beyond the covered range shifts everything out.
        let mut big = self.fls();
        for &l in s.iter().skip(stage) {
            big = self.or2(big, l);
        }
        let fill = vec![fill_far; w];
        self.bv_mux(big, &fill, &cur)
    }

    /// Unsigned division and remainder with the SMT-LIB totalization:
    /// division by zero yields all-ones and the remainder is the dividend.
    /// Encoded by widening so the defining identity q*d + r = n cannot wrap.
    pub fn bv_udiv_urem(&mut self, n: &Bv, d: &Bv) -> (Bv, Bv) {
        let w = n.len() as u32;
        let q = self.bv_fresh(w);
        let r = self.bv_fresh(w);
        let zero = self.bv_const(w, 0);
        let dz = self.bv_eq(d, &zero);

        let q2 = self.bv_zext(&q, 2 * w);
        let d2 = self.bv_zext(d, 2 * w);
        let r2 = self.bv_zext(&r, 2 * w);
        let n2 = self.bv_zext(n, 2 * w);
        let prod = self.bv_mul(&q2, &d2);
        let sum = self.bv_add(&prod, &r2);
        let defining = self.bv_eq(&sum, &n2);
        let remainder_small = self.bv_ult(&r, d);
        self.solver.add_clause(&[dz, defining]);
        self.solver.add_clause(&[dz, remainder_small]);

        for i in 0..w as usize {
            self.solver.add_clause(&[!dz, q[i]]);
            let keep = self.eq2(r[i], n[i]);
            self.solver.add_clause(&[!dz, keep]);
        }
        (q, r)
    }

    pub fn bv_sdiv(&mut self, a: &Bv, b: &Bv) -> Bv {
        let sa = *a.last().unwrap();
        let sb = *b.last().unwrap();
        let na = self.bv_neg(a);
        let nb = self.bv_neg(b);
        let abs_a = self.bv_mux(sa, &na, a);
        let abs_b = self.bv_mux(sb, &nb, b);
        let (q, _) = self.bv_udiv_urem(&abs_a, &abs_b);
        let flip = self.xor2(sa, sb);
        let nq = self.bv_neg(&q);
        self.bv_mux(flip, &nq, &q)
    }

    pub fn bv_srem(&mut self, a: &Bv, b: &Bv) -> Bv {
        let sa = *a.last().unwrap();
        let sb = *b.last().unwrap();
        let na = self.bv_neg(a);
        let nb = self.bv_neg(b);
        let abs_a = self.bv_mux(sa, &na, a);
        let abs_b = self.bv_mux(sb, &nb, b);
        let (_, r) = self.bv_udiv_urem(&abs_a, &abs_b);
        let nr = self.bv_neg(&r);
        self.bv_mux(sa, &nr, &r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_circuits_fold_without_solver_work() {
        let mut c = Circuit::new();
        let a = c.bv_const(8, 0x35);
        let b = c.bv_const(8, 0x0b);
        let sum = c.bv_add(&a, &b);
        assert_eq!(c.bv_model(&sum), 0x40);
        let prod = c.bv_mul(&a, &b);
        assert_eq!(c.bv_model(&prod), (0x35u64 * 0x0b) & 0xff);
        // Only the constant-true variable exists; folding did the math.
        assert_eq!(c.solver.num_vars(), 1);
    }

    #[test]
    fn comparison_gates_on_constants() {
        let mut c = Circuit::new();
        let a = c.bv_const(8, 3);
        let b = c.bv_const(8, 250);
        assert_eq!(c.bv_ult(&a, &b), c.tru());
        // Signed: 250 is -6.
        assert_eq!(c.bv_slt(&a, &b), c.fls());
        assert_eq!(c.bv_slt(&b, &a), c.tru());
    }

    #[test]
    fn symbolic_addition_solves_for_the_missing_operand() {
        let mut c = Circuit::new();
        let x = c.bv_fresh(8);
        let k = c.bv_const(8, 200);
        let sum = c.bv_add(&x, &k);
        let want = c.bv_const(8, 10);
        let eq = c.bv_eq(&sum, &want);
        c.assert_lit(eq);
        assert!(c.solver.solve());
        assert_eq!(c.bv_model(&x), (10u64.wrapping_sub(200)) & 0xff);
    }

    #[test]
    fn division_identity_pins_quotient_and_remainder() {
        let mut c = Circuit::new();
        let n = c.bv_const(8, 47);
        let d = c.bv_const(8, 5);
        let (q, r) = c.bv_udiv_urem(&n, &d);
        assert!(c.solver.solve());
        assert_eq!(c.bv_model(&q), 9);
        assert_eq!(c.bv_model(&r), 2);
    }

    #[test]
    fn division_by_zero_is_total() {
        let mut c = Circuit::new();
        let n = c.bv_const(8, 47);
        let d = c.bv_const(8, 0);
        let (q, r) = c.bv_udiv_urem(&n, &d);
        assert!(c.solver.solve());
        assert_eq!(c.bv_model(&q), 0xff);
        assert_eq!(c.bv_model(&r), 47);
    }

    #[test]
    fn variable_shifts_cover_the_overflow_cases() {
        for (amount, expect) in [(0u64, 0xb4u64), (3, 0xa0), (7, 0x00), (8, 0x00), (200, 0x00)] {
            let mut c = Circuit::new();
            let a = c.bv_const(8, 0xb4);
            let s = c.bv_const(8, amount);
            let out = c.bv_shl(&a, &s);
            assert_eq!(c.bv_model(&out), expect, "shl by {amount}");
        }
        let mut c = Circuit::new();
        let a = c.bv_const(8, 0xb4);
        let s = c.bv_const(8, 2);
        let l = c.bv_lshr(&a, &s);
        assert_eq!(c.bv_model(&l), 0x2d);
        let ar = c.bv_ashr(&a, &s);
        assert_eq!(c.bv_model(&ar), 0xed);
    }
}
