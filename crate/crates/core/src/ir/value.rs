//! Fixed-width two's-complement bit-vector values and constant evaluation.
//!
//! Every value the analyzer manipulates is a bit pattern at one of four
//! widths. Arithmetic wraps, shifts saturate past the width, and division
//! signals instead of trapping so callers can decide what a zero divisor
//! means at their level.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ValueError {
    #[error("unsupported bit width {0}")]
    UnsupportedWidth(u32),
    #[error("division by zero")]
    DivisionByZero,
}

/// The only widths MiniC types map onto.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize)]
pub enum Width {
    W1,
    W8,
    W32,
    W64,
}

impl Width {
    pub fn new(bits: u32) -> Result<Width, ValueError> {
        match bits {
            1 => Ok(Width::W1),
            8 => Ok(Width::W8),
            32 => Ok(Width::W32),
            64 => Ok(Width::W64),
            other => Err(ValueError::UnsupportedWidth(other)),
        }
    }

    pub fn bits(self) -> u32 {
        match self {
            Width::W1 => 1,
            Width::W8 => 8,
            Width::W32 => 32,
            Width::W64 => 64,
        }
    }

    /// All-ones pattern at this width.
    pub fn mask(self) -> u64 {
        match self {
            Width::W64 => u64::MAX,
            w => (1u64 << w.bits()) - 1,
        }
    }

    pub fn sign_bit(self) -> u64 {
        1u64 << (self.bits() - 1)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Signedness {
    Signed,
    Unsigned,
}

impl Signedness {
    pub fn is_signed(self) -> bool {
        matches!(self, Signedness::Signed)
    }
}

/// A concrete bit pattern. The representation invariant is
/// `bits <= width.mask()`; constructors enforce it by masking.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitVecValue {
    width: Width,
    bits: u64,
}

impl BitVecValue {
    pub fn new(width: Width, bits: u64) -> Self {
        BitVecValue { width, bits: bits & width.mask() }
    }

    pub fn zero(width: Width) -> Self {
        BitVecValue { width, bits: 0 }
    }

    pub fn one(width: Width) -> Self {
        BitVecValue::new(width, 1)
    }

    pub fn max(width: Width) -> Self {
        BitVecValue { width, bits: width.mask() }
    }

    /// Truth value at width 1.
    pub fn bool(b: bool) -> Self {
        BitVecValue { width: Width::W1, bits: b as u64 }
    }

    pub fn width(self) -> Width {
        self.width
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn is_zero(self) -> bool {
        self.bits == 0
    }

    /// The pattern reinterpreted as a signed quantity.
    pub fn as_i64(self) -> i64 {
        if self.bits & self.width.sign_bit() != 0 {
            (self.bits | !self.width.mask()) as i64
        } else {
            self.bits as i64
        }
    }

    /// Zero- or sign-extend / truncate to `target`.
    pub fn cast(self, target: Width, sign_extend: bool) -> Self {
        if target.bits() <= self.width.bits() {
            BitVecValue::new(target, self.bits)
        } else if sign_extend {
            BitVecValue::new(target, self.as_i64() as u64)
        } else {
            BitVecValue::new(target, self.bits)
        }
    }
}

impl fmt::Debug for BitVecValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.bits, self.width.bits())
    }
}

impl fmt::Display for BitVecValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.bits, self.width.bits())
    }
}

/// Binary operators over equal-width operands. Comparisons produce a
/// width-1 result; everything else stays at the operand width.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum BinOpKind {
    Add,
    Sub,
    Mul,
    UDiv,
    SDiv,
    URem,
    SRem,
    And,
    Or,
    Xor,
    Shl,
    LShr,
    AShr,
    Ult,
    Ule,
    Ugt,
    Uge,
    Slt,
    Sle,
    Sgt,
    Sge,
    Eq,
    Ne,
}

impl BinOpKind {
    pub fn is_comparison(self) -> bool {
        use BinOpKind::*;
        matches!(self, Ult | Ule | Ugt | Uge | Slt | Sle | Sgt | Sge | Eq | Ne)
    }

    pub fn is_division(self) -> bool {
        use BinOpKind::*;
        matches!(self, UDiv | SDiv | URem | SRem)
    }

    pub fn name(self) -> &'static str {
        use BinOpKind::*;
        match self {
            Add => "add",
            Sub => "sub",
            Mul => "mul",
            UDiv => "udiv",
            SDiv => "sdiv",
            URem => "urem",
            SRem => "srem",
            And => "and",
            Or => "or",
            Xor => "xor",
            Shl => "shl",
            LShr => "lshr",
            AShr => "ashr",
            Ult => "ult",
            Ule => "ule",
            Ugt => "ugt",
            Uge => "uge",
            Slt => "slt",
            Sle => "sle",
            Sgt => "sgt",
            Sge => "sge",
            Eq => "eq",
            Ne => "ne",
        }
    }

    /// The negated comparison, e.g. `ult` becomes `uge`.
    pub fn negate_comparison(self) -> BinOpKind {
        use BinOpKind::*;
        match self {
            Ult => Uge,
            Ule => Ugt,
            Ugt => Ule,
            Uge => Ult,
            Slt => Sge,
            Sle => Sgt,
            Sgt => Sle,
            Sge => Slt,
            Eq => Ne,
            Ne => Eq,
            other => panic!("negate_comparison on {other:?}"),
        }
    }

    /// The comparison with operands swapped, e.g. `5 < x` as `x > 5`.
    pub fn mirror_comparison(self) -> BinOpKind {
        use BinOpKind::*;
        match self {
            Ult => Ugt,
            Ule => Uge,
            Ugt => Ult,
            Uge => Ule,
            Slt => Sgt,
            Sle => Sge,
            Sgt => Slt,
            Sge => Sle,
            Eq => Eq,
            Ne => Ne,
            other => panic!("mirror_comparison on {other:?}"),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum UnOpKind {
    Neg,
    BitNot,
    /// `!e`, i.e. `e == 0`, producing a width-1 value.
    LogNot,
}

impl UnOpKind {
    pub fn name(self) -> &'static str {
        match self {
            UnOpKind::Neg => "neg",
            UnOpKind::BitNot => "bitnot",
            UnOpKind::LogNot => "lognot",
        }
    }
}

/// Evaluate `op` over two constants of equal width.
///
/// Program semantics: `udiv`/`urem`/`sdiv`/`srem` with a zero divisor
/// signal `DivisionByZero` rather than producing a value.
pub fn eval_const(op: BinOpKind, lhs: BitVecValue, rhs: BitVecValue) -> Result<BitVecValue, ValueError> {
    assert_eq!(lhs.width(), rhs.width(), "eval_const on mismatched widths");
    if op.is_division() && rhs.is_zero() {
        return Err(ValueError::DivisionByZero);
    }
    Ok(eval_binop_total(op, lhs, rhs))
}

/// Evaluate with total division semantics (the SMT-LIB convention):
/// `udiv x 0` is all-ones, `urem x 0` is `x`, and the signed forms follow
/// from their expansion over the unsigned ones. Used by solver backends,
/// which must assign meaning to every assignment they enumerate.
pub fn eval_smt_total(op: BinOpKind, lhs: BitVecValue, rhs: BitVecValue) -> BitVecValue {
    assert_eq!(lhs.width(), rhs.width(), "eval_smt_total on mismatched widths");
    if op.is_division() && rhs.is_zero() {
        let w = lhs.width();
        return match op {
            BinOpKind::UDiv => BitVecValue::max(w),
            BinOpKind::URem => lhs,
            // bvsdiv s 0 expands to bvudiv/bvneg over |s|: 1 if s < 0, else all-ones.
            BinOpKind::SDiv => {
                if lhs.as_i64() < 0 {
                    BitVecValue::one(w)
                } else {
                    BitVecValue::max(w)
                }
            }
            BinOpKind::SRem => lhs,
            _ => unreachable!(),
        };
    }
    eval_binop_total(op, lhs, rhs)
}

fn eval_binop_total(op: BinOpKind, lhs: BitVecValue, rhs: BitVecValue) -> BitVecValue {
    use BinOpKind::*;
    let w = lhs.width();
    let (a, b) = (lhs.bits(), rhs.bits());
    let (sa, sb) = (lhs.as_i64(), rhs.as_i64());
    match op {
        Add => BitVecValue::new(w, a.wrapping_add(b)),
        Sub => BitVecValue::new(w, a.wrapping_sub(b)),
        Mul => BitVecValue::new(w, a.wrapping_mul(b)),
        UDiv => BitVecValue::new(w, a / b),
        URem => BitVecValue::new(w, a % b),
        // i128 intermediate dodges the INT_MIN / -1 overflow; the masked
        // result is the wrapped two's-complement quotient.
        SDiv => BitVecValue::new(w, ((sa as i128) / (sb as i128)) as u64),
        SRem => BitVecValue::new(w, ((sa as i128) % (sb as i128)) as u64),
        And => BitVecValue::new(w, a & b),
        Or => BitVecValue::new(w, a | b),
        Xor => BitVecValue::new(w, a ^ b),
        Shl => {
            if b >= w.bits() as u64 {
                BitVecValue::zero(w)
            } else {
                BitVecValue::new(w, a << b)
            }
        }
        LShr => {
            if b >= w.bits() as u64 {
                BitVecValue::zero(w)
            } else {
                BitVecValue::new(w, a >> b)
            }
        }
        AShr => {
            if b >= w.bits() as u64 {
                if a & w.sign_bit() != 0 {
                    BitVecValue::max(w)
                } else {
                    BitVecValue::zero(w)
                }
            } else {
                BitVecValue::new(w, (sa >> b) as u64)
            }
        }
        Ult => BitVecValue::bool(a < b),
        Ule => BitVecValue::bool(a <= b),
        Ugt => BitVecValue::bool(a > b),
        Uge => BitVecValue::bool(a >= b),
        Slt => BitVecValue::bool(sa < sb),
        Sle => BitVecValue::bool(sa <= sb),
        Sgt => BitVecValue::bool(sa > sb),
        Sge => BitVecValue::bool(sa >= sb),
        Eq => BitVecValue::bool(a == b),
        Ne => BitVecValue::bool(a != b),
    }
}

/// Evaluate a unary operator.
pub fn eval_unop(op: UnOpKind, v: BitVecValue) -> BitVecValue {
    match op {
        UnOpKind::Neg => BitVecValue::new(v.width(), (v.bits()).wrapping_neg()),
        UnOpKind::BitNot => BitVecValue::new(v.width(), !v.bits()),
        UnOpKind::LogNot => BitVecValue::bool(v.is_zero()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v32(n: u64) -> BitVecValue {
        BitVecValue::new(Width::W32, n)
    }

    fn v8(n: u64) -> BitVecValue {
        BitVecValue::new(Width::W8, n)
    }

    #[test]
    fn width_table() {
        assert_eq!(Width::new(1).unwrap(), Width::W1);
        assert_eq!(Width::new(8).unwrap(), Width::W8);
        assert_eq!(Width::new(32).unwrap(), Width::W32);
        assert_eq!(Width::new(64).unwrap(), Width::W64);
        assert_eq!(Width::new(16), Err(ValueError::UnsupportedWidth(16)));
        assert_eq!(Width::new(0), Err(ValueError::UnsupportedWidth(0)));
    }

    #[test]
    fn masking_on_construction() {
        assert_eq!(BitVecValue::new(Width::W8, 0x1ff).bits(), 0xff);
        assert_eq!(BitVecValue::new(Width::W1, 2).bits(), 0);
        assert_eq!(BitVecValue::new(Width::W64, u64::MAX).bits(), u64::MAX);
    }

    #[test]
    fn bitwise_ops() {
        assert_eq!(eval_const(BinOpKind::And, v32(5), v32(1)).unwrap(), v32(1));
        assert_eq!(eval_const(BinOpKind::Xor, v32(1), v32(1)).unwrap(), v32(0));
        assert_eq!(eval_const(BinOpKind::Or, v32(4), v32(1)).unwrap(), v32(5));
    }

    #[test]
    fn add_wraps() {
        assert_eq!(eval_const(BinOpKind::Add, v8(255), v8(1)).unwrap(), v8(0));
        assert_eq!(eval_const(BinOpKind::Sub, v8(0), v8(1)).unwrap(), v8(255));
        assert_eq!(eval_const(BinOpKind::Mul, v8(16), v8(16)).unwrap(), v8(0));
    }

    #[test]
    fn division_signals_on_zero() {
        assert_eq!(eval_const(BinOpKind::UDiv, v8(3), v8(0)), Err(ValueError::DivisionByZero));
        assert_eq!(eval_const(BinOpKind::SRem, v8(3), v8(0)), Err(ValueError::DivisionByZero));
        assert_eq!(eval_const(BinOpKind::UDiv, v8(7), v8(2)).unwrap(), v8(3));
    }

    #[test]
    fn signed_division_edge() {
        // INT_MIN / -1 wraps back to INT_MIN; remainder is zero.
        let int_min = v8(0x80);
        let neg_one = v8(0xff);
        assert_eq!(eval_const(BinOpKind::SDiv, int_min, neg_one).unwrap(), int_min);
        assert_eq!(eval_const(BinOpKind::SRem, int_min, neg_one).unwrap(), v8(0));
        // -7 / 2 truncates toward zero.
        assert_eq!(eval_const(BinOpKind::SDiv, v8(0xf9), v8(2)).unwrap(), v8(0xfd));
        assert_eq!(eval_const(BinOpKind::SRem, v8(0xf9), v8(2)).unwrap(), v8(0xff));
    }

    #[test]
    fn smt_total_division() {
        assert_eq!(eval_smt_total(BinOpKind::UDiv, v8(9), v8(0)), v8(0xff));
        assert_eq!(eval_smt_total(BinOpKind::URem, v8(9), v8(0)), v8(9));
        assert_eq!(eval_smt_total(BinOpKind::SDiv, v8(0xf9), v8(0)), v8(1));
        assert_eq!(eval_smt_total(BinOpKind::SDiv, v8(9), v8(0)), v8(0xff));
        assert_eq!(eval_smt_total(BinOpKind::SRem, v8(0xf9), v8(0)), v8(0xf9));
    }

    #[test]
    fn shift_past_width() {
        assert_eq!(eval_const(BinOpKind::Shl, v8(1), v8(8)).unwrap(), v8(0));
        assert_eq!(eval_const(BinOpKind::LShr, v8(0x80), v8(9)).unwrap(), v8(0));
        assert_eq!(eval_const(BinOpKind::AShr, v8(0x80), v8(200)).unwrap(), v8(0xff));
        assert_eq!(eval_const(BinOpKind::AShr, v8(0x40), v8(200)).unwrap(), v8(0));
        assert_eq!(eval_const(BinOpKind::AShr, v8(0x80), v8(1)).unwrap(), v8(0xc0));
    }

    #[test]
    fn comparisons_are_width_one() {
        let r = eval_const(BinOpKind::Ult, v32(3), v32(4)).unwrap();
        assert_eq!(r, BitVecValue::bool(true));
        assert_eq!(r.width(), Width::W1);
        assert_eq!(eval_const(BinOpKind::Slt, v8(0xff), v8(1)).unwrap(), BitVecValue::bool(true));
        assert_eq!(eval_const(BinOpKind::Ult, v8(0xff), v8(1)).unwrap(), BitVecValue::bool(false));
    }

    #[test]
    fn casts() {
        assert_eq!(v8(0xff).cast(Width::W32, false).bits(), 0xff);
        assert_eq!(v8(0xff).cast(Width::W32, true).bits(), 0xffff_ffff);
        assert_eq!(v32(0x1_0203).cast(Width::W8, false).bits(), 0x03);
        assert_eq!(BitVecValue::bool(true).cast(Width::W32, false).bits(), 1);
    }

    #[test]
    fn unops() {
        assert_eq!(eval_unop(UnOpKind::Neg, v8(1)), v8(0xff));
        assert_eq!(eval_unop(UnOpKind::BitNot, v8(0x0f)), v8(0xf0));
        assert_eq!(eval_unop(UnOpKind::LogNot, v8(0)), BitVecValue::bool(true));
        assert_eq!(eval_unop(UnOpKind::LogNot, v8(3)), BitVecValue::bool(false));
    }

    /// Independent reference: evaluate through i128 arithmetic and reduce
    /// modulo 2^w. Exhaustive at width 1, sampled at width 8.
    fn reference(op: BinOpKind, w: Width, a: u64, b: u64) -> Option<u64> {
        use BinOpKind::*;
        let m = w.mask() as i128;
        let ua = a as i128;
        let ub = b as i128;
        let sign = 1i128 << (w.bits() - 1);
        let sa = if ua & sign != 0 { ua - (m + 1) } else { ua };
        let sb = if ub & sign != 0 { ub - (m + 1) } else { ub };
        let wide = match op {
            Add => ua + ub,
            Sub => ua - ub,
            Mul => ua * ub,
            UDiv => {
                if ub == 0 {
                    return None;
                }
                ua / ub
            }
            URem => {
                if ub == 0 {
                    return None;
                }
                ua % ub
            }
            SDiv => {
                if ub == 0 {
                    return None;
                }
                sa / sb
            }
            SRem => {
                if ub == 0 {
                    return None;
                }
                sa % sb
            }
            And => ua & ub,
            Or => ua | ub,
            Xor => ua ^ ub,
            Shl => {
                if ub >= w.bits() as i128 {
                    0
                } else {
                    ua << ub
                }
            }
            LShr => {
                if ub >= w.bits() as i128 {
                    0
                } else {
                    ua >> ub
                }
            }
            AShr => {
                if ub >= w.bits() as i128 {
                    if sa < 0 {
                        -1
                    } else {
                        0
                    }
                } else {
                    sa >> ub
                }
            }
            Ult => (ua < ub) as i128,
            Ule => (ua <= ub) as i128,
            Ugt => (ua > ub) as i128,
            Uge => (ua >= ub) as i128,
            Slt => (sa < sb) as i128,
            Sle => (sa <= sb) as i128,
            Sgt => (sa > sb) as i128,
            Sge => (sa >= sb) as i128,
            Eq => (ua == ub) as i128,
            Ne => (ua != ub) as i128,
        };
        let outw = if op.is_comparison() { Width::W1 } else { w };
        Some((wide.rem_euclid(outw.mask() as i128 + 1)) as u64)
    }

    const ALL_OPS: &[BinOpKind] = &[
        BinOpKind::Add,
        BinOpKind::Sub,
        BinOpKind::Mul,
        BinOpKind::UDiv,
        BinOpKind::SDiv,
        BinOpKind::URem,
        BinOpKind::SRem,
        BinOpKind::And,
        BinOpKind::Or,
        BinOpKind::Xor,
        BinOpKind::Shl,
        BinOpKind::LShr,
        BinOpKind::AShr,
        BinOpKind::Ult,
        BinOpKind::Ule,
        BinOpKind::Ugt,
        BinOpKind::Uge,
        BinOpKind::Slt,
        BinOpKind::Sle,
        BinOpKind::Sgt,
        BinOpKind::Sge,
        BinOpKind::Eq,
        BinOpKind::Ne,
    ];

    #[test]
    fn matches_reference_exhaustively_at_width_one() {
        for &op in ALL_OPS {
            for a in 0..2u64 {
                for b in 0..2u64 {
                    let got = eval_const(op, BitVecValue::new(Width::W1, a), BitVecValue::new(Width::W1, b));
                    match reference(op, Width::W1, a, b) {
                        Some(want) => assert_eq!(got.unwrap().bits(), want, "{op:?} {a} {b}"),
                        None => assert!(got.is_err(), "{op:?} {a} {b}"),
                    }
                }
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn matches_reference_at_width_eight(a: u8, b: u8, idx in 0usize..23) {
            let op = ALL_OPS[idx];
            let got = eval_const(op, v8(a as u64), v8(b as u64));
            match reference(op, Width::W8, a as u64, b as u64) {
                Some(want) => proptest::prop_assert_eq!(got.unwrap().bits(), want),
                None => proptest::prop_assert!(got.is_err()),
            }
        }
    }
}
