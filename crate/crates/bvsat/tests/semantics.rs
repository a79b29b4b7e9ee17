//! Exhaustive 4-bit differential tests against a reference evaluator.
//!
//! The reference implements SMT-LIB bitvector semantics directly on `u64`
//! values, independent of the bit-blasted circuits, so any disagreement
//! points at a real encoding bug.

use bvsat::{check_smt2, Verdict};

const W: u32 = 4;

fn mask(v: u64) -> u64 {
    v & ((1u64 << W) - 1)
}

fn signed(v: u64) -> i64 {
    ((v << (64 - W)) as i64) >> (64 - W)
}

fn reference(op: &str, a: u64, b: u64) -> u64 {
    let all_ones = mask(u64::MAX);
    match op {
        "bvadd" => mask(a.wrapping_add(b)),
        "bvsub" => mask(a.wrapping_sub(b)),
        "bvmul" => mask(a.wrapping_mul(b)),
        "bvand" => a & b,
        "bvor" => a | b,
        "bvxor" => a ^ b,
        "bvudiv" => {
            if b == 0 {
                all_ones
            } else {
                a / b
            }
        }
        "bvurem" => {
            if b == 0 {
                a
            } else {
                a % b
            }
        }
        "bvsdiv" => {
            let (sa, sb) = (signed(a), signed(b));
            if sb == 0 {
                if sa >= 0 {
                    all_ones
                } else {
                    1
                }
            } else {
                let q = sa.unsigned_abs() / sb.unsigned_abs();
                if (sa < 0) != (sb < 0) {
                    mask((q as u64).wrapping_neg())
                } else {
                    mask(q as u64)
                }
            }
        }
        "bvsrem" => {
            let (sa, sb) = (signed(a), signed(b));
            if sb == 0 {
                a
            } else {
                let r = sa.unsigned_abs() % sb.unsigned_abs();
                if sa < 0 {
                    mask((r as u64).wrapping_neg())
                } else {
                    mask(r as u64)
                }
            }
        }
        "bvshl" => {
            if b >= W as u64 {
                0
            } else {
                mask(a << b)
            }
        }
        "bvlshr" => {
            if b >= W as u64 {
                0
            } else {
                a >> b
            }
        }
        "bvashr" => {
            if b >= W as u64 {
                if signed(a) < 0 {
                    all_ones
                } else {
                    0
                }
            } else {
                mask((signed(a) >> b) as u64)
            }
        }
        other => panic!("no reference for {other}"),
    }
}

fn reference_cmp(op: &str, a: u64, b: u64) -> bool {
    match op {
        "bvult" => a < b,
        "bvule" => a <= b,
        "bvugt" => a > b,
        "bvuge" => a >= b,
        "bvslt" => signed(a) < signed(b),
        "bvsle" => signed(a) <= signed(b),
        "bvsgt" => signed(a) > signed(b),
        "bvsge" => signed(a) >= signed(b),
        other => panic!("no reference for {other}"),
    }
}

const BIN_OPS: &[&str] = &[
    "bvadd", "bvsub", "bvmul", "bvand", "bvor", "bvxor", "bvudiv", "bvurem", "bvsdiv",
    "bvsrem", "bvshl", "bvlshr", "bvashr",
];

const CMP_OPS: &[&str] = &[
    "bvult", "bvule", "bvugt", "bvuge", "bvslt", "bvsle", "bvsgt", "bvsge",
];

#[test]
fn constant_operations_match_the_reference_exhaustively() {
    for op in BIN_OPS {
        for a in 0..16u64 {
            for b in 0..16u64 {
                let want = reference(op, a, b);
                let good = format!("(assert (= ({op} #x{a:x} #x{b:x}) #x{want:x})) (check-sat)");
                assert_eq!(
                    check_smt2(&good).unwrap(),
                    Verdict::Sat,
                    "{op} {a} {b} should equal {want}"
                );
                let wrong = mask(want ^ 1);
                let bad = format!("(assert (= ({op} #x{a:x} #x{b:x}) #x{wrong:x})) (check-sat)");
                assert_eq!(
                    check_smt2(&bad).unwrap(),
                    Verdict::Unsat,
                    "{op} {a} {b} should not equal {wrong}"
                );
            }
        }
    }
}

#[test]
fn constant_comparisons_match_the_reference_exhaustively() {
    for op in CMP_OPS {
        for a in 0..16u64 {
            for b in 0..16u64 {
                let want = if reference_cmp(op, a, b) {
                    Verdict::Sat
                } else {
                    Verdict::Unsat
                };
                let s = format!("(assert ({op} #x{a:x} #x{b:x})) (check-sat)");
                assert_eq!(check_smt2(&s).unwrap(), want, "{op} {a} {b}");
            }
        }
    }
}

#[test]
fn symbolic_images_match_the_reference() {
    for op in BIN_OPS {
        for r in 0..16u64 {
            let reachable = (0..16u64).any(|a| (0..16u64).any(|b| reference(op, a, b) == r));
            let want = if reachable { Verdict::Sat } else { Verdict::Unsat };
            let s = format!(
                "(declare-fun x () (_ BitVec 4)) (declare-fun y () (_ BitVec 4)) \
                 (assert (= ({op} x y) #x{r:x})) (check-sat)"
            );
            assert_eq!(check_smt2(&s).unwrap(), want, "{op} image of {r}");
        }
    }
}

#[test]
fn extract_and_extend_match_the_reference() {
    for a in 0..16u64 {
        for hi in 0..W {
            for lo in 0..=hi {
                let width = hi - lo + 1;
                let want = (a >> lo) & ((1u64 << width) - 1);
                let s = format!(
                    "(declare-fun x () (_ BitVec 4)) (assert (= x #x{a:x})) \
                     (assert (= ((_ extract {hi} {lo}) x) #b{want:0w$b})) (check-sat)",
                    w = width as usize
                );
                assert_eq!(check_smt2(&s).unwrap(), Verdict::Sat, "extract {hi}..{lo} of {a}");
            }
        }
        let z = a;
        let sx = mask(signed(a) as u64) | (if signed(a) < 0 { 0xf0 } else { 0 });
        let s = format!(
            "(assert (= ((_ zero_extend 4) #x{a:x}) #x{z:02x})) \
             (assert (= ((_ sign_extend 4) #x{a:x}) #x{sx:02x})) (check-sat)"
        );
        assert_eq!(check_smt2(&s).unwrap(), Verdict::Sat, "extensions of {a}");
    }
}

#[test]
fn unary_operators_match_the_reference() {
    for a in 0..16u64 {
        let not = mask(!a);
        let neg = mask(a.wrapping_neg());
        let s = format!(
            "(assert (= (bvnot #x{a:x}) #x{not:x})) \
             (assert (= (bvneg #x{a:x}) #x{neg:x})) (check-sat)"
        );
        assert_eq!(check_smt2(&s).unwrap(), Verdict::Sat, "unary ops on {a}");
    }
}
