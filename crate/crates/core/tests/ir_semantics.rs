//! Evaluator semantics against a plain integer oracle, exhaustively at
//! small widths.

use lazybv::ir::{eval, BvValue, Kind, Model, Sort, TermTable, Value};
use proptest::prelude::*;

/// Reference semantics written directly over `i128`/`u128`, independent of
/// `BvValue`.
fn oracle(kind: &Kind, w: u32, a: u128, b: u128) -> Value {
    let modulus = 1u128 << w;
    let mask = modulus - 1;
    let signed = |v: u128| -> i128 {
        if v >> (w - 1) & 1 == 1 {
            v as i128 - modulus as i128
        } else {
            v as i128
        }
    };
    let wrap = |v: i128| -> u128 { v.rem_euclid(modulus as i128) as u128 };
    let bv = |v: u128| Value::Bv(BvValue::new(w, v as u64));
    let (sa, sb) = (signed(a), signed(b));
    match kind {
        Kind::BvAnd => bv(a & b),
        Kind::BvOr => bv(a | b),
        Kind::BvXor => bv(a ^ b),
        Kind::BvAdd => bv((a + b) & mask),
        Kind::BvSub => bv(wrap(a as i128 - b as i128)),
        Kind::BvMul => bv((a * b) & mask),
        Kind::BvUdiv => bv(a.checked_div(b).unwrap_or(mask)),
        Kind::BvUrem => bv(if b == 0 { a } else { a % b }),
        // Rust's `/` and `%` on integers truncate toward zero.
        Kind::BvSdiv => bv(if sb == 0 {
            if sa < 0 {
                1
            } else {
                mask
            }
        } else {
            wrap(sa / sb)
        }),
        Kind::BvSrem => bv(if sb == 0 { a } else { wrap(sa % sb) }),
        Kind::BvShl => bv(if b >= w as u128 { 0 } else { (a << b) & mask }),
        Kind::BvLshr => bv(if b >= w as u128 { 0 } else { a >> b }),
        Kind::BvAshr => bv(wrap(sa >> b.min(w as u128 - 1).min(127))),
        Kind::BvUlt => Value::Bool(a < b),
        Kind::BvUle => Value::Bool(a <= b),
        Kind::BvSlt => Value::Bool(sa < sb),
        Kind::BvSle => Value::Bool(sa <= sb),
        Kind::Eq => Value::Bool(a == b),
        _ => unreachable!(),
    }
}

const BINARY: [Kind; 18] = [
    Kind::BvAnd,
    Kind::BvOr,
    Kind::BvXor,
    Kind::BvAdd,
    Kind::BvSub,
    Kind::BvMul,
    Kind::BvUdiv,
    Kind::BvUrem,
    Kind::BvSdiv,
    Kind::BvSrem,
    Kind::BvShl,
    Kind::BvLshr,
    Kind::BvAshr,
    Kind::BvUlt,
    Kind::BvUle,
    Kind::BvSlt,
    Kind::BvSle,
    Kind::Eq,
];

#[test]
fn binary_ops_match_integer_oracle_widths_1_to_6() {
    for w in 1..=6u32 {
        let mut tt = TermTable::new();
        let x = tt.mk_symbol("x", Sort::BitVec(w)).unwrap();
        let y = tt.mk_symbol("y", Sort::BitVec(w)).unwrap();
        let terms: Vec<_> = BINARY
            .iter()
            .map(|k| (k, tt.mk(k.clone(), &[x, y]).unwrap()))
            .collect();
        for a in 0..(1u64 << w) {
            for b in 0..(1u64 << w) {
                let mut m = Model::new();
                m.insert(x, BvValue::new(w, a));
                m.insert(y, BvValue::new(w, b));
                for (k, t) in &terms {
                    let got = eval(&tt, *t, &m).unwrap();
                    assert_eq!(
                        got,
                        oracle(k, w, a as u128, b as u128),
                        "{k:?} w={w} a={a} b={b}"
                    );
                }
            }
        }
    }
}

#[test]
fn unary_ops_match_integer_oracle() {
    for w in 1..=6u32 {
        let mut tt = TermTable::new();
        let x = tt.mk_symbol("x", Sort::BitVec(w)).unwrap();
        let neg = tt.mk(Kind::BvNeg, &[x]).unwrap();
        let not = tt.mk(Kind::BvNot, &[x]).unwrap();
        let sext = tt.mk(Kind::SignExtend(3), &[x]).unwrap();
        let zext = tt.mk(Kind::ZeroExtend(3), &[x]).unwrap();
        let mask = (1u64 << w) - 1;
        for a in 0..=mask {
            let mut m = Model::new();
            m.insert(x, BvValue::new(w, a));
            let get = |t| eval(&tt, t, &m).unwrap();
            assert_eq!(
                get(neg),
                Value::Bv(BvValue::new(w, a.wrapping_neg() & mask))
            );
            assert_eq!(get(not), Value::Bv(BvValue::new(w, !a & mask)));
            let s = if a >> (w - 1) & 1 == 1 {
                a | (0b111 << w)
            } else {
                a
            };
            assert_eq!(get(sext), Value::Bv(BvValue::new(w + 3, s)));
            assert_eq!(get(zext), Value::Bv(BvValue::new(w + 3, a)));
        }
    }
}

#[test]
fn extract_concat_round_trip() {
    for w in 2..=6u32 {
        let mut tt = TermTable::new();
        let x = tt.mk_symbol("x", Sort::BitVec(w)).unwrap();
        for k in 1..w {
            let hi = tt.mk(Kind::Extract { hi: w - 1, lo: k }, &[x]).unwrap();
            let lo = tt.mk(Kind::Extract { hi: k - 1, lo: 0 }, &[x]).unwrap();
            let cat = tt.mk(Kind::Concat, &[hi, lo]).unwrap();
            for a in 0..(1u64 << w) {
                let mut m = Model::new();
                m.insert(x, BvValue::new(w, a));
                assert_eq!(eval(&tt, cat, &m).unwrap(), Value::Bv(BvValue::new(w, a)));
            }
        }
    }
}

proptest! {
    #[test]
    fn independently_built_terms_share_ids(ops in prop::collection::vec(0usize..6, 1..12)) {
        let build = |tt: &mut TermTable| {
            let x = tt.mk_symbol("x", Sort::BitVec(8)).unwrap();
            let y = tt.mk_symbol("y", Sort::BitVec(8)).unwrap();
            let mut acc = x;
            for &o in &ops {
                let kind = [Kind::BvAdd, Kind::BvMul, Kind::BvXor, Kind::BvSub, Kind::BvUdiv, Kind::BvAnd][o].clone();
                acc = tt.mk(kind, &[acc, y]).unwrap();
            }
            acc
        };
        let mut tt = TermTable::new();
        let a = build(&mut tt);
        let b = build(&mut tt);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn wide_arithmetic_matches_modular_bigint(a in any::<u64>(), b in any::<u64>(), extra in 1u32..80) {
        use num_bigint::BigUint;
        let w = 64 + extra;
        let va = BvValue::new(w, a).bvshl(&BvValue::new(w, 7)).bvor(&BvValue::new(w, b));
        let vb = BvValue::new(w, b | 1);
        let m = BigUint::from(1u8) << w as usize;
        let (ia, ib) = (va.to_biguint(), vb.to_biguint());
        prop_assert_eq!(va.bvmul(&vb).to_biguint(), (&ia * &ib) % &m);
        prop_assert_eq!(va.bvadd(&vb).to_biguint(), (&ia + &ib) % &m);
        prop_assert_eq!(va.bvudiv(&vb).to_biguint(), &ia / &ib);
        prop_assert_eq!(va.bvurem(&vb).to_biguint(), &ia % &ib);
    }
}
