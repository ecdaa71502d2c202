//! QF_BV subset of SMT-LIB 2: reading scripts into the term table and
//! printing terms back.
//!
//! Literals print in a canonical form: `#x…` when the width is a multiple
//! of four, `#b…` otherwise.

mod parser;
mod printer;
pub mod sexpr;

use num_bigint::BigUint;
use num_traits::Num;

pub use parser::{parse_script, parse_term, Session};
pub use printer::{print_script, print_term, quote_symbol};

use crate::ir::{BvValue, TermId, Value};
use sexpr::{Atom, SExpr};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SmtError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("unsupported feature: {0}")]
    Unsupported(String),
    #[error("sort mismatch: {0}")]
    SortMismatch(String),
    #[error("undeclared symbol `{0}`")]
    Undeclared(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    SetLogic(String),
    SetInfo(String, String),
    SetOption(String, String),
    Declare(TermId),
    Assert(TermId),
    CheckSat,
    GetModel,
    GetValue(Vec<TermId>),
    Exit,
}

/// A parsed script. Term ids refer to the table it was parsed into;
/// zero-arity definitions are already inlined.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Script {
    pub logic: Option<String>,
    pub declarations: Vec<TermId>,
    pub assertions: Vec<TermId>,
    pub commands: Vec<Command>,
}

impl Script {
    /// The `:status` recorded with `set-info`, if any.
    pub fn status(&self) -> Option<&str> {
        self.commands.iter().find_map(|c| match c {
            Command::SetInfo(k, v) if k == "status" => Some(v.as_str()),
            _ => None,
        })
    }
}

/// Reads a value literal (`true`, `false`, `#b…`, `#x…`, `(_ bvN w)`).
pub fn literal_value(e: &SExpr) -> Option<Value> {
    match e {
        SExpr::Atom(Atom::Symbol(s), _) if s == "true" => Some(Value::Bool(true)),
        SExpr::Atom(Atom::Symbol(s), _) if s == "false" => Some(Value::Bool(false)),
        SExpr::Atom(Atom::Binary(d), _) => {
            let v = BigUint::from_str_radix(d, 2).ok()?;
            Some(Value::Bv(BvValue::from_biguint(d.len() as u32, &v)))
        }
        SExpr::Atom(Atom::Hex(d), _) => {
            let v = BigUint::from_str_radix(d, 16).ok()?;
            Some(Value::Bv(BvValue::from_biguint(4 * d.len() as u32, &v)))
        }
        SExpr::List(items, _) => match items.as_slice() {
            [u, SExpr::Atom(Atom::Symbol(bv), _), w] if u.as_symbol() == Some("_") => {
                let v: BigUint = bv.strip_prefix("bv")?.parse().ok()?;
                let w: u32 = w.as_numeral()?.parse().ok()?;
                (w > 0).then(|| Value::Bv(BvValue::from_biguint(w, &v)))
            }
            _ => None,
        },
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{eval_bool, Kind, Model, Sort, TermTable};

    #[test]
    fn parses_small_script() {
        let mut tt = TermTable::new();
        let s = parse_script(
            &mut tt,
            "(declare-const x (_ BitVec 4))(assert (= (bvmul x x) #x9))(check-sat)",
        )
        .unwrap();
        assert_eq!(s.assertions.len(), 1);
        assert_eq!(s.declarations.len(), 1);
        assert_eq!(s.commands.last(), Some(&Command::CheckSat));
    }

    #[test]
    fn rejects_non_bool_assertion() {
        let mut tt = TermTable::new();
        let err = parse_script(
            &mut tt,
            "(declare-const x (_ BitVec 4))(declare-const y (_ BitVec 4))(assert (bvadd x y))",
        )
        .unwrap_err();
        assert!(matches!(err, SmtError::SortMismatch(_)));
    }

    #[test]
    fn extract_literal_evaluates_true() {
        let mut tt = TermTable::new();
        let s = parse_script(&mut tt, "(assert (= ((_ extract 3 0) #x5A) #xA))").unwrap();
        assert!(eval_bool(&tt, s.assertions[0], &Model::new()).unwrap());
        // `#x0A` has eight bits, so comparing it with a 4-bit slice is ill-sorted
        let e = parse_script(&mut tt, "(assert (= ((_ extract 3 0) #x5A) #x0A))").unwrap_err();
        assert!(matches!(e, SmtError::SortMismatch(_)));
    }

    #[test]
    fn error_kinds() {
        let mut tt = TermTable::new();
        let e = parse_script(&mut tt, "(assert (= y #x1))").unwrap_err();
        assert_eq!(e, SmtError::Undeclared("y".into()));
        let e = parse_script(&mut tt, "(push 1)").unwrap_err();
        assert!(matches!(e, SmtError::Unsupported(_)));
        let e = parse_script(&mut tt, "(declare-fun f ((_ BitVec 4)) (_ BitVec 4))").unwrap_err();
        assert!(matches!(e, SmtError::Unsupported(_)));
        let e = parse_script(
            &mut tt,
            "(declare-const a (Array (_ BitVec 4) (_ BitVec 4)))",
        )
        .unwrap_err();
        assert!(matches!(e, SmtError::Unsupported(_)));
        let e = parse_script(&mut tt, "(assert (forall ((q Bool)) q))").unwrap_err();
        assert!(matches!(e, SmtError::Unsupported(_)));
        let e = parse_script(&mut tt, "(define-fun f ((a Bool)) Bool a)").unwrap_err();
        assert!(matches!(e, SmtError::Unsupported(_)));
        let e = parse_script(
            &mut tt,
            "(declare-const x (_ BitVec 4))\n(assert (= ((_ extract 5 0) x) x))",
        )
        .unwrap_err();
        assert!(matches!(e, SmtError::Syntax { line: 2, .. }));
        let e = parse_script(&mut tt, "(assert (= #b1 true))").unwrap_err();
        assert!(matches!(e, SmtError::SortMismatch(_)));
    }

    #[test]
    fn let_and_define_are_inlined() {
        let mut tt = TermTable::new();
        let s = parse_script(
            &mut tt,
            "(declare-fun x () (_ BitVec 8))
             (define-fun c () (_ BitVec 8) (_ bv3 8))
             (assert (let ((a (bvmul x c)) (x #x01)) (= a (bvadd a x))))",
        )
        .unwrap();
        let x = tt.lookup_symbol("x").unwrap();
        let c = tt.bv_u64(8, 3);
        let one = tt.bv_u64(8, 1);
        let a = tt.bin(Kind::BvMul, x, c);
        let sum = tt.bin(Kind::BvAdd, a, one);
        let expect = tt.eq(a, sum);
        assert_eq!(s.assertions, vec![expect]);
    }

    #[test]
    fn sugar_matches_reference_semantics() {
        let mut tt = TermTable::new();
        let s = parse_script(
            &mut tt,
            "(declare-const x (_ BitVec 4)) (declare-const y (_ BitVec 4))
             (assert (= (bvsmod x y) #x0))
             (assert (= ((_ rotate_left 1) x) #x0))
             (assert (= ((_ rotate_right 1) x) #x0))
             (assert (= ((_ repeat 2) x) #x00))
             (assert (bvuge x y))
             (assert (= (bvnand x y) #x0))",
        )
        .unwrap();
        let (x, y) = (
            tt.lookup_symbol("x").unwrap(),
            tt.lookup_symbol("y").unwrap(),
        );
        for a in 0..16u64 {
            for b in 0..16u64 {
                let mut m = Model::new();
                let (va, vb) = (BvValue::new(4, a), BvValue::new(4, b));
                m.insert(x, va.clone());
                m.insert(y, vb.clone());
                let ev = |i: usize| eval_bool(&tt, s.assertions[i], &m).unwrap();
                assert_eq!(ev(0), va.bvsmod(&vb).is_zero());
                assert_eq!(ev(1), ((a << 1) | (a >> 3)) & 15 == 0);
                assert_eq!(ev(2), ((a >> 1) | (a << 3)) & 15 == 0);
                assert_eq!(ev(3), a == 0);
                assert_eq!(ev(4), a >= b);
                assert_eq!(ev(5), !(a & b) & 15 == 0);
            }
        }
    }

    #[test]
    fn canonical_printing() {
        let mut tt = TermTable::new();
        let x = tt.mk_symbol("x", Sort::BitVec(4)).unwrap();
        let y = tt.mk_symbol("y", Sort::BitVec(4)).unwrap();
        let m = tt.bin(Kind::BvMul, x, y);
        assert_eq!(print_term(&tt, m), "(bvmul x y)");
        let c = tt.bv_u64(4, 10);
        assert_eq!(print_term(&tt, c), "#xa");
        let e = tt.extract(2, 1, x);
        assert_eq!(print_term(&tt, e), "((_ extract 2 1) x)");
        let q = tt.mk_symbol("a b", Sort::BitVec(4)).unwrap();
        assert_eq!(print_term(&tt, q), "|a b|");
    }

    #[test]
    fn shared_subterms_use_let_and_reparse() {
        let mut tt = TermTable::new();
        let x = tt.mk_symbol("x", Sort::BitVec(4)).unwrap();
        let y = tt.mk_symbol("y", Sort::BitVec(4)).unwrap();
        let m = tt.bin(Kind::BvMul, x, y);
        let n = tt.bin(Kind::BvAdd, m, m);
        let k = tt.bin(Kind::BvSub, n, n);
        let root = tt.eq(k, m);
        let text = print_term(&tt, root);
        assert!(text.starts_with("(let"), "{text}");
        assert_eq!(parse_term(&mut tt, &text, &[x, y]).unwrap(), root);
    }

    #[test]
    fn literal_values() {
        let vals = sexpr::read_all("#b101 #x0f (_ bv7 5) true").unwrap();
        let got: Vec<_> = vals.iter().map(|v| literal_value(v).unwrap()).collect();
        assert_eq!(got[0], Value::Bv(BvValue::new(3, 5)));
        assert_eq!(got[1], Value::Bv(BvValue::new(8, 15)));
        assert_eq!(got[2], Value::Bv(BvValue::new(5, 7)));
        assert_eq!(got[3], Value::Bool(true));
    }
}
