//! Inputs shared by the benchmarks.

use lazybv::abstraction::SchemeConfig;
use lazybv::backend::{BackendHandle, BackendKind};
use lazybv::ir::TermTable;
use lazybv::refine::{solve, Limits, SolveResult};
use lazybv::smtlib::parse_script;

fn decls(w: u32) -> String {
    format!("(declare-const x (_ BitVec {w})) (declare-const y (_ BitVec {w})) (declare-const z (_ BitVec {w}))")
}

/// `x*y != y*x`, unsat.
pub fn commute(w: u32) -> String {
    format!("{} (assert (distinct (bvmul x y) (bvmul y x)))", decls(w))
}

/// `x*x = 2`, unsat.
pub fn square_two(w: u32) -> String {
    format!("{} (assert (= (bvmul x x) (_ bv2 {w})))", decls(w))
}

/// `x*(y+z) != x*y + x*z`, unsat.
pub fn distrib(w: u32) -> String {
    format!(
        "{} (assert (distinct (bvmul x (bvadd y z)) (bvadd (bvmul x y) (bvmul x z))))",
        decls(w)
    )
}

/// Quotient and remainder reassemble the dividend, unsat.
pub fn divrem(w: u32) -> String {
    format!(
        "{} (assert (distinct y (_ bv0 {w}))) (assert (distinct x (bvadd (bvmul y (bvudiv x y)) (bvurem x y))))",
        decls(w)
    )
}

/// Factoring a constant, sat.
pub fn factor(w: u32) -> String {
    format!(
        "{} (assert (= (bvmul x y) (_ bv143 {w}))) (assert (bvult (_ bv1 {w}) x)) (assert (bvult (_ bv1 {w}) y)) \
         (assert (bvult x (_ bv16 {w}))) (assert (bvult y (_ bv16 {w})))",
        decls(w)
    )
}

pub fn run(text: &str, config: &SchemeConfig) -> SolveResult {
    let mut tt = TermTable::new();
    let script = parse_script(&mut tt, text).expect("benchmark input parses");
    let mut backend = BackendHandle::new(&BackendKind::Builtin).expect("builtin backend");
    solve(&mut tt, &script, config, &mut backend, Limits::default())
}
