#![allow(dead_code)]

use lazybv::abstraction::{
    abstract_formula, all_steps, next_refinement, OpKind, Refinement, Registry, SchemeConfig, Stage,
};
use std::collections::HashMap;

use lazybv::backend::{Backend, CheckResult, OracleBackend};
use lazybv::ir::{eval_bool, substitute, BvValue, Model, Sort, TermId, TermTable};

pub struct Setup {
    pub tt: TermTable,
    pub x: TermId,
    pub y: TermId,
    pub reg: Registry,
}

pub fn setup(op: OpKind, w: u32, config: &SchemeConfig) -> Setup {
    let mut tt = TermTable::new();
    let x = tt.mk_symbol("x", Sort::BitVec(w)).unwrap();
    let y = tt.mk_symbol("y", Sort::BitVec(w)).unwrap();
    let z = tt.mk_symbol("z", Sort::BitVec(w)).unwrap();
    let app = tt.bin(op.kind(), x, y);
    let a = tt.eq(app, z);
    let (_, reg) = abstract_formula(&mut tt, &[a], config);
    assert_eq!(reg.len(), 1);
    Setup { tt, x, y, reg }
}

pub fn model_xy(s: &Setup, a: u64, b: u64, w: u32) -> Model {
    let mut m = Model::new();
    m.insert(s.x, BvValue::new(w, a));
    m.insert(s.y, BvValue::new(w, b));
    m
}

/// Every step of the root instance, the per-interval stage driven through
/// all of its indices, then whatever the spawned instances can emit.
pub fn emit_everything(s: &mut Setup, w: u32, config: &SchemeConfig) -> Vec<(Stage, Vec<TermId>)> {
    let mut out = Vec::new();
    let mut k = 0u32;
    loop {
        let m = model_xy(s, 1 << (k % w), 0, w);
        let cursor = s.reg.get(0).cursor;
        let stages = config.steps(s.reg.get(0).op)
            [cursor.min(config.steps(s.reg.get(0).op).len() - 1)]
        .clone();
        match next_refinement(&mut s.tt, &mut s.reg, 0, &m, config).unwrap() {
            Refinement::Exhausted => break,
            Refinement::Step(o) => out.push((stages[0], o.constraints)),
        }
        k += 1;
    }
    let mut id = 1;
    while id < s.reg.len() {
        let base = s
            .reg
            .exact_completion(&s.tt, &model_xy(s, 3, 2, w))
            .unwrap();
        let o = all_steps(&mut s.tt, &mut s.reg, id, &base, config).unwrap();
        out.push((Stage::Relations, o.constraints));
        id += 1;
    }
    out
}

pub fn check_completeness(op: OpKind, w: u32, config: &SchemeConfig) {
    let mut s = setup(op, w, config);
    let emitted = emit_everything(&mut s, w, config);
    assert!(s.reg.get(0).exhausted);
    for a in 0..1u64 << w {
        for b in 0..1u64 << w {
            let m = s
                .reg
                .exact_completion(&s.tt, &model_xy(&s, a, b, w))
                .unwrap();
            for (stage, cs) in &emitted {
                for &c in cs {
                    assert!(
                        eval_bool(&s.tt, c, &m).unwrap(),
                        "{op:?} stage {stage} excludes exact values at w={w}, x={a}, y={b}: {}",
                        lazybv::smtlib::print_term(&s.tt, c)
                    );
                }
            }
        }
    }
}

/// With every stage emitted, `ap != op(x, y)` is unsat for each constant
/// operand pair.
pub fn check_soundness(op: OpKind, w: u32, config: &SchemeConfig) {
    let mut s = setup(op, w, config);
    let emitted = emit_everything(&mut s, w, config);
    let ap = s.reg.get(0).ap;
    let syms = s.reg.symbols();
    for a in 0..1u64 << w {
        for b in 0..1u64 << w {
            let tt = &mut s.tt;
            let (ca, cb) = (tt.bv_u64(w, a), tt.bv_u64(w, b));
            let map = HashMap::from([(s.x, ca), (s.y, cb)]);
            let exact = tt.bv_const(op.exact(&BvValue::new(w, a), &BvValue::new(w, b)));
            let mut oracle = OracleBackend::new(4096);
            for &sym in &syms {
                oracle.declare(tt, sym).unwrap();
            }
            let wrong = tt.neq(ap, exact);
            oracle.assert_term(tt, wrong).unwrap();
            for (_, cs) in &emitted {
                for &c in cs {
                    let c = substitute(tt, c, &map).unwrap();
                    oracle.assert_term(tt, c).unwrap();
                }
            }
            assert_eq!(
                oracle.check_sat(tt, None).unwrap(),
                CheckResult::Unsat,
                "{op:?} x={a} y={b}"
            );
        }
    }
}
