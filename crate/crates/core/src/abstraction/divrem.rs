//! Stages for `bvsdiv`, `bvudiv`, `bvsrem` and `bvurem`.

use super::{konst, InstanceId, OpKind, Registry, SchemeConfig, StageOutput};
use crate::ir::{BvValue, Kind, TermId, TermTable};

/// Facts that hold for divisor or dividend values with fixed results.
fn simple_cases(tt: &mut TermTable, op: OpKind, x: TermId, y: TermId, ap: TermId) -> Vec<TermId> {
    let w = tt.width(x);
    let zero = konst(tt, w, 0);
    let one = konst(tt, w, 1);
    let ones = tt.bv_const(BvValue::ones(w));
    let y_zero = tt.eq(y, zero);
    let y_nonzero = tt.not(y_zero);
    let x_zero = tt.eq(x, zero);
    let y_one = tt.eq(y, one);
    let mut c = Vec::new();
    let mut imp = |tt: &mut TermTable, cond: TermId, res: TermId| c.push(tt.implies(cond, res));
    match op {
        OpKind::Sdiv => {
            let e = tt.eq(ap, x);
            imp(tt, y_one, e);
            let y_m1 = tt.eq(y, ones);
            let nx = tt.bvneg(x);
            let e = tt.eq(ap, nx);
            imp(tt, y_m1, e);
            let cond = tt.and2(x_zero, y_nonzero);
            let e = tt.eq(ap, zero);
            imp(tt, cond, e);
            let xs = tt.bit(x, w - 1);
            let by_zero = tt.ite(xs, one, ones);
            let e = tt.eq(ap, by_zero);
            imp(tt, y_zero, e);
        }
        OpKind::Udiv => {
            let e = tt.eq(ap, ones);
            imp(tt, y_zero, e);
            let e = tt.eq(ap, x);
            imp(tt, y_one, e);
            let cond = tt.and2(x_zero, y_nonzero);
            let e = tt.eq(ap, zero);
            imp(tt, cond, e);
            let le = tt.bin(Kind::BvUle, ap, x);
            imp(tt, y_nonzero, le);
        }
        OpKind::Urem => {
            let e = tt.eq(ap, x);
            imp(tt, y_zero, e);
            let lt = tt.bin(Kind::BvUlt, ap, y);
            imp(tt, y_nonzero, lt);
            let t = tt.bool_const(true);
            let le = tt.bin(Kind::BvUle, ap, x);
            imp(tt, t, le);
        }
        OpKind::Srem | OpKind::Mul => {}
    }
    c
}

/// Relates the operation to its double-width counterpart and to the
/// quotient/remainder identity `x₂ = q·y₂ + r` at double width, where
/// neither the product nor the sum can overflow.
pub(super) fn stage_relations(
    tt: &mut TermTable,
    reg: &mut Registry,
    id: InstanceId,
    config: &SchemeConfig,
) -> StageOutput {
    let inst = reg.get(id).clone();
    let mut out = StageOutput {
        constraints: simple_cases(tt, inst.op, inst.x, inst.y, inst.ap),
        spawned: Vec::new(),
    };
    if inst.depth >= config.spawn_depth_limit {
        return out;
    }
    let depth = inst.depth + 1;
    let w = inst.width;
    let x2 = inst.x2(tt);
    let y2 = inst.y2(tt);
    let (div_op, rem_op) = match inst.op {
        OpKind::Sdiv | OpKind::Srem => (OpKind::Sdiv, OpKind::Srem),
        _ => (OpKind::Udiv, OpKind::Urem),
    };
    let mut request = |tt: &mut TermTable, op: OpKind, a: TermId, b: TermId| {
        let s = reg.request(tt, op, a, b, depth);
        out.spawned.extend(s.created);
        s.term
    };
    let q = request(tt, div_op, x2, y2);
    let r = request(tt, rem_op, x2, y2);
    let m = request(tt, OpKind::Mul, q, y2);
    let own = if inst.op == div_op { q } else { r };
    let low = tt.extract(w - 1, 0, own);
    out.constraints.push(tt.eq(inst.ap, low));
    let sum = tt.bin(Kind::BvAdd, m, r);
    out.constraints.push(tt.eq(x2, sum));
    out
}

/// `ap = op(x, y)` with the native operation.
pub(super) fn stage_full(tt: &mut TermTable, reg: &mut Registry, id: InstanceId) -> StageOutput {
    let inst = reg.get(id).clone();
    let exact = tt.bin(inst.op.kind(), inst.x, inst.y);
    let eq = tt.eq(inst.ap, exact);
    if inst.op == OpKind::Mul {
        reg.get_mut(id).zero_covered = true;
    }
    StageOutput {
        constraints: vec![eq],
        spawned: Vec::new(),
    }
}
