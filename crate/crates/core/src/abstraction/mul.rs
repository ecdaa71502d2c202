//! Stages for `bvmul`.

use super::{
    konst, pow2, slice_low, AbstractionError, InstanceId, OpKind, Registry, SchemeConfig,
    StageOutput,
};
use crate::ir::{eval_bv, BvValue, Kind, Model, TermId, TermTable};

/// True iff the highest set bit of `x` is `i`.
pub fn hbs_term(tt: &mut TermTable, x: TermId, i: u32) -> TermId {
    let w = tt.width(x);
    assert!(i < w, "bit index {i} out of range for width {w}");
    // x[w-1:i] = 0…01
    let top = tt.extract(w - 1, i, x);
    let one = konst(tt, w - i, 1);
    tt.eq(top, one)
}

fn abs_term(tt: &mut TermTable, x: TermId) -> TermId {
    let w = tt.width(x);
    let s = tt.bit(x, w - 1);
    let n = tt.bvneg(x);
    tt.ite(s, n, x)
}

/// Magnitude of `x` sign-extended to twice its width.
pub(super) fn magnitude2(tt: &mut TermTable, x: TermId) -> TermId {
    let w = tt.width(x);
    let s = tt.bit(x, w - 1);
    let x2 = tt.sign_extend(x, w);
    let n = tt.bvneg(x2);
    tt.ite(s, n, x2)
}

pub(super) fn exact_r2p(x: &BvValue, y: &BvValue) -> BvValue {
    let w = x.width();
    let mag = |v: &BvValue| {
        let e = v.sign_extend(w);
        if v.msb() {
            e.bvneg()
        } else {
            e
        }
    };
    mag(x).bvmul(&mag(y))
}

/// Certifies that the signed product of `x` and `y` fits in their width.
///
/// With `a`, `b` the magnitudes of the operands, the product is below
/// `2^(w-1)` whenever `a < 2^(i+1)` and `b < 2^(w-2-i)` for some `i`. The
/// magnitude of the most negative value is `2^(w-1)`, which no disjunct
/// admits. Zero factors are accepted directly.
pub fn noov_term(tt: &mut TermTable, x: TermId, y: TermId) -> TermId {
    let w = tt.width(x);
    let zero = konst(tt, w, 0);
    let mut cases = vec![tt.eq(x, zero), tt.eq(y, zero)];
    if w >= 3 {
        let a = abs_term(tt, x);
        let b = abs_term(tt, y);
        for i in 0..=w - 3 {
            let h = hbs_term(tt, a, i);
            let bound = pow2(tt, w, w - 2 - i);
            let small = tt.bin(Kind::BvUlt, b, bound);
            cases.push(tt.and2(h, small));
        }
    }
    tt.or_all(cases)
}

fn shl_const(tt: &mut TermTable, b: TermId, k: u32) -> TermId {
    let w = tt.width(b);
    let amount = konst(tt, w, u64::from(k));
    tt.bin(Kind::BvShl, b, amount)
}

/// Unrolled lower bound `L(a, b, n)` on the product of `a` and `b`.
pub fn lower_bound_term(tt: &mut TermTable, a: TermId, b: TermId, n: u32) -> TermId {
    let w = tt.width(b);
    let h0 = hbs_term(tt, a, 0);
    let zero = konst(tt, w, 0);
    let mut acc = tt.ite(h0, b, zero);
    for k in 1..=n {
        let h = hbs_term(tt, a, k);
        let s = shl_const(tt, b, k);
        acc = tt.ite(h, s, acc);
    }
    acc
}

/// Unrolled upper bound `U(a, b, n)`, exclusive.
pub fn upper_bound_term(tt: &mut TermTable, a: TermId, b: TermId, n: u32) -> TermId {
    let mut acc = shl_const(tt, b, 1);
    for k in 1..=n {
        let h = hbs_term(tt, a, k);
        let s = shl_const(tt, b, k + 1);
        acc = tt.ite(h, s, acc);
    }
    acc
}

/// `ap = r'₂[w-1:0]`, once per instance.
fn link(tt: &mut TermTable, reg: &mut Registry, id: InstanceId, out: &mut StageOutput) {
    let inst = reg.get(id).clone();
    if inst.linked {
        return;
    }
    let r2 = inst.r2_signed(tt);
    let low = tt.extract(inst.width - 1, 0, r2);
    out.constraints.push(tt.eq(inst.ap, low));
    reg.get_mut(id).linked = true;
}

pub(super) fn stage_simple(tt: &mut TermTable, reg: &mut Registry, id: InstanceId) -> StageOutput {
    let inst = reg.get(id).clone();
    let (x, y, ap, w) = (inst.x, inst.y, inst.ap, inst.width);
    let mut out = StageOutput::default();
    let c = &mut out.constraints;

    let zero = konst(tt, w, 0);
    let one = konst(tt, w, 1);
    let ones = tt.bv_const(BvValue::ones(w));
    let neg_x = tt.bvneg(x);
    let neg_y = tt.bvneg(y);
    let ap_zero = tt.eq(ap, zero);
    for (cond_arg, cond_val, res) in [
        (x, zero, ap_zero),
        (y, zero, ap_zero),
        (x, one, tt.eq(ap, y)),
        (y, one, tt.eq(ap, x)),
        (x, ones, tt.eq(ap, neg_y)),
        (y, ones, tt.eq(ap, neg_x)),
    ] {
        let cond = tt.eq(cond_arg, cond_val);
        c.push(tt.implies(cond, res));
    }

    // result sign when no overflow is possible
    let nv = noov_term(tt, x, y);
    let xs = tt.bit(x, w - 1);
    let ys = tt.bit(y, w - 1);
    let rs = tt.bit(ap, w - 1);
    let (nxs, nys, nrs) = (tt.not(xs), tt.not(ys), tt.not(rs));
    let x_pos = tt.bin(Kind::BvSlt, zero, x);
    let y_pos = tt.bin(Kind::BvSlt, zero, y);
    for (a, b, concl) in [
        (nxs, nys, nrs),
        (x_pos, ys, rs),
        (xs, y_pos, rs),
        (xs, ys, nrs),
    ] {
        let cond = tt.and2(a, b);
        let body = tt.implies(cond, concl);
        c.push(tt.implies(nv, body));
    }

    // power-of-two factors
    let r2p = inst.r2p.expect("multiplication instance");
    let x2p = inst.x2p(tt);
    let y2p = inst.y2p(tt);
    for i in 1..w {
        let p = pow2(tt, w, i);
        for (f, other) in [(x, y2p), (y, x2p)] {
            let is_pow = tt.eq(f, p);
            let shifted = shl_const(tt, other, i);
            let eq = tt.eq(r2p, shifted);
            c.push(tt.implies(is_pow, eq));
        }
    }
    link(tt, reg, id, &mut out);
    reg.get_mut(id).zero_covered = true;
    out
}

pub(super) fn stage_intervals(
    tt: &mut TermTable,
    reg: &mut Registry,
    id: InstanceId,
) -> StageOutput {
    let mut out = StageOutput::default();
    link(tt, reg, id, &mut out);
    let inst = reg.get(id).clone();
    let w = inst.width;
    let r2p = inst.r2p.expect("multiplication instance");
    let x2p = inst.x2p(tt);
    let y2p = inst.y2p(tt);
    let zero2 = konst(tt, 2 * w, 0);
    let nx = tt.neq(x2p, zero2);
    let ny = tt.neq(y2p, zero2);
    let guard = tt.and2(nx, ny);
    let lo = lower_bound_term(tt, x2p, y2p, w - 1);
    let hi = upper_bound_term(tt, x2p, y2p, w - 1);
    let above = tt.bin(Kind::BvUle, lo, r2p);
    let below = tt.bin(Kind::BvUlt, r2p, hi);
    let bound = tt.and2(above, below);
    out.constraints.push(tt.implies(guard, bound));
    out
}

pub(super) fn stage_relations(
    tt: &mut TermTable,
    reg: &mut Registry,
    id: InstanceId,
    config: &SchemeConfig,
) -> StageOutput {
    let mut out = StageOutput::default();
    link(tt, reg, id, &mut out);
    let inst = reg.get(id).clone();
    if inst.depth >= config.spawn_depth_limit {
        return out;
    }
    let w = inst.width;
    let depth = inst.depth + 1;
    let x2 = inst.x2(tt);
    let y2 = inst.y2(tt);
    // the double-width product is r'₂ itself
    let m = inst.r2_signed(tt);
    let widths = reg.context_widths(w);

    let mut request =
        |tt: &mut TermTable, op: OpKind, a: TermId, b: TermId, out: &mut StageOutput| {
            let s = reg.request(tt, op, a, b, depth);
            out.spawned.extend(s.created);
            s.term
        };

    let zero2 = konst(tt, 2 * w, 0);
    let m_yx = request(tt, OpKind::Mul, y2, x2, &mut out);
    out.constraints.push(tt.eq(m, m_yx));
    for (a, b) in [(x2, y2), (y2, x2)] {
        // a = 0 ∨ b = sdiv(m, a)
        let q = request(tt, OpKind::Sdiv, m, a, &mut out);
        let a_zero = tt.eq(a, zero2);
        let back = tt.eq(b, q);
        out.constraints.push(tt.or2(a_zero, back));
    }

    for wp in widths {
        let xs = slice_low(tt, x2, wp);
        let ys = slice_low(tt, y2, wp);
        let ms = tt.extract(wp - 1, 0, m);
        for (a, b) in [(xs, ys), (ys, xs)] {
            let p = request(tt, OpKind::Mul, a, b, &mut out);
            out.constraints.push(tt.eq(ms, p));
        }
        if wp < 2 {
            continue;
        }
        let h = wp / 2;
        let xl = slice_low(tt, x2, h);
        let yl = slice_low(tt, y2, h);
        let xh = tt.sign_extend(xl, wp - h);
        let yh = tt.sign_extend(yl, wp - h);
        let p = request(tt, OpKind::Mul, xh, yh, &mut out);
        let q = request(tt, OpKind::Mul, yh, xh, &mut out);
        out.constraints.push(tt.eq(p, q));
        let zero = konst(tt, wp, 0);
        for (a, b) in [(yh, xh), (xh, yh)] {
            // a = 0 ∨ b = sdiv(p, a)
            let d = request(tt, OpKind::Sdiv, p, a, &mut out);
            let a_zero = tt.eq(a, zero);
            let back = tt.eq(b, d);
            out.constraints.push(tt.or2(a_zero, back));
        }
    }
    out
}

pub(super) fn stage_full_interval(
    tt: &mut TermTable,
    reg: &mut Registry,
    id: InstanceId,
    model: &Model,
) -> Result<(StageOutput, bool), AbstractionError> {
    let inst = reg.get(id).clone();
    let (x, y, ap, w) = (inst.x, inst.y, inst.ap, inst.width);
    let xv = eval_bv(tt, x, model)?;
    let mut out = StageOutput::default();
    match xv.highest_set_bit() {
        None => {
            if !inst.zero_covered {
                let zero = konst(tt, w, 0);
                let cond = tt.eq(x, zero);
                let res = tt.eq(ap, zero);
                out.constraints.push(tt.implies(cond, res));
                reg.get_mut(id).zero_covered = true;
            }
        }
        Some(i) => {
            if inst.asserted_hbs.contains(&i) {
                return Err(AbstractionError::IndexAlreadyAsserted {
                    instance: id,
                    index: i,
                });
            }
            let h = hbs_term(tt, x, i);
            let exact = tt.bin(Kind::BvMul, x, y);
            let eq = tt.eq(ap, exact);
            out.constraints.push(tt.implies(h, eq));
            let inst = reg.get_mut(id);
            inst.asserted_hbs.insert(i);
            inst.full_interval_refinements += 1;
        }
    }
    let inst = reg.get(id);
    let done = inst.asserted_hbs.len() == w as usize && inst.zero_covered;
    Ok((out, done))
}
