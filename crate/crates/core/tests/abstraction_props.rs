use lazybv::abstraction::{
    hbs_term, lower_bound_term, next_refinement, noov_term, upper_bound_term, OpKind, Refinement,
    SchemeConfig,
};
use lazybv::ir::{eval_bool, eval_bv, BvValue, Kind, Model, Sort, TermId, TermTable};

mod common;

use common::{check_completeness, check_soundness, emit_everything, model_xy, setup, Setup};

#[test]
fn stages_are_complete_width_3_and_4() {
    for name in ["full", "omit2", "merge23"] {
        let config = SchemeConfig::variant(name).unwrap();
        for op in OpKind::ALL {
            check_completeness(op, 3, &config);
            check_completeness(op, 4, &config);
        }
    }
}

#[test]
fn stages_are_complete_width_5() {
    for op in OpKind::ALL {
        check_completeness(op, 5, &SchemeConfig::default());
    }
}

#[test]
fn exhausted_scheme_is_sound_width_3() {
    for op in OpKind::ALL {
        check_soundness(op, 3, &SchemeConfig::default());
    }
}

#[test]
fn noov_certifies_no_overflow_widths_1_to_6() {
    for w in 1..=6u32 {
        let mut tt = TermTable::new();
        let x = tt.mk_symbol("x", Sort::BitVec(w)).unwrap();
        let y = tt.mk_symbol("y", Sort::BitVec(w)).unwrap();
        let n = noov_term(&mut tt, x, y);
        let (lo, hi) = (-(1i64 << (w - 1)), (1i64 << (w - 1)) - 1);
        for a in 0..1u64 << w {
            for b in 0..1u64 << w {
                let mut m = Model::new();
                m.insert(x, BvValue::new(w, a));
                m.insert(y, BvValue::new(w, b));
                let sa = BvValue::new(w, a).to_i64().unwrap();
                let sb = BvValue::new(w, b).to_i64().unwrap();
                let p = sa * sb;
                if eval_bool(&tt, n, &m).unwrap() {
                    assert!(lo <= p && p <= hi, "w={w} x={sa} y={sb}");
                }
                if a == 0 || b == 0 {
                    assert!(eval_bool(&tt, n, &m).unwrap());
                }
            }
        }
    }
}

#[test]
fn noov_rejects_overflowing_square() {
    let mut tt = TermTable::new();
    let x = tt.mk_symbol("x", Sort::BitVec(4)).unwrap();
    let y = tt.mk_symbol("y", Sort::BitVec(4)).unwrap();
    let n = noov_term(&mut tt, x, y);
    let mut m = Model::new();
    m.insert(x, BvValue::new(4, 7));
    m.insert(y, BvValue::new(4, 7));
    assert!(!eval_bool(&tt, n, &m).unwrap());
    // small factors are certified
    m.insert(x, BvValue::new(4, 1));
    m.insert(y, BvValue::new(4, 3));
    assert!(eval_bool(&tt, n, &m).unwrap());
}

#[test]
fn hbs_partitions_nonzero_values() {
    for w in 1..=6u32 {
        let mut tt = TermTable::new();
        let x = tt.mk_symbol("x", Sort::BitVec(w)).unwrap();
        let hs: Vec<TermId> = (0..w).map(|i| hbs_term(&mut tt, x, i)).collect();
        for v in 0..1u64 << w {
            let mut m = Model::new();
            m.insert(x, BvValue::new(w, v));
            let set: Vec<u32> = (0..w)
                .filter(|&i| eval_bool(&tt, hs[i as usize], &m).unwrap())
                .collect();
            if v == 0 {
                assert!(set.is_empty());
            } else {
                assert_eq!(set, vec![63 - v.leading_zeros()]);
            }
        }
    }
}

#[test]
fn hbs_examples() {
    let mut tt = TermTable::new();
    let x = tt.mk_symbol("x", Sort::BitVec(4)).unwrap();
    let mut m = Model::new();
    m.insert(x, BvValue::new(4, 0b0100));
    let at = |tt: &mut TermTable, m: &Model, i| {
        let h = hbs_term(tt, x, i);
        eval_bool(tt, h, m).unwrap()
    };
    assert_eq!(
        (0..4).map(|i| at(&mut tt, &m, i)).collect::<Vec<_>>(),
        [false, false, true, false]
    );
    m.insert(x, BvValue::new(4, 0b0101));
    assert!(at(&mut tt, &m, 2));
}

#[test]
fn interval_bounds_at_width_8() {
    let mut tt = TermTable::new();
    let a = tt.mk_symbol("a", Sort::BitVec(8)).unwrap();
    let b = tt.mk_symbol("b", Sort::BitVec(8)).unwrap();
    let l = lower_bound_term(&mut tt, a, b, 7);
    let u = upper_bound_term(&mut tt, a, b, 7);
    for av in 1..256u64 {
        let i = 63 - av.leading_zeros();
        for bv in 0..256u64 {
            let mut m = Model::new();
            m.insert(a, BvValue::new(8, av));
            m.insert(b, BvValue::new(8, bv));
            assert_eq!(
                eval_bv(&tt, l, &m).unwrap().to_u64(),
                Some((bv << i) & 0xff)
            );
            assert_eq!(
                eval_bv(&tt, u, &m).unwrap().to_u64(),
                Some((bv << (i + 1)) & 0xff)
            );
        }
    }
}

#[test]
fn interval_example_five_times_three() {
    let mut tt = TermTable::new();
    let a = tt.bv_u64(8, 5);
    let b = tt.bv_u64(8, 3);
    let l = lower_bound_term(&mut tt, a, b, 3);
    let u = upper_bound_term(&mut tt, a, b, 3);
    let m = Model::new();
    assert_eq!(eval_bv(&tt, l, &m).unwrap().to_u64(), Some(12));
    assert_eq!(eval_bv(&tt, u, &m).unwrap().to_u64(), Some(24));
}

#[test]
fn srem_survives_slicing_from_double_width() {
    for w in 1..=5u32 {
        for a in 0..1u64 << w {
            for b in 0..1u64 << w {
                let (x, y) = (BvValue::new(w, a), BvValue::new(w, b));
                let wide = x.sign_extend(w).bvsrem(&y.sign_extend(w));
                assert_eq!(wide.extract(w - 1, 0), x.bvsrem(&y), "w={w} {a} {b}");
            }
        }
    }
}

fn first_step(op: OpKind, w: u32) -> (Setup, Vec<TermId>) {
    let config = SchemeConfig::default();
    let mut s = setup(op, w, &config);
    let m = model_xy(&s, 1, 1, w);
    let Refinement::Step(o) = next_refinement(&mut s.tt, &mut s.reg, 0, &m, &config).unwrap()
    else {
        panic!("fresh instance has steps")
    };
    (s, o.constraints)
}

#[test]
fn simple_stage_contains_zero_and_minus_one_cases() {
    let (mut s, cs) = first_step(OpKind::Mul, 4);
    let tt = &mut s.tt;
    let ap = s.reg.get(0).ap;
    let zero = tt.bv_u64(4, 0);
    let xz = tt.eq(s.x, zero);
    let apz = tt.eq(ap, zero);
    assert!(cs.contains(&tt.implies(xz, apz)));
    let m1 = tt.bv_u64(4, 0xf);
    let ym1 = tt.eq(s.y, m1);
    let nx = tt.bvneg(s.x);
    let apnx = tt.eq(ap, nx);
    assert!(cs.contains(&tt.implies(ym1, apnx)));
    // x = 4 ⇒ r2p = y2p << 2 at double width
    let inst = s.reg.get(0).clone();
    let four = tt.bv_u64(4, 4);
    let is4 = tt.eq(s.x, four);
    let y2p = inst.y2p(tt);
    let two = tt.bv_u64(8, 2);
    let sh = tt.bin(Kind::BvShl, y2p, two);
    let eq = tt.eq(inst.r2p.unwrap(), sh);
    assert!(cs.contains(&tt.implies(is4, eq)));
}

#[test]
fn relations_stage_spawns_double_width_instances() {
    let config = SchemeConfig::default();
    let mut s = setup(OpKind::Mul, 4, &config);
    let m = model_xy(&s, 1, 1, 4);
    let mut cs = Vec::new();
    while s.reg.get(0).cursor < 3 {
        if let Refinement::Step(o) = next_refinement(&mut s.tt, &mut s.reg, 0, &m, &config).unwrap()
        {
            cs.extend(o.constraints);
        }
    }
    let inst = s.reg.get(0).clone();
    let tt = &mut s.tt;
    let x2 = inst.x2(tt);
    let y2 = inst.y2(tt);
    let prod = inst.r2_signed(tt);
    let commuted = s
        .reg
        .by_app(tt.bin(Kind::BvMul, y2, x2))
        .expect("commuted product");
    assert_eq!(s.reg.get(commuted).width, 8);
    assert!(cs.contains(&tt.eq(prod, s.reg.get(commuted).ap)));
    let q = s
        .reg
        .by_app(tt.bin(Kind::BvSdiv, prod, x2))
        .expect("quotient by x2");
    let z = tt.bv_u64(8, 0);
    let x2z = tt.eq(x2, z);
    let back = tt.eq(y2, s.reg.get(q).ap);
    assert!(cs.contains(&tt.or2(x2z, back)));
    // spawned instances start from their first step
    assert!(s.reg.iter().skip(1).all(|i| i.cursor == 0 && i.depth == 1));
}

#[test]
fn srem_relations_use_double_width_identity() {
    let (mut s, cs) = first_step(OpKind::Srem, 4);
    let inst = s.reg.get(0).clone();
    let tt = &mut s.tt;
    let x2 = inst.x2(tt);
    let y2 = inst.y2(tt);
    let q = s.reg.by_app(tt.bin(Kind::BvSdiv, x2, y2)).unwrap();
    let r = s.reg.by_app(tt.bin(Kind::BvSrem, x2, y2)).unwrap();
    let (qa, ra) = (s.reg.get(q).ap, s.reg.get(r).ap);
    let m = s.reg.by_app(tt.bin(Kind::BvMul, qa, y2)).unwrap();
    let sum = tt.bin(Kind::BvAdd, s.reg.get(m).ap, ra);
    assert!(cs.contains(&tt.eq(x2, sum)));
    let low = tt.extract(3, 0, ra);
    assert!(cs.contains(&tt.eq(inst.ap, low)));
}

#[test]
fn full_stage_is_native_operation() {
    let config = SchemeConfig::default();
    for op in [OpKind::Srem, OpKind::Udiv, OpKind::Sdiv, OpKind::Urem] {
        let mut s = setup(op, 4, &config);
        let m = model_xy(&s, 1, 1, 4);
        let _ = next_refinement(&mut s.tt, &mut s.reg, 0, &m, &config).unwrap();
        let Refinement::Step(o) = next_refinement(&mut s.tt, &mut s.reg, 0, &m, &config).unwrap()
        else {
            panic!()
        };
        let native = s.tt.bin(op.kind(), s.x, s.y);
        let ap = s.reg.get(0).ap;
        assert_eq!(o.constraints, vec![s.tt.eq(ap, native)]);
        assert!(s.reg.get(0).exhausted);
        assert_eq!(
            next_refinement(&mut s.tt, &mut s.reg, 0, &m, &config).unwrap(),
            Refinement::Exhausted
        );
    }
}

#[test]
fn full_interval_stage_consumes_one_index_per_call() {
    let config = SchemeConfig::default();
    let mut s = setup(OpKind::Mul, 4, &config);
    for _ in 0..3 {
        let m = model_xy(&s, 1, 1, 4);
        next_refinement(&mut s.tt, &mut s.reg, 0, &m, &config).unwrap();
    }
    let m = model_xy(&s, 0b0110, 1, 4);
    let Refinement::Step(o) = next_refinement(&mut s.tt, &mut s.reg, 0, &m, &config).unwrap()
    else {
        panic!()
    };
    assert_eq!(o.constraints.len(), 1);
    assert_eq!(
        s.reg
            .get(0)
            .asserted_hbs
            .iter()
            .copied()
            .collect::<Vec<_>>(),
        [2]
    );
    // zero is already fixed by the first stage
    let m0 = model_xy(&s, 0, 5, 4);
    let Refinement::Step(o) = next_refinement(&mut s.tt, &mut s.reg, 0, &m0, &config).unwrap()
    else {
        panic!()
    };
    assert!(o.constraints.is_empty());
    assert!(next_refinement(&mut s.tt, &mut s.reg, 0, &m, &config).is_err());
    for v in [1, 8, 3] {
        let m = model_xy(&s, v, 1, 4);
        next_refinement(&mut s.tt, &mut s.reg, 0, &m, &config).unwrap();
    }
    assert!(s.reg.get(0).exhausted);
}

#[test]
fn per_application_symbols_are_distinct() {
    let config = SchemeConfig::default();
    let mut s = setup(OpKind::Mul, 4, &config);
    emit_everything(&mut s, 4, &config);
    let syms = s.reg.symbols();
    let mut dedup = syms.clone();
    dedup.sort();
    dedup.dedup();
    assert_eq!(syms.len(), dedup.len());
    assert!(s.reg.len() > 1);
}
