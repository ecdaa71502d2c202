//! Tseitin translation of bit-vector terms into clauses of a [`SatSolver`].
//!
//! Gates are structurally hashed and folded against the constant literal.
//! Division and remainder use the definitional encoding
//! `x = q * y + r, r < y` at double width; the signed variants go through
//! magnitudes.

use std::collections::HashMap;

use super::cnf::CnfFormula;
use super::sat::{Lit, SatSolver};
use crate::ir::{BvValue, Kind, Sort, TermId, TermTable};

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Gate {
    And(Lit, Lit),
    Xor(Lit, Lit),
    Ite(Lit, Lit, Lit),
}

/// Dividend and divisor bits to quotient and remainder bits.
type DivCache = HashMap<(Vec<Lit>, Vec<Lit>), (Vec<Lit>, Vec<Lit>)>;

pub struct BitBlaster {
    solver: SatSolver,
    tru: Lit,
    bools: HashMap<TermId, Lit>,
    bvs: HashMap<TermId, Vec<Lit>>,
    gates: HashMap<Gate, Lit>,
    divs: DivCache,
    record: Option<CnfFormula>,
    inconsistent: bool,
}

impl Default for BitBlaster {
    fn default() -> Self {
        Self::new(SatSolver::new())
    }
}

impl BitBlaster {
    pub fn new(mut solver: SatSolver) -> Self {
        let tru = Lit::pos(solver.new_var());
        solver.add_clause(&[tru]);
        BitBlaster {
            solver,
            tru,
            bools: HashMap::new(),
            bvs: HashMap::new(),
            gates: HashMap::new(),
            divs: HashMap::new(),
            record: None,
            inconsistent: false,
        }
    }

    /// Keeps a copy of every clause so it can be written out as DIMACS.
    pub fn with_recording(mut self) -> Self {
        let mut f = CnfFormula::new(self.solver.num_vars() as u32);
        f.add_clause(&[self.tru.to_dimacs()]);
        self.record = Some(f);
        self
    }

    pub fn solver(&mut self) -> &mut SatSolver {
        &mut self.solver
    }

    pub fn recorded(&self) -> Option<&CnfFormula> {
        self.record.as_ref()
    }

    pub fn is_inconsistent(&self) -> bool {
        self.inconsistent
    }

    pub fn true_lit(&self) -> Lit {
        self.tru
    }

    /// Literal of an already blasted Boolean term.
    pub fn bool_lit(&self, t: TermId) -> Option<Lit> {
        self.bools.get(&t).copied()
    }

    /// Bits (least significant first) of an already blasted bit-vector term.
    pub fn bv_bits(&self, t: TermId) -> Option<&[Lit]> {
        self.bvs.get(&t).map(Vec::as_slice)
    }

    pub fn is_blasted(&self, t: TermId) -> bool {
        self.bools.contains_key(&t) || self.bvs.contains_key(&t)
    }

    /// Asserts a Boolean term as a unit.
    pub fn assert_term(&mut self, tt: &TermTable, t: TermId) {
        self.blast(tt, t);
        let l = self.bools[&t];
        self.clause(&[l]);
    }

    /// Translates `root` and everything below it.
    pub fn blast(&mut self, tt: &TermTable, root: TermId) {
        if self.is_blasted(root) {
            return;
        }
        for t in tt.post_order(&[root]) {
            if self.is_blasted(t) {
                continue;
            }
            match tt.sort(t) {
                Sort::Bool => {
                    let l = self.blast_bool(tt, t);
                    self.bools.insert(t, l);
                }
                Sort::BitVec(w) => {
                    let bits = self.blast_bv(tt, t);
                    debug_assert_eq!(bits.len(), w as usize);
                    self.bvs.insert(t, bits);
                }
            }
        }
    }

    /// Value of a blasted bit-vector term in the solver's last model.
    pub fn bv_model_value(&self, t: TermId) -> Option<BvValue> {
        let bits = self.bvs.get(&t)?;
        let vals: Vec<bool> = bits
            .iter()
            .map(|&l| self.solver.lit_model_value(l))
            .collect();
        Some(BvValue::from_bits_lsb(&vals))
    }

    pub fn bool_model_value(&self, t: TermId) -> Option<bool> {
        self.bools.get(&t).map(|&l| self.solver.lit_model_value(l))
    }

    fn fresh(&mut self) -> Lit {
        let v = self.solver.new_var();
        if let Some(r) = &mut self.record {
            r.new_var();
        }
        Lit::pos(v)
    }

    fn clause(&mut self, lits: &[Lit]) {
        if let Some(r) = &mut self.record {
            let d: Vec<i64> = lits.iter().map(|l| l.to_dimacs()).collect();
            r.add_clause(&d);
        }
        if !self.solver.add_clause(lits) {
            self.inconsistent = true;
        }
    }

    fn konst(&self, b: bool) -> Lit {
        if b {
            self.tru
        } else {
            !self.tru
        }
    }

    fn and(&mut self, a: Lit, b: Lit) -> Lit {
        let f = !self.tru;
        if a == f || b == f || a == !b {
            return f;
        }
        if a == self.tru || a == b {
            return b;
        }
        if b == self.tru {
            return a;
        }
        let key = Gate::And(a.min(b), a.max(b));
        if let Some(&g) = self.gates.get(&key) {
            return g;
        }
        let g = self.fresh();
        self.clause(&[!g, a]);
        self.clause(&[!g, b]);
        self.clause(&[g, !a, !b]);
        self.gates.insert(key, g);
        g
    }

    fn or(&mut self, a: Lit, b: Lit) -> Lit {
        !self.and(!a, !b)
    }

    fn xor(&mut self, a: Lit, b: Lit) -> Lit {
        let t = self.tru;
        if a == b {
            return !t;
        }
        if a == !b {
            return t;
        }
        if a == !t {
            return b;
        }
        if a == t {
            return !b;
        }
        if b == !t {
            return a;
        }
        if b == t {
            return !a;
        }
        // normalise polarity so that xor(¬a, b) shares the gate of xor(a, b)
        let flip = !a.is_positive() ^ !b.is_positive();
        let (pa, pb) = (
            if a.is_positive() { a } else { !a },
            if b.is_positive() { b } else { !b },
        );
        let key = Gate::Xor(pa.min(pb), pa.max(pb));
        let g = match self.gates.get(&key) {
            Some(&g) => g,
            None => {
                let g = self.fresh();
                self.clause(&[!g, pa, pb]);
                self.clause(&[!g, !pa, !pb]);
                self.clause(&[g, !pa, pb]);
                self.clause(&[g, pa, !pb]);
                self.gates.insert(key, g);
                g
            }
        };
        if flip {
            !g
        } else {
            g
        }
    }

    fn ite(&mut self, c: Lit, t: Lit, e: Lit) -> Lit {
        if c == self.tru || t == e {
            return t;
        }
        if c == !self.tru {
            return e;
        }
        if t == self.tru || t == c {
            return self.or(c, e);
        }
        if t == !self.tru || t == !c {
            return self.and(!c, e);
        }
        if e == self.tru || e == !c {
            return self.or(!c, t);
        }
        if e == !self.tru || e == c {
            return self.and(c, t);
        }
        let key = Gate::Ite(c, t, e);
        if let Some(&g) = self.gates.get(&key) {
            return g;
        }
        let g = self.fresh();
        self.clause(&[!c, !t, g]);
        self.clause(&[!c, t, !g]);
        self.clause(&[c, !e, g]);
        self.clause(&[c, e, !g]);
        self.clause(&[!t, !e, g]);
        self.clause(&[t, e, !g]);
        self.gates.insert(key, g);
        g
    }

    fn and_many(&mut self, lits: &[Lit]) -> Lit {
        lits.iter().fold(self.tru, |acc, &l| self.and(acc, l))
    }

    fn or_many(&mut self, lits: &[Lit]) -> Lit {
        let f = !self.tru;
        lits.iter().fold(f, |acc, &l| self.or(acc, l))
    }

    fn eq_bits(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        let same: Vec<Lit> = a.iter().zip(b).map(|(&x, &y)| !self.xor(x, y)).collect();
        self.and_many(&same)
    }

    fn const_bits(&self, v: &BvValue) -> Vec<Lit> {
        v.bits_lsb().into_iter().map(|b| self.konst(b)).collect()
    }

    fn add_bits(&mut self, a: &[Lit], b: &[Lit], carry_in: Lit) -> Vec<Lit> {
        let mut c = carry_in;
        let mut out = Vec::with_capacity(a.len());
        for (&x, &y) in a.iter().zip(b) {
            let p = self.xor(x, y);
            out.push(self.xor(p, c));
            let g = self.and(x, y);
            let pc = self.and(p, c);
            c = self.or(g, pc);
        }
        out
    }

    fn neg_bits(&mut self, a: &[Lit]) -> Vec<Lit> {
        let inv: Vec<Lit> = a.iter().map(|&l| !l).collect();
        let zero = vec![!self.tru; a.len()];
        self.add_bits(&inv, &zero, self.tru)
    }

    fn sub_bits(&mut self, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        let inv: Vec<Lit> = b.iter().map(|&l| !l).collect();
        self.add_bits(a, &inv, self.tru)
    }

    fn mul_bits(&mut self, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        let w = a.len();
        let f = !self.tru;
        let mut acc = vec![f; w];
        for (i, &bi) in b.iter().enumerate() {
            if bi == f {
                continue;
            }
            let mut row = vec![f; w];
            for j in 0..w - i {
                row[i + j] = self.and(a[j], bi);
            }
            acc = self.add_bits(&acc, &row, f);
        }
        acc
    }

    /// a <u b, scanning from the least significant bit.
    fn ult_bits(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        let mut lt = !self.tru;
        for (&x, &y) in a.iter().zip(b) {
            let here = self.and(!x, y);
            let same = !self.xor(x, y);
            let keep = self.and(same, lt);
            lt = self.or(here, keep);
        }
        lt
    }

    fn slt_bits(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        let w = a.len();
        let mut fa = a.to_vec();
        let mut fb = b.to_vec();
        fa[w - 1] = !fa[w - 1];
        fb[w - 1] = !fb[w - 1];
        self.ult_bits(&fa, &fb)
    }

    fn ite_bits(&mut self, c: Lit, t: &[Lit], e: &[Lit]) -> Vec<Lit> {
        t.iter().zip(e).map(|(&x, &y)| self.ite(c, x, y)).collect()
    }

    fn fresh_bits(&mut self, w: usize) -> Vec<Lit> {
        (0..w).map(|_| self.fresh()).collect()
    }

    /// Quotient and remainder of unsigned division, shared between
    /// `bvudiv` and `bvurem` on the same operands.
    fn udivrem(&mut self, x: &[Lit], y: &[Lit]) -> (Vec<Lit>, Vec<Lit>) {
        let key = (x.to_vec(), y.to_vec());
        if let Some(qr) = self.divs.get(&key) {
            return qr.clone();
        }
        let w = x.len();
        let f = !self.tru;
        let q = self.fresh_bits(w);
        let r = self.fresh_bits(w);
        let ext = |v: &[Lit]| -> Vec<Lit> {
            v.iter().copied().chain(std::iter::repeat_n(f, w)).collect()
        };
        let (qx, yx, rx, xx) = (ext(&q), ext(y), ext(&r), ext(x));
        let prod = self.mul_bits(&qx, &yx);
        let sum = self.add_bits(&prod, &rx, f);
        let def = self.eq_bits(&sum, &xx);
        let below = self.ult_bits(&r, y);
        let y_zero = {
            let any = self.or_many(y);
            !any
        };
        let ones = vec![self.tru; w];
        let q_ones = self.eq_bits(&q, &ones);
        let r_x = self.eq_bits(&r, x);
        // y = 0: q = ~0, r = x
        self.clause(&[!y_zero, q_ones]);
        self.clause(&[!y_zero, r_x]);
        // y ≠ 0: x = q*y + r without overflow, r < y
        self.clause(&[y_zero, def]);
        self.clause(&[y_zero, below]);
        self.divs.insert(key, (q.clone(), r.clone()));
        (q, r)
    }

    fn abs_bits(&mut self, a: &[Lit]) -> Vec<Lit> {
        let neg = self.neg_bits(a);
        let s = a[a.len() - 1];
        self.ite_bits(s, &neg, a)
    }

    fn shift(&mut self, kind: &Kind, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        let w = a.len();
        let fill = match kind {
            Kind::BvAshr => a[w - 1],
            _ => !self.tru,
        };
        let mut cur = a.to_vec();
        let mut overflow = Vec::new();
        for (k, &bk) in b.iter().enumerate() {
            let amount = if k < 63 { 1u64 << k } else { u64::MAX };
            if amount >= w as u64 {
                overflow.push(bk);
                continue;
            }
            let s = amount as usize;
            let shifted: Vec<Lit> = (0..w)
                .map(|i| match kind {
                    Kind::BvShl => {
                        if i >= s {
                            cur[i - s]
                        } else {
                            fill
                        }
                    }
                    _ => {
                        if i + s < w {
                            cur[i + s]
                        } else {
                            fill
                        }
                    }
                })
                .collect();
            cur = self.ite_bits(bk, &shifted, &cur);
        }
        let big = self.or_many(&overflow);
        let all_fill = vec![fill; w];
        self.ite_bits(big, &all_fill, &cur)
    }

    fn blast_bool(&mut self, tt: &TermTable, t: TermId) -> Lit {
        let ch = tt.children(t);
        let b = |i: usize| self.bools[&ch[i]];
        match tt.kind(t) {
            Kind::BoolConst(v) => self.konst(*v),
            Kind::Symbol(_) => self.fresh(),
            Kind::Not => !b(0),
            Kind::And => {
                let ls: Vec<Lit> = ch.iter().map(|c| self.bools[c]).collect();
                self.and_many(&ls)
            }
            Kind::Or => {
                let ls: Vec<Lit> = ch.iter().map(|c| self.bools[c]).collect();
                self.or_many(&ls)
            }
            Kind::Xor => {
                let (x, y) = (b(0), b(1));
                self.xor(x, y)
            }
            Kind::Implies => {
                let (x, y) = (b(0), b(1));
                self.or(!x, y)
            }
            Kind::Eq => match tt.sort(ch[0]) {
                Sort::Bool => {
                    let (x, y) = (b(0), b(1));
                    !self.xor(x, y)
                }
                Sort::BitVec(_) => {
                    let (x, y) = (self.bvs[&ch[0]].clone(), self.bvs[&ch[1]].clone());
                    self.eq_bits(&x, &y)
                }
            },
            Kind::Ite => {
                let (c, x, y) = (b(0), b(1), b(2));
                self.ite(c, x, y)
            }
            k @ (Kind::BvUlt | Kind::BvUle | Kind::BvSlt | Kind::BvSle) => {
                let (x, y) = (self.bvs[&ch[0]].clone(), self.bvs[&ch[1]].clone());
                match k {
                    Kind::BvUlt => self.ult_bits(&x, &y),
                    Kind::BvUle => !self.ult_bits(&y, &x),
                    Kind::BvSlt => self.slt_bits(&x, &y),
                    _ => !self.slt_bits(&y, &x),
                }
            }
            k => unreachable!("{k:?} is not Boolean"),
        }
    }

    fn blast_bv(&mut self, tt: &TermTable, t: TermId) -> Vec<Lit> {
        let ch = tt.children(t).to_vec();
        let arg = |s: &Self, i: usize| s.bvs[&ch[i]].clone();
        match tt.kind(t) {
            Kind::BvConst(v) => self.const_bits(v),
            Kind::Symbol(_) => self.fresh_bits(tt.width(t) as usize),
            Kind::Ite => {
                let c = self.bools[&ch[0]];
                let (x, y) = (arg(self, 1), arg(self, 2));
                self.ite_bits(c, &x, &y)
            }
            Kind::BvNot => arg(self, 0).into_iter().map(|l| !l).collect(),
            Kind::BvNeg => {
                let x = arg(self, 0);
                self.neg_bits(&x)
            }
            Kind::Extract { hi, lo } => arg(self, 0)[*lo as usize..=*hi as usize].to_vec(),
            Kind::ZeroExtend(k) => {
                let mut x = arg(self, 0);
                x.extend(std::iter::repeat_n(!self.tru, *k as usize));
                x
            }
            Kind::SignExtend(k) => {
                let mut x = arg(self, 0);
                let s = *x.last().unwrap();
                x.extend(std::iter::repeat_n(s, *k as usize));
                x
            }
            Kind::Concat => {
                let mut lo = arg(self, 1);
                lo.extend(arg(self, 0));
                lo
            }
            k => {
                let k = k.clone();
                let (x, y) = (arg(self, 0), arg(self, 1));
                match k {
                    Kind::BvAnd => x.iter().zip(&y).map(|(&a, &b)| self.and(a, b)).collect(),
                    Kind::BvOr => x.iter().zip(&y).map(|(&a, &b)| self.or(a, b)).collect(),
                    Kind::BvXor => x.iter().zip(&y).map(|(&a, &b)| self.xor(a, b)).collect(),
                    Kind::BvAdd => self.add_bits(&x, &y, !self.tru),
                    Kind::BvSub => self.sub_bits(&x, &y),
                    Kind::BvMul => self.mul_bits(&x, &y),
                    Kind::BvUdiv => self.udivrem(&x, &y).0,
                    Kind::BvUrem => self.udivrem(&x, &y).1,
                    Kind::BvSdiv | Kind::BvSrem => {
                        let (ax, ay) = (self.abs_bits(&x), self.abs_bits(&y));
                        let (q, r) = self.udivrem(&ax, &ay);
                        let sx = x[x.len() - 1];
                        if k == Kind::BvSdiv {
                            let sy = y[y.len() - 1];
                            let flip = self.xor(sx, sy);
                            let nq = self.neg_bits(&q);
                            self.ite_bits(flip, &nq, &q)
                        } else {
                            let nr = self.neg_bits(&r);
                            self.ite_bits(sx, &nr, &r)
                        }
                    }
                    Kind::BvShl | Kind::BvLshr | Kind::BvAshr => self.shift(&k, &x, &y),
                    other => unreachable!("{other:?} is not a bit-vector operator"),
                }
            }
        }
    }
}
