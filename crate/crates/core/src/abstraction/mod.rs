//! Abstraction of expensive operations and the staged constraints that
//! refine them.
//!
//! Every application of `bvmul`, `bvsdiv`, `bvudiv`, `bvsrem` or `bvurem` is
//! replaced by a fresh symbol (`ap`). An [`Instance`] records the
//! application; [`next_refinement`] produces the constraints of its next
//! step. Each stage is complete: assigning every `ap` and auxiliary symbol
//! its exact value satisfies all emitted constraints.

mod config;
mod divrem;
mod mul;

use std::collections::{BTreeSet, HashMap};

pub use config::{ConfigError, FreshSymbolPolicy, SchemeConfig, SignedMode, Stage, VARIANTS};
pub use mul::{hbs_term, lower_bound_term, noov_term, upper_bound_term};

use crate::ir::{eval_bv, BvValue, IrError, Kind, Model, Sort, TermId, TermTable};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum OpKind {
    Mul,
    Sdiv,
    Udiv,
    Srem,
    Urem,
}

impl OpKind {
    pub const ALL: [OpKind; 5] = [
        OpKind::Mul,
        OpKind::Sdiv,
        OpKind::Udiv,
        OpKind::Srem,
        OpKind::Urem,
    ];

    pub fn from_kind(k: &Kind) -> Option<OpKind> {
        Some(match k {
            Kind::BvMul => OpKind::Mul,
            Kind::BvSdiv => OpKind::Sdiv,
            Kind::BvUdiv => OpKind::Udiv,
            Kind::BvSrem => OpKind::Srem,
            Kind::BvUrem => OpKind::Urem,
            _ => return None,
        })
    }

    pub fn kind(self) -> Kind {
        match self {
            OpKind::Mul => Kind::BvMul,
            OpKind::Sdiv => Kind::BvSdiv,
            OpKind::Udiv => Kind::BvUdiv,
            OpKind::Srem => Kind::BvSrem,
            OpKind::Urem => Kind::BvUrem,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OpKind::Mul => "mul",
            OpKind::Sdiv => "sdiv",
            OpKind::Udiv => "udiv",
            OpKind::Srem => "srem",
            OpKind::Urem => "urem",
        }
    }

    pub fn exact(self, x: &BvValue, y: &BvValue) -> BvValue {
        match self {
            OpKind::Mul => x.bvmul(y),
            OpKind::Sdiv => x.bvsdiv(y),
            OpKind::Udiv => x.bvudiv(y),
            OpKind::Srem => x.bvsrem(y),
            OpKind::Urem => x.bvurem(y),
        }
    }
}

pub type InstanceId = usize;

/// One abstracted application `op(x, y)`.
#[derive(Clone, Debug)]
pub struct Instance {
    pub id: InstanceId,
    pub op: OpKind,
    pub x: TermId,
    pub y: TermId,
    /// The application term `op(x, y)` this instance stands for.
    pub app: TermId,
    pub ap: TermId,
    pub width: u32,
    /// 0 for applications of the input formula, parent depth + 1 for
    /// applications introduced by relation constraints.
    pub depth: u32,
    /// Free `2w`-bit symbol standing for the unsigned product of the operand
    /// magnitudes (multiplication only).
    pub r2p: Option<TermId>,
    /// Index of the next step; never decreases.
    pub cursor: usize,
    pub asserted_hbs: BTreeSet<u32>,
    /// `x = 0 ⇒ ap = 0` has been asserted by some stage.
    pub zero_covered: bool,
    /// `ap = r'₂[w-1:0]` has been asserted.
    pub linked: bool,
    pub exhausted: bool,
    pub refinement_rounds: u32,
    pub full_interval_refinements: u32,
    pub stages_emitted: Vec<Stage>,
}

impl Instance {
    pub fn x2(&self, tt: &mut TermTable) -> TermId {
        self.extend(tt, self.x)
    }

    pub fn y2(&self, tt: &mut TermTable) -> TermId {
        self.extend(tt, self.y)
    }

    fn extend(&self, tt: &mut TermTable, t: TermId) -> TermId {
        match self.op {
            OpKind::Udiv | OpKind::Urem => tt.zero_extend(t, self.width),
            _ => tt.sign_extend(t, self.width),
        }
    }

    /// `x₂⁺`: magnitude of `x` at double width.
    pub fn x2p(&self, tt: &mut TermTable) -> TermId {
        mul::magnitude2(tt, self.x)
    }

    pub fn y2p(&self, tt: &mut TermTable) -> TermId {
        mul::magnitude2(tt, self.y)
    }

    /// `r'₂`: the signed double-width product rebuilt from `r2p`.
    pub fn r2_signed(&self, tt: &mut TermTable) -> TermId {
        let r2p = self.r2p.expect("multiplication instance");
        let w = self.width;
        let xs = tt.bit(self.x, w - 1);
        let ys = tt.bit(self.y, w - 1);
        let flip = tt.app(Kind::Xor, &[xs, ys]);
        let neg = tt.bvneg(r2p);
        tt.ite(flip, neg, r2p)
    }

    /// Every symbol the instance introduced.
    pub fn symbols(&self) -> impl Iterator<Item = TermId> {
        std::iter::once(self.ap).chain(self.r2p)
    }
}

/// Result of requesting an application from the registry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Spawn {
    /// The `ap` symbol, or the folded constant when both operands are
    /// constants.
    pub term: TermId,
    /// Set when the request created a new instance.
    pub created: Option<InstanceId>,
}

#[derive(Clone, Debug, Default)]
pub struct Registry {
    instances: Vec<Instance>,
    by_app: HashMap<TermId, InstanceId>,
    /// Bit-vector widths occurring in the input assertions.
    formula_widths: BTreeSet<u32>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Instance> {
        self.instances.iter()
    }

    pub fn get(&self, id: InstanceId) -> &Instance {
        &self.instances[id]
    }

    pub fn get_mut(&mut self, id: InstanceId) -> &mut Instance {
        &mut self.instances[id]
    }

    pub fn by_app(&self, app: TermId) -> Option<InstanceId> {
        self.by_app.get(&app).copied()
    }

    /// All `ap` and auxiliary symbols, in creation order.
    pub fn symbols(&self) -> Vec<TermId> {
        self.instances.iter().flat_map(Instance::symbols).collect()
    }

    /// Widths available to the slicing relations of a `w`-bit instance:
    /// those of the input formula and of all instances, below `2w`.
    pub fn context_widths(&self, w: u32) -> BTreeSet<u32> {
        self.formula_widths
            .iter()
            .copied()
            .chain(self.instances.iter().map(|i| i.width))
            .filter(|&v| v < 2 * w)
            .collect()
    }

    /// Returns the `ap` symbol for `op(x, y)`, creating an instance unless
    /// the application is already registered or both operands are constants.
    pub fn request(
        &mut self,
        tt: &mut TermTable,
        op: OpKind,
        x: TermId,
        y: TermId,
        depth: u32,
    ) -> Spawn {
        if let (Some(a), Some(b)) = (tt.as_bv_const(x), tt.as_bv_const(y)) {
            let v = op.exact(a, b);
            return Spawn {
                term: tt.bv_const(v),
                created: None,
            };
        }
        let app = tt.bin(op.kind(), x, y);
        if let Some(id) = self.by_app(app) {
            return Spawn {
                term: self.instances[id].ap,
                created: None,
            };
        }
        let w = tt.width(x);
        let ap = tt.fresh_symbol(&format!("ap_{}", op.name()), Sort::BitVec(w));
        let r2p = (op == OpKind::Mul).then(|| tt.fresh_symbol("r2p", Sort::BitVec(2 * w)));
        let id = self.instances.len();
        self.instances.push(Instance {
            id,
            op,
            x,
            y,
            app,
            ap,
            width: w,
            depth,
            r2p,
            cursor: 0,
            asserted_hbs: BTreeSet::new(),
            zero_covered: false,
            linked: false,
            exhausted: false,
            refinement_rounds: 0,
            full_interval_refinements: 0,
            stages_emitted: Vec::new(),
        });
        self.by_app.insert(app, id);
        Spawn {
            term: ap,
            created: Some(id),
        }
    }

    /// Extends `base` with the exact value of every instance symbol it does
    /// not assign. Instances are visited in creation order, so operands that
    /// mention other `ap` symbols are always evaluable.
    pub fn exact_completion(&self, tt: &TermTable, base: &Model) -> Result<Model, IrError> {
        let mut m = base.clone();
        for inst in &self.instances {
            let need_ap = !m.contains(inst.ap);
            let need_r2p = inst.r2p.is_some_and(|r| !m.contains(r));
            if !need_ap && !need_r2p {
                continue;
            }
            let xv = eval_bv(tt, inst.x, &m)?;
            let yv = eval_bv(tt, inst.y, &m)?;
            if need_ap {
                m.insert(inst.ap, inst.op.exact(&xv, &yv));
            }
            if let (true, Some(r)) = (need_r2p, inst.r2p) {
                m.insert(r, mul::exact_r2p(&xv, &yv));
            }
        }
        Ok(m)
    }

    /// Instances whose `ap` value differs from the exact operation result.
    pub fn violated(&self, tt: &TermTable, model: &Model) -> Result<Vec<InstanceId>, IrError> {
        let mut out = Vec::new();
        for inst in &self.instances {
            let xv = eval_bv(tt, inst.x, model)?;
            let yv = eval_bv(tt, inst.y, model)?;
            let apv = model.bv(inst.ap).ok_or_else(|| {
                IrError::UnboundSymbol(tt.symbol_name(inst.ap).unwrap_or("?").to_string())
            })?;
            if *apv != inst.op.exact(&xv, &yv) {
                out.push(inst.id);
            }
        }
        Ok(out)
    }
}

/// Constraints produced by one refinement step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StageOutput {
    pub constraints: Vec<TermId>,
    /// Instances created while building the constraints.
    pub spawned: Vec<InstanceId>,
}

impl StageOutput {
    fn extend(&mut self, other: StageOutput) {
        self.constraints.extend(other.constraints);
        self.spawned.extend(other.spawned);
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Refinement {
    Step(StageOutput),
    /// Every step has been emitted.
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AbstractionError {
    /// The model repeats an interval whose exact constraint is already
    /// asserted; the backend returned a model of a weaker formula.
    #[error("highest-bit-set index {index} of instance {instance} is already asserted")]
    IndexAlreadyAsserted { instance: InstanceId, index: u32 },
    #[error(transparent)]
    Eval(#[from] IrError),
}

/// Replaces every targeted application by its instance symbol.
///
/// Applications are keyed by DAG node, so a shared subterm yields a single
/// instance. Applications whose operands are both constants are folded.
pub fn abstract_formula(
    tt: &mut TermTable,
    assertions: &[TermId],
    config: &SchemeConfig,
) -> (Vec<TermId>, Registry) {
    let mut reg = Registry::new();
    let roots: Vec<TermId> = match config.signed_mode {
        SignedMode::Signed => assertions.to_vec(),
        SignedMode::RewriteUnsigned => rewrite_unsigned(tt, assertions),
    };
    let mut map: HashMap<TermId, TermId> = HashMap::new();
    for t in tt.post_order(&roots) {
        if let Some(w) = tt.sort(t).width() {
            reg.formula_widths.insert(w);
        }
        let kind = tt.kind(t).clone();
        let children: Vec<TermId> = tt.children(t).iter().map(|c| map[c]).collect();
        let new = match OpKind::from_kind(&kind) {
            Some(op) => reg.request(tt, op, children[0], children[1], 0).term,
            None if kind.is_leaf() => t,
            None => tt.app(kind, &children),
        };
        map.insert(t, new);
    }
    (roots.iter().map(|r| map[r]).collect(), reg)
}

/// Rewrites signed division and remainder into unsigned operations on
/// operand magnitudes, selected by the operand signs.
pub fn rewrite_unsigned(tt: &mut TermTable, roots: &[TermId]) -> Vec<TermId> {
    let mut map: HashMap<TermId, TermId> = HashMap::new();
    for t in tt.post_order(roots) {
        let kind = tt.kind(t).clone();
        let ch: Vec<TermId> = tt.children(t).iter().map(|c| map[c]).collect();
        let new = match kind {
            Kind::BvSdiv | Kind::BvSrem => {
                let (s, u) = (ch[0], ch[1]);
                let w = tt.width(s);
                let ss = tt.bit(s, w - 1);
                let us = tt.bit(u, w - 1);
                let ns = tt.bvneg(s);
                let nu = tt.bvneg(u);
                let abs_s = tt.ite(ss, ns, s);
                let abs_u = tt.ite(us, nu, u);
                if kind == Kind::BvSdiv {
                    let q = tt.bin(Kind::BvUdiv, abs_s, abs_u);
                    let nq = tt.bvneg(q);
                    let flip = tt.app(Kind::Xor, &[ss, us]);
                    tt.ite(flip, nq, q)
                } else {
                    let r = tt.bin(Kind::BvUrem, abs_s, abs_u);
                    let nr = tt.bvneg(r);
                    tt.ite(ss, nr, r)
                }
            }
            k if k.is_leaf() => t,
            k => tt.app(k, &ch),
        };
        map.insert(t, new);
    }
    roots.iter().map(|r| map[r]).collect()
}

/// Produces the constraints of the next step of instance `id`.
///
/// `model` must assign the operands of the instance; it is consulted only by
/// the per-interval multiplication stage. The step cursor advances except
/// while that stage still has intervals left.
pub fn next_refinement(
    tt: &mut TermTable,
    reg: &mut Registry,
    id: InstanceId,
    model: &Model,
    config: &SchemeConfig,
) -> Result<Refinement, AbstractionError> {
    let inst = reg.get(id);
    let steps = config.steps(inst.op);
    if inst.exhausted || inst.cursor >= steps.len() {
        return Ok(Refinement::Exhausted);
    }
    let step = steps[inst.cursor].clone();
    let last = inst.cursor + 1 == steps.len();
    let mut out = StageOutput::default();
    let mut advance = true;
    for &stage in &step {
        let part = match (reg.get(id).op, stage) {
            (OpKind::Mul, Stage::Simple) => mul::stage_simple(tt, reg, id),
            (OpKind::Mul, Stage::Intervals) => mul::stage_intervals(tt, reg, id),
            (OpKind::Mul, Stage::Relations) => mul::stage_relations(tt, reg, id, config),
            (OpKind::Mul, Stage::FullMul) => {
                let (part, done) = mul::stage_full_interval(tt, reg, id, model)?;
                advance = done;
                part
            }
            (_, Stage::Full) => divrem::stage_full(tt, reg, id),
            (_, Stage::Relations) => divrem::stage_relations(tt, reg, id, config),
            (op, s) => unreachable!("stage {s} is not defined for {op:?}; rejected by validation"),
        };
        out.extend(part);
        let inst = reg.get_mut(id);
        if !inst.stages_emitted.contains(&stage) {
            inst.stages_emitted.push(stage);
        }
    }
    let inst = reg.get_mut(id);
    if advance {
        inst.cursor += 1;
        if last {
            inst.exhausted = true;
        }
    }
    Ok(Refinement::Step(out))
}

/// Emits every step of `id` as if each were triggered once, using `model`
/// for the per-interval stage, and returns all constraints. Intended for
/// checking stage properties in isolation.
pub fn all_steps(
    tt: &mut TermTable,
    reg: &mut Registry,
    id: InstanceId,
    model: &Model,
    config: &SchemeConfig,
) -> Result<StageOutput, AbstractionError> {
    let mut out = StageOutput::default();
    loop {
        let before = reg.get(id).cursor;
        match next_refinement(tt, reg, id, model, config)? {
            Refinement::Exhausted => return Ok(out),
            Refinement::Step(s) => out.extend(s),
        }
        if reg.get(id).cursor == before {
            // the per-interval stage needs a new model to continue
            return Ok(out);
        }
    }
}

/// Value of `t` under `model`, treating it as Boolean.
pub(crate) fn holds(tt: &TermTable, t: TermId, model: &Model) -> Option<bool> {
    let mut pe = crate::ir::PartialEval::new(|s| model.get(s).cloned());
    pe.eval(tt, t).and_then(|v| v.as_bool())
}

/// Constant of width `w` holding `v` (truncated).
pub(crate) fn konst(tt: &mut TermTable, w: u32, v: u64) -> TermId {
    tt.bv_const(BvValue::new(w, v))
}

/// The constant `2^k` at width `w`.
pub(crate) fn pow2(tt: &mut TermTable, w: u32, k: u32) -> TermId {
    let v = num_bigint::BigUint::from(1u8) << k;
    tt.bv_const(BvValue::from_biguint(w, &v))
}

/// Low `w'` bits of `t`, looking through extensions so that slicing an
/// extended operand back to its own width yields the operand itself.
pub(crate) fn slice_low(tt: &mut TermTable, t: TermId, w: u32) -> TermId {
    if let Kind::SignExtend(_) | Kind::ZeroExtend(_) = tt.kind(t) {
        let inner = tt.children(t)[0];
        if w <= tt.width(inner) {
            return tt.extract(w - 1, 0, inner);
        }
    }
    tt.extract(w - 1, 0, t)
}
