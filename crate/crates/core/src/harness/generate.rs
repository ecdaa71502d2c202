//! Random QF_BV scripts and the bundled benchmark families.

use std::time::Duration;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::record::EvalStatus;
use crate::abstraction::SchemeConfig;
use crate::backend::{BackendHandle, BackendKind};
use crate::ir::{BvValue, Kind, Sort, TermId, TermTable};
use crate::refine::{solve, Limits};
use crate::smtlib::{parse_script, print_script, Command, Script};

const ABSTRACTED: [Kind; 5] = [
    Kind::BvMul,
    Kind::BvUdiv,
    Kind::BvSdiv,
    Kind::BvUrem,
    Kind::BvSrem,
];
const OTHER_BINARY: [Kind; 8] = [
    Kind::BvAdd,
    Kind::BvSub,
    Kind::BvAnd,
    Kind::BvOr,
    Kind::BvXor,
    Kind::BvShl,
    Kind::BvLshr,
    Kind::BvAshr,
];
const PREDICATES: [Kind; 5] = [Kind::Eq, Kind::BvUlt, Kind::BvUle, Kind::BvSlt, Kind::BvSle];

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub min_width: u32,
    pub max_width: u32,
    pub max_vars: usize,
    /// Upper bound on `vars × width`, so that enumeration stays cheap.
    pub max_free_bits: u32,
    pub max_depth: u32,
    pub max_assertions: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            min_width: 1,
            max_width: 6,
            max_vars: 4,
            max_free_bits: 16,
            max_depth: 3,
            max_assertions: 3,
        }
    }
}

/// Seeded generator of scripts that contain at least one abstracted
/// operation.
pub struct FormulaGen {
    rng: ChaCha8Rng,
    cfg: GenConfig,
}

struct Ctx {
    tt: TermTable,
    vars: Vec<TermId>,
    width: u32,
}

impl FormulaGen {
    pub fn new(seed: u64, cfg: GenConfig) -> Self {
        FormulaGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            cfg,
        }
    }

    fn constant(&mut self, ctx: &mut Ctx) -> TermId {
        let w = ctx.width;
        let v = match self.rng.gen_range(0..4) {
            0 => 0,
            1 => 1,
            2 => u64::MAX,
            _ => self.rng.gen(),
        };
        ctx.tt.bv_const(BvValue::new(
            w,
            if w >= 64 { v } else { v & ((1 << w) - 1) },
        ))
    }

    fn leaf(&mut self, ctx: &mut Ctx) -> TermId {
        if self.rng.gen_bool(0.7) {
            *ctx.vars
                .choose(&mut self.rng)
                .expect("at least one variable")
        } else {
            self.constant(ctx)
        }
    }

    fn bv(&mut self, ctx: &mut Ctx, depth: u32) -> TermId {
        if depth == 0 || self.rng.gen_bool(0.3) {
            return self.leaf(ctx);
        }
        match self.rng.gen_range(0..10) {
            0..=3 => self.abstracted(ctx, depth),
            4 => {
                let a = self.bv(ctx, depth - 1);
                if self.rng.gen_bool(0.5) {
                    ctx.tt.bvneg(a)
                } else {
                    ctx.tt.app(Kind::BvNot, &[a])
                }
            }
            5 => {
                let c = self.atom(ctx, depth - 1);
                let a = self.bv(ctx, depth - 1);
                let b = self.bv(ctx, depth - 1);
                ctx.tt.ite(c, a, b)
            }
            _ => {
                let k = OTHER_BINARY.choose(&mut self.rng).unwrap().clone();
                let a = self.bv(ctx, depth - 1);
                let b = self.bv(ctx, depth - 1);
                ctx.tt.bin(k, a, b)
            }
        }
    }

    fn abstracted(&mut self, ctx: &mut Ctx, depth: u32) -> TermId {
        let k = ABSTRACTED.choose(&mut self.rng).unwrap().clone();
        let d = depth.saturating_sub(1);
        let a = self.bv(ctx, d);
        let b = self.bv(ctx, d);
        ctx.tt.bin(k, a, b)
    }

    fn atom(&mut self, ctx: &mut Ctx, depth: u32) -> TermId {
        let k = PREDICATES.choose(&mut self.rng).unwrap().clone();
        let a = self.bv(ctx, depth);
        let b = self.bv(ctx, depth);
        let p = ctx.tt.bin(k, a, b);
        if self.rng.gen_bool(0.3) {
            ctx.tt.not(p)
        } else {
            p
        }
    }

    /// One script in SMT-LIB text, without a status annotation.
    pub fn script(&mut self) -> String {
        let width = self.rng.gen_range(self.cfg.min_width..=self.cfg.max_width);
        let max_vars = (self.cfg.max_free_bits / width).clamp(1, self.cfg.max_vars as u32) as usize;
        let nvars = self.rng.gen_range(1..=max_vars);
        let mut ctx = Ctx {
            tt: TermTable::new(),
            vars: Vec::new(),
            width,
        };
        for i in 0..nvars {
            let v = ctx
                .tt
                .mk_symbol(&format!("v{i}"), Sort::BitVec(width))
                .expect("fresh name");
            ctx.vars.push(v);
        }
        let depth = self.cfg.max_depth.max(1);
        let mut assertions = Vec::new();
        // the first assertion always compares an abstracted application
        let k = PREDICATES.choose(&mut self.rng).unwrap().clone();
        let lhs = self.abstracted(&mut ctx, depth);
        let rhs = self.bv(&mut ctx, depth - 1);
        assertions.push(ctx.tt.bin(k, lhs, rhs));
        let extra = self.rng.gen_range(0..self.cfg.max_assertions.max(1));
        for _ in 0..extra {
            let a = self.atom(&mut ctx, depth - 1);
            assertions.push(a);
        }
        render(&ctx.tt, &ctx.vars, &assertions, None)
    }
}

/// Prints a complete script with an optional `:status`.
pub fn render(
    tt: &TermTable,
    vars: &[TermId],
    assertions: &[TermId],
    status: Option<EvalStatus>,
) -> String {
    let mut commands = vec![Command::SetLogic("QF_BV".into())];
    if let Some(s) = status {
        commands.push(Command::SetInfo("status".into(), s.name().into()));
    }
    commands.extend(vars.iter().map(|&v| Command::Declare(v)));
    commands.extend(assertions.iter().map(|&a| Command::Assert(a)));
    commands.push(Command::CheckSat);
    commands.push(Command::Exit);
    let script = Script {
        logic: Some("QF_BV".into()),
        declarations: vars.to_vec(),
        assertions: assertions.to_vec(),
        commands,
    };
    print_script(tt, &script)
}

/// How a reference verdict was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Exhaustive enumeration.
    Oracle,
    /// Bit-blasting without abstraction, for scripts with too many free
    /// bits to enumerate.
    BitBlast,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::Oracle => "oracle",
            Provenance::BitBlast => "bitblast",
        }
    }
}

/// Decides `text` without abstraction: by enumeration when the script has
/// at most `oracle_bits` free bits, else by bit-blasting.
pub fn reference_status(
    text: &str,
    oracle_bits: u64,
    timeout: Duration,
) -> Option<(EvalStatus, Provenance)> {
    let mut tt = TermTable::new();
    let script = parse_script(&mut tt, text).ok()?;
    let bits: u64 = script
        .declarations
        .iter()
        .map(|&d| u64::from(tt.sort(d).width().unwrap_or(1)))
        .sum();
    let (kind, prov) = if bits <= oracle_bits {
        (
            BackendKind::Oracle {
                max_bits: oracle_bits,
            },
            Provenance::Oracle,
        )
    } else {
        (BackendKind::Builtin, Provenance::BitBlast)
    };
    let mut handle = BackendHandle::new(&kind).ok()?;
    let limits = Limits {
        timeout: Some(timeout),
        max_rounds: None,
    };
    let r = solve(
        &mut tt,
        &script,
        &SchemeConfig::baseline(),
        &mut handle,
        limits,
    );
    let s = EvalStatus::of(&r.status);
    s.is_solved().then_some((s, prov))
}

/// One bundled benchmark before its status is known.
#[derive(Clone, Debug)]
pub struct Benchmark {
    pub family: &'static str,
    pub name: String,
    pub text: String,
}

struct Family {
    tt: TermTable,
    vars: Vec<TermId>,
}

impl Family {
    fn new(w: u32, names: &[&str]) -> Self {
        let mut tt = TermTable::new();
        let vars = names
            .iter()
            .map(|n| tt.mk_symbol(n, Sort::BitVec(w)).unwrap())
            .collect();
        Family { tt, vars }
    }

    fn finish(self, family: &'static str, name: String, assertions: &[TermId]) -> Benchmark {
        Benchmark {
            family,
            name,
            text: render(&self.tt, &self.vars, assertions, None),
        }
    }
}

/// The desk-scale benchmark families: random equalities and disequalities
/// over the abstracted operations, commutativity and distributivity
/// contradictions, power-of-two products, and random mixed formulas.
pub fn corpus_families(seed: u64) -> Vec<Benchmark> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    for (i, w) in [4u32, 6, 8, 10, 12, 16].into_iter().enumerate() {
        for (j, k) in ABSTRACTED.iter().enumerate() {
            let mut f = Family::new(w, &["x", "y"]);
            let (x, y) = (f.vars[0], f.vars[1]);
            let app = f.tt.bin(k.clone(), x, y);
            let c: u64 = rng.gen::<u64>() & ((1 << w) - 1);
            let cv = f.tt.bv_u64(w, c);
            let mut asserts = vec![if rng.gen_bool(0.5) {
                f.tt.eq(app, cv)
            } else {
                f.tt.neq(app, cv)
            }];
            // bound one operand so the instance stays small enough to check
            let bound = f.tt.bv_u64(w, 1 << (w / 2).min(6));
            asserts.push(f.tt.bin(Kind::BvUlt, y, bound));
            let lo = f.tt.bv_u64(w, 1);
            asserts.push(f.tt.bin(Kind::BvUle, lo, y));
            out.push(f.finish("opeq", format!("opeq_{i}_{j}_w{w}"), &asserts));
        }
    }

    for w in [4u32, 5, 6, 7, 8] {
        let mut f = Family::new(w, &["x", "y"]);
        let (x, y) = (f.vars[0], f.vars[1]);
        let a = f.tt.bin(Kind::BvMul, x, y);
        let b = f.tt.bin(Kind::BvMul, y, x);
        let d = f.tt.neq(a, b);
        out.push(f.finish("commute", format!("commute_mul_w{w}"), &[d]));
    }

    for w in [3u32, 4, 5] {
        let mut f = Family::new(w, &["x", "y", "z"]);
        let (x, y, z) = (f.vars[0], f.vars[1], f.vars[2]);
        let s = f.tt.bin(Kind::BvAdd, y, z);
        let lhs = f.tt.bin(Kind::BvMul, x, s);
        let xy = f.tt.bin(Kind::BvMul, x, y);
        let xz = f.tt.bin(Kind::BvMul, x, z);
        let rhs = f.tt.bin(Kind::BvAdd, xy, xz);
        let d = f.tt.neq(lhs, rhs);
        out.push(f.finish("distrib", format!("distrib_w{w}"), &[d]));
    }

    for w in [4u32, 6, 8, 12, 16] {
        for k in [1u32, w / 2, w - 1] {
            let mut f = Family::new(w, &["x"]);
            let x = f.vars[0];
            let p = f.tt.bv_u64(w, 1 << k);
            let m = f.tt.bin(Kind::BvMul, x, p);
            let kk = f.tt.bv_u64(w, u64::from(k));
            let s = f.tt.bin(Kind::BvShl, x, kk);
            let d = f.tt.neq(m, s);
            out.push(f.finish("pow2", format!("pow2_shl_w{w}_k{k}"), &[d]));
            let mut f = Family::new(w, &["x"]);
            let x = f.vars[0];
            let p = f.tt.bv_u64(w, 1 << k);
            let m = f.tt.bin(Kind::BvMul, x, p);
            let c = f.tt.bv_u64(w, (rng.gen::<u64>() & ((1 << w) - 1)) | 1);
            let e = f.tt.eq(m, c);
            out.push(f.finish("pow2", format!("pow2_odd_w{w}_k{k}"), &[e]));
        }
    }

    for w in [4u32, 6, 8] {
        let mut f = Family::new(w, &["x"]);
        let x = f.vars[0];
        let sq = f.tt.bin(Kind::BvMul, x, x);
        let two = f.tt.bv_u64(w, 2);
        let e = f.tt.eq(sq, two);
        out.push(f.finish("square", format!("square_two_w{w}"), &[e]));
    }

    let cfg = GenConfig {
        min_width: 4,
        max_width: 8,
        max_vars: 3,
        max_free_bits: 16,
        ..GenConfig::default()
    };
    let mut gen = FormulaGen::new(seed ^ 0x5eed, cfg);
    for i in 0..24 {
        out.push(Benchmark {
            family: "random",
            name: format!("random_{i:02}"),
            text: gen.script(),
        });
    }
    out
}

/// Adds `(set-info :status …)` and a provenance comment after the logic.
pub fn annotate(text: &str, status: EvalStatus, prov: Provenance) -> String {
    let mut out = String::new();
    let mut done = false;
    for line in text.lines() {
        out.push_str(line);
        out.push('\n');
        if !done && line.starts_with("(set-logic") {
            out.push_str(&format!(
                "(set-info :status {status})\n; status by {}\n",
                prov.name()
            ));
            done = true;
        }
    }
    out
}
