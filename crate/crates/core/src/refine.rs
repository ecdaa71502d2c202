//! The abstraction-refinement loop.
//!
//! The abstracted formula goes to the backend; each satisfying assignment is
//! checked against the exact semantics of every abstracted application, and
//! the applications it gets wrong receive their next refinement step. Since
//! every step is complete, an unsat answer carries over to the input
//! formula; a model that respects every application is a model of the input.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use crate::abstraction::{
    abstract_formula, holds, next_refinement, FreshSymbolPolicy, InstanceId, OpKind, Refinement,
    Registry, SchemeConfig, Stage,
};
use crate::backend::{BackendError, BackendHandle, CheckResult, UnknownReason as BackendUnknown};
use crate::ir::{eval_bool, eval_bv, IrError, Model, TermId, TermTable};
use crate::smtlib::Script;

/// Default wall-clock budget per solve, in seconds.
pub const DEFAULT_TIMEOUT_SECS: u64 = 1200;

#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub timeout: Option<Duration>,
    pub max_rounds: Option<u32>,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            timeout: Some(Duration::from_secs(DEFAULT_TIMEOUT_SECS)),
            max_rounds: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UnknownReason {
    Timeout,
    BackendFailure(String),
    /// The configured steps ran out without making the abstraction exact.
    Incomplete,
    RoundLimit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    /// Model restricted to the symbols declared by the script.
    Sat(Model),
    Unsat,
    Unknown(UnknownReason),
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::Sat(_) => "sat",
            Status::Unsat => "unsat",
            Status::Unknown(_) => "unknown",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceStats {
    pub op: OpKind,
    pub width: u32,
    pub depth: u32,
    /// Number of completed steps.
    pub steps: usize,
    pub stages: Vec<Stage>,
    /// Rounds in which the instance was found violated and refined.
    pub refinement_rounds: u32,
    pub full_interval_refinements: u32,
    pub hbs_indices: Vec<u32>,
    pub exhausted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveResult {
    pub status: Status,
    /// Refinement rounds, i.e. satisfiable but spurious backend answers.
    pub rounds: u32,
    pub checks: u64,
    pub instances: Vec<InstanceStats>,
}

impl SolveResult {
    fn new(status: Status, rounds: u32, checks: u64, reg: &Registry) -> Self {
        let instances = reg
            .iter()
            .map(|i| InstanceStats {
                op: i.op,
                width: i.width,
                depth: i.depth,
                steps: i.cursor,
                stages: i.stages_emitted.clone(),
                refinement_rounds: i.refinement_rounds,
                full_interval_refinements: i.full_interval_refinements,
                hbs_indices: i.asserted_hbs.iter().copied().collect(),
                exhausted: i.exhausted,
            })
            .collect();
        SolveResult {
            status,
            rounds,
            checks,
            instances,
        }
    }
}

/// Instances whose `ap` value in `model` differs from the exact result.
pub fn check_spurious(
    tt: &TermTable,
    reg: &Registry,
    model: &Model,
) -> Result<Vec<InstanceId>, IrError> {
    reg.violated(tt, model)
}

/// Restriction of `model` to the symbols declared by `script`.
pub fn project_model(model: &Model, script: &Script) -> Model {
    model.restrict(&script.declarations)
}

fn failure(e: impl std::fmt::Display) -> Status {
    Status::Unknown(UnknownReason::BackendFailure(e.to_string()))
}

fn from_backend(e: BackendError) -> Status {
    failure(e)
}

/// Decides `script` with the given scheme.
pub fn solve(
    tt: &mut TermTable,
    script: &Script,
    config: &SchemeConfig,
    backend: &mut BackendHandle,
    limits: Limits,
) -> SolveResult {
    let deadline = limits.timeout.map(|d| Instant::now() + d);
    let mut reg = Registry::new();
    let mut rounds = 0;
    let status = run(
        tt,
        script,
        config,
        backend,
        limits,
        deadline,
        &mut reg,
        &mut rounds,
    );
    SolveResult::new(status, rounds, backend.checks(), &reg)
}

#[allow(clippy::too_many_arguments)]
fn run(
    tt: &mut TermTable,
    script: &Script,
    config: &SchemeConfig,
    backend: &mut BackendHandle,
    limits: Limits,
    deadline: Option<Instant>,
    reg: &mut Registry,
    rounds: &mut u32,
) -> Status {
    let assertions = if config.abstraction {
        let (abstracted, r) = abstract_formula(tt, &script.assertions, config);
        *reg = r;
        abstracted
    } else {
        script.assertions.clone()
    };
    let declare = |tt: &TermTable,
                   backend: &mut BackendHandle,
                   syms: &[TermId]|
     -> Result<(), BackendError> {
        for &s in syms {
            backend.declare(tt, s)?;
        }
        Ok(())
    };
    if let Err(e) = declare(tt, backend, &script.declarations)
        .and_then(|()| declare(tt, backend, &reg.symbols()))
    {
        return from_backend(e);
    }
    for &a in &assertions {
        if let Err(e) = backend.assert_term(tt, a) {
            return from_backend(e);
        }
    }

    let mut ackermann_done: HashSet<(InstanceId, InstanceId)> = HashSet::new();
    loop {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            return Status::Unknown(UnknownReason::Timeout);
        }
        match backend.check_sat(tt, deadline) {
            Err(e) => return from_backend(e),
            Ok(CheckResult::Unsat) => return Status::Unsat,
            Ok(CheckResult::Unknown(BackendUnknown::Timeout)) => {
                return Status::Unknown(UnknownReason::Timeout)
            }
            Ok(CheckResult::Unknown(BackendUnknown::Incomplete)) => {
                return failure("backend answered unknown");
            }
            Ok(CheckResult::Sat) => {}
        }
        let mut wanted = script.declarations.clone();
        wanted.extend(reg.symbols());
        let model = match backend.get_value(tt, &wanted) {
            Ok(m) => m,
            Err(e) => return from_backend(e),
        };
        let violated = match check_spurious(tt, reg, &model) {
            Ok(v) => v,
            Err(e) => return failure(e),
        };
        if violated.is_empty() {
            // every application is exact, so the input assertions must hold
            for &a in &script.assertions {
                match eval_bool(tt, a, &model) {
                    Ok(true) => {}
                    Ok(false) => {
                        return failure("model of the abstraction violates an input assertion")
                    }
                    Err(e) => return failure(e),
                }
            }
            return Status::Sat(project_model(&model, script));
        }
        if limits.max_rounds.is_some_and(|m| *rounds >= m) {
            return Status::Unknown(UnknownReason::RoundLimit);
        }
        *rounds += 1;

        let mut emitted = 0usize;
        let mut incomplete = false;
        for &id in &violated {
            reg.get_mut(id).refinement_rounds += 1;
            loop {
                let before = (reg.get(id).cursor, reg.len());
                let out = match next_refinement(tt, reg, id, &model, config) {
                    Ok(Refinement::Step(out)) => out,
                    Ok(Refinement::Exhausted) => {
                        if config.is_sound(reg.get(id).op) {
                            return failure(format!(
                                "exact scheme of instance {id} exhausted but still violated"
                            ));
                        }
                        incomplete = true;
                        break;
                    }
                    Err(e) => return failure(e),
                };
                let new_syms: Vec<TermId> = (before.1..reg.len())
                    .flat_map(|i| reg.get(i).symbols())
                    .collect();
                if let Err(e) = declare(tt, backend, &new_syms) {
                    return from_backend(e);
                }
                for &c in &out.constraints {
                    if let Err(e) = backend.assert_term(tt, c) {
                        return from_backend(e);
                    }
                }
                emitted += out.constraints.len();
                // keep going while the step leaves the model standing
                let completed = match reg.exact_completion(tt, &model) {
                    Ok(m) => m,
                    Err(e) => return failure(e),
                };
                let excluded = out
                    .constraints
                    .iter()
                    .any(|&c| holds(tt, c, &completed) == Some(false));
                if excluded || reg.get(id).cursor == before.0 {
                    break;
                }
            }
        }
        if config.fresh_symbols == FreshSymbolPolicy::SharedPerOp {
            for c in consistency_constraints(tt, reg, &model, &mut ackermann_done) {
                if let Err(e) = backend.assert_term(tt, c) {
                    return from_backend(e);
                }
                emitted += 1;
            }
        }
        if emitted == 0 {
            return if incomplete {
                Status::Unknown(UnknownReason::Incomplete)
            } else {
                failure("refinement round without new constraints")
            };
        }
    }
}

/// Functional consistency between applications of the same operation:
/// `x = x' ∧ y = y' ⇒ ap = ap'` for each pair the model shows inconsistent.
fn consistency_constraints(
    tt: &mut TermTable,
    reg: &Registry,
    model: &Model,
    done: &mut HashSet<(InstanceId, InstanceId)>,
) -> Vec<TermId> {
    // instances created in this round have no values yet
    let vals: Vec<Option<_>> = reg
        .iter()
        .map(|inst| {
            let ap = model.bv(inst.ap)?.clone();
            let x = eval_bv(tt, inst.x, model).ok()?;
            let y = eval_bv(tt, inst.y, model).ok()?;
            Some((x, y, ap))
        })
        .collect();
    let mut out = Vec::new();
    let insts: Vec<_> = reg.iter().cloned().collect();
    for (i, a) in insts.iter().enumerate() {
        for (j, b) in insts.iter().enumerate().skip(i + 1) {
            if a.op != b.op || a.width != b.width || done.contains(&(i, j)) {
                continue;
            }
            let (Some(va), Some(vb)) = (&vals[i], &vals[j]) else {
                continue;
            };
            if va.0 == vb.0 && va.1 == vb.1 && va.2 != vb.2 {
                let ex = tt.eq(a.x, b.x);
                let ey = tt.eq(a.y, b.y);
                let same_args = tt.and2(ex, ey);
                let same_res = tt.eq(a.ap, b.ap);
                out.push(tt.implies(same_args, same_res));
                done.insert((i, j));
            }
        }
    }
    out
}
