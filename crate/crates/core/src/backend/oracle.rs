use std::time::Instant;

use super::{Backend, BackendError, CheckResult, UnknownReason};
use crate::ir::{BvValue, Model, PartialEval, Sort, TermId, TermTable, Value};

pub(crate) const DEFAULT_MAX_BITS: u64 = 24;

/// Reference backend: enumerates assignments of all free symbols, pruning a
/// branch as soon as partial evaluation shows some assertion false. Exact,
/// and only usable on formulas with few free bits.
pub struct OracleBackend {
    max_bits: u64,
    asserted: Vec<TermId>,
    declared: Vec<TermId>,
    model: Option<Model>,
}

impl OracleBackend {
    pub fn new(max_bits: u64) -> Self {
        OracleBackend {
            max_bits,
            asserted: Vec::new(),
            declared: Vec::new(),
            model: None,
        }
    }

    fn add_symbol(&mut self, s: TermId) {
        if !self.declared.contains(&s) {
            self.declared.push(s);
        }
    }
}

fn domain(sort: Sort) -> Box<dyn Iterator<Item = Value>> {
    match sort {
        Sort::Bool => Box::new([false, true].into_iter().map(Value::Bool)),
        Sort::BitVec(w) => {
            assert!(w < 64, "enumeration width");
            Box::new((0..1u64 << w).map(move |v| Value::Bv(BvValue::new(w, v))))
        }
    }
}

enum Verdict {
    AllTrue,
    SomeFalse,
    Open,
}

struct Search<'a> {
    tt: &'a TermTable,
    roots: &'a [TermId],
    order: &'a [TermId],
    deadline: Option<Instant>,
    nodes: u64,
}

impl Search<'_> {
    fn verdict(&self, m: &Model) -> Verdict {
        let mut pe = PartialEval::new(|s| m.get(s).cloned());
        let mut open = false;
        for &r in self.roots {
            match pe.eval(self.tt, r) {
                Some(Value::Bool(false)) => return Verdict::SomeFalse,
                Some(_) => {}
                None => open = true,
            }
        }
        if open {
            Verdict::Open
        } else {
            Verdict::AllTrue
        }
    }

    /// `Err(())` on timeout.
    fn run(&mut self, m: &mut Model, depth: usize) -> Result<bool, ()> {
        self.nodes += 1;
        if self.nodes.is_multiple_of(1024) && self.deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(());
        }
        match self.verdict(m) {
            Verdict::SomeFalse => return Ok(false),
            Verdict::AllTrue => return Ok(true),
            Verdict::Open => {}
        }
        let Some(&s) = self.order.get(depth) else {
            return Ok(false);
        };
        for v in domain(self.tt.sort(s)) {
            m.insert(s, v);
            if self.run(m, depth + 1)? {
                return Ok(true);
            }
        }
        m.remove(s);
        Ok(false)
    }
}

impl Backend for OracleBackend {
    fn declare(&mut self, _tt: &TermTable, sym: TermId) -> Result<(), BackendError> {
        self.add_symbol(sym);
        Ok(())
    }

    fn assert_term(&mut self, tt: &TermTable, t: TermId) -> Result<(), BackendError> {
        self.asserted.push(t);
        for s in tt.free_symbols(&[t]) {
            self.add_symbol(s);
        }
        Ok(())
    }

    fn check_sat(
        &mut self,
        tt: &TermTable,
        deadline: Option<Instant>,
    ) -> Result<CheckResult, BackendError> {
        self.model = None;
        // symbols in order of first appearance in the assertions
        let mut order = tt.free_symbols(&self.asserted);
        let bits: u64 = order
            .iter()
            .map(|&s| tt.sort(s).width().map_or(1, u64::from))
            .sum();
        if bits > self.max_bits {
            return Err(BackendError::OracleCapacityExceeded {
                bits,
                limit: self.max_bits,
            });
        }
        let mut search = Search {
            tt,
            roots: &self.asserted,
            order: &order,
            deadline,
            nodes: 0,
        };
        let mut m = Model::new();
        match search.run(&mut m, 0) {
            Err(()) => Ok(CheckResult::Unknown(UnknownReason::Timeout)),
            Ok(false) => Ok(CheckResult::Unsat),
            Ok(true) => {
                // unconstrained symbols take zero
                order.extend(self.declared.iter().copied());
                for s in order {
                    if !m.contains(s) {
                        let v = match tt.sort(s) {
                            Sort::Bool => Value::Bool(false),
                            Sort::BitVec(w) => Value::Bv(BvValue::zero(w)),
                        };
                        m.insert(s, v);
                    }
                }
                self.model = Some(m);
                Ok(CheckResult::Sat)
            }
        }
    }

    fn get_value(&mut self, tt: &TermTable, syms: &[TermId]) -> Result<Model, BackendError> {
        let model = self.model.as_ref().ok_or(BackendError::NotSat)?;
        let mut out = Model::new();
        for &s in syms {
            match model.get(s) {
                Some(v) => out.insert(s, v.clone()),
                None if self.declared.contains(&s) => {
                    // declared after the last check; unconstrained
                    let v = match tt.sort(s) {
                        Sort::Bool => Value::Bool(false),
                        Sort::BitVec(w) => Value::Bv(BvValue::zero(w)),
                    };
                    out.insert(s, v);
                }
                None => {
                    let name = tt.symbol_name(s).unwrap_or("?").to_string();
                    return Err(BackendError::Undeclared(name));
                }
            }
        }
        Ok(out)
    }
}
