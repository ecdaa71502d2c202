use std::collections::HashSet;
use std::time::Instant;

use super::bitblast::BitBlaster;
use super::cnf::CnfFormula;
use super::sat::{Budget, SatResult, SatSolver, SatStats};
use super::{Backend, BackendError, CheckResult, UnknownReason};
use crate::ir::{Model, Sort, TermId, TermTable, Value};

/// In-process backend: bit-blasts each assertion into one incremental SAT
/// solver instance.
pub struct BuiltinBackend {
    bb: BitBlaster,
    declared: HashSet<TermId>,
}

impl Default for BuiltinBackend {
    fn default() -> Self {
        Self::new()
    }
}

impl BuiltinBackend {
    pub fn new() -> Self {
        BuiltinBackend {
            bb: BitBlaster::default(),
            declared: HashSet::new(),
        }
    }

    /// Like [`BuiltinBackend::new`] but keeps every clause for a DIMACS dump.
    pub fn recording() -> Self {
        BuiltinBackend {
            bb: BitBlaster::new(SatSolver::new()).with_recording(),
            declared: HashSet::new(),
        }
    }

    pub fn cnf(&self) -> Option<&CnfFormula> {
        self.bb.recorded()
    }

    pub fn sat_stats(&mut self) -> SatStats {
        self.bb.solver().stats()
    }
}

impl Backend for BuiltinBackend {
    fn declare(&mut self, tt: &TermTable, sym: TermId) -> Result<(), BackendError> {
        self.bb.blast(tt, sym);
        self.declared.insert(sym);
        Ok(())
    }

    fn assert_term(&mut self, tt: &TermTable, t: TermId) -> Result<(), BackendError> {
        self.bb.assert_term(tt, t);
        self.declared.extend(tt.free_symbols(&[t]));
        Ok(())
    }

    fn check_sat(
        &mut self,
        _tt: &TermTable,
        deadline: Option<Instant>,
    ) -> Result<CheckResult, BackendError> {
        if self.bb.is_inconsistent() {
            return Ok(CheckResult::Unsat);
        }
        Ok(
            match self.bb.solver().solve(Budget {
                deadline,
                max_conflicts: None,
            }) {
                SatResult::Sat => CheckResult::Sat,
                SatResult::Unsat => CheckResult::Unsat,
                SatResult::Unknown => CheckResult::Unknown(UnknownReason::Timeout),
            },
        )
    }

    fn get_value(&mut self, tt: &TermTable, syms: &[TermId]) -> Result<Model, BackendError> {
        let mut m = Model::new();
        for &s in syms {
            if !self.declared.contains(&s) {
                let name = tt
                    .symbol_name(s)
                    .map(str::to_string)
                    .unwrap_or_else(|| format!("{s:?}"));
                return Err(BackendError::Undeclared(name));
            }
            let v = match tt.sort(s) {
                Sort::Bool => Value::Bool(self.bb.bool_model_value(s).expect("blasted")),
                Sort::BitVec(_) => Value::Bv(self.bb.bv_model_value(s).expect("blasted")),
            };
            m.insert(s, v);
        }
        Ok(m)
    }
}
