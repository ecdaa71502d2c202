//! Decision procedures for the abstracted formulas.
//!
//! Three interchangeable implementations sit behind [`Backend`]: the
//! in-process bit-blaster with its CDCL solver, a brute-force enumerator used
//! as a reference, and a client for any SMT-LIB 2 solver speaking over pipes.

pub mod bitblast;
mod builtin;
pub mod cnf;
mod external;
mod oracle;
pub mod sat;

use std::time::Instant;

pub use builtin::BuiltinBackend;
pub use external::ExternalBackend;
pub use oracle::OracleBackend;

use crate::ir::{Model, TermId, TermTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnknownReason {
    Timeout,
    /// The solver answered `unknown` or gave up for another reason.
    Incomplete,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckResult {
    Sat,
    Unsat,
    Unknown(UnknownReason),
}

#[derive(Debug, thiserror::Error)]
pub enum BackendError {
    #[error("solver protocol error: {0}")]
    Protocol(String),
    #[error("model requested but the last check was not sat")]
    NotSat,
    #[error("value requested for undeclared symbol `{0}`")]
    Undeclared(String),
    #[error("enumeration needs {bits} free bits, limit is {limit}")]
    OracleCapacityExceeded { bits: u64, limit: u64 },
    #[error("solver process: {0}")]
    Io(#[from] std::io::Error),
}

/// Incremental interface: assertions only accumulate.
pub trait Backend {
    /// Makes a symbol known to the solver. Declaring twice is harmless.
    fn declare(&mut self, tt: &TermTable, sym: TermId) -> Result<(), BackendError>;
    /// Adds a Boolean term. Free symbols are declared implicitly.
    fn assert_term(&mut self, tt: &TermTable, t: TermId) -> Result<(), BackendError>;
    fn check_sat(
        &mut self,
        tt: &TermTable,
        deadline: Option<Instant>,
    ) -> Result<CheckResult, BackendError>;
    /// Values of declared symbols in the model of the last sat answer.
    fn get_value(&mut self, tt: &TermTable, syms: &[TermId]) -> Result<Model, BackendError>;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BackendKind {
    Builtin,
    Oracle { max_bits: u64 },
    External { program: String, args: Vec<String> },
}

impl BackendKind {
    pub fn oracle() -> Self {
        BackendKind::Oracle {
            max_bits: oracle::DEFAULT_MAX_BITS,
        }
    }

    pub fn create(&self) -> Result<Box<dyn Backend>, BackendError> {
        Ok(match self {
            BackendKind::Builtin => Box::new(BuiltinBackend::new()),
            BackendKind::Oracle { max_bits } => Box::new(OracleBackend::new(*max_bits)),
            BackendKind::External { program, args } => {
                Box::new(ExternalBackend::spawn(program, args)?)
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HandleState {
    Idle,
    SatKnown,
    UnsatKnown,
}

/// A backend together with the assertions it has received and what is known
/// about their conjunction. Unsatisfiability is monotone, so once a check
/// answers unsat every later check does too without consulting the backend.
pub struct BackendHandle {
    inner: Box<dyn Backend>,
    asserted: Vec<TermId>,
    state: HandleState,
    checks: u64,
}

impl BackendHandle {
    pub fn new(kind: &BackendKind) -> Result<Self, BackendError> {
        Ok(Self::from_backend(kind.create()?))
    }

    pub fn from_backend(inner: Box<dyn Backend>) -> Self {
        BackendHandle {
            inner,
            asserted: Vec::new(),
            state: HandleState::Idle,
            checks: 0,
        }
    }

    pub fn state(&self) -> HandleState {
        self.state
    }

    pub fn asserted(&self) -> &[TermId] {
        &self.asserted
    }

    /// Number of checks forwarded to the backend.
    pub fn checks(&self) -> u64 {
        self.checks
    }

    pub fn declare(&mut self, tt: &TermTable, sym: TermId) -> Result<(), BackendError> {
        self.inner.declare(tt, sym)
    }

    pub fn assert_term(&mut self, tt: &TermTable, t: TermId) -> Result<(), BackendError> {
        if self.state == HandleState::SatKnown {
            self.state = HandleState::Idle;
        }
        self.asserted.push(t);
        self.inner.assert_term(tt, t)
    }

    pub fn check_sat(
        &mut self,
        tt: &TermTable,
        deadline: Option<Instant>,
    ) -> Result<CheckResult, BackendError> {
        if self.state == HandleState::UnsatKnown {
            return Ok(CheckResult::Unsat);
        }
        self.checks += 1;
        let r = self.inner.check_sat(tt, deadline)?;
        self.state = match r {
            CheckResult::Sat => HandleState::SatKnown,
            CheckResult::Unsat => HandleState::UnsatKnown,
            CheckResult::Unknown(_) => HandleState::Idle,
        };
        Ok(r)
    }

    pub fn get_value(&mut self, tt: &TermTable, syms: &[TermId]) -> Result<Model, BackendError> {
        if self.state != HandleState::SatKnown {
            return Err(BackendError::NotSat);
        }
        self.inner.get_value(tt, syms)
    }
}
