//! Sorted, hash-consed term DAG for QF_BV with exact evaluation.

mod eval;
mod term;
mod value;

pub use eval::{apply_bv, eval, eval_bool, eval_bv, substitute, Model, PartialEval, Value};
pub use term::{Kind, Node, Sort, TermId, TermTable};
pub use value::BvValue;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IrError {
    #[error("sort mismatch: {0}")]
    SortMismatch(String),
    #[error("invalid attribute: {0}")]
    InvalidAttr(String),
    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),
}
