//! Lazy abstraction-refinement for quantifier-free bit-vector formulas.
//!
//! Expensive operations (`bvmul`, `bvudiv`, `bvsdiv`, `bvurem`, `bvsrem`)
//! are replaced by fresh symbols that are constrained step by step with
//! over-approximations. A refinement loop checks candidate models against
//! the exact semantics and strengthens only the applications a model gets
//! wrong.

pub mod abstraction;
pub mod backend;
pub mod harness;
pub mod ir;
pub mod refine;
pub mod smtlib;
