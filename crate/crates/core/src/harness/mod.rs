//! Evaluation harness: run records, contribution/cost metrics and the
//! benchmark generators.

mod generate;
mod metrics;
mod record;

pub use generate::{
    annotate, corpus_families, reference_status, render, Benchmark, FormulaGen, GenConfig,
    Provenance,
};
pub use metrics::{
    scatter, scatter_tsv, CrossTable, MetricsError, MetricsTable, ScatterPoint, StepMetrics,
};
pub use record::{
    evaluate, read_records, write_records, EvalRecord, EvalStatus, RecordWriter, CSV_HEADER,
};
