//! Per-run outcomes and their CSV form.

use std::io::{Read, Write};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::abstraction::SchemeConfig;
use crate::backend::{BackendHandle, BackendKind};
use crate::ir::TermTable;
use crate::refine::{solve, InstanceStats, Limits, Status, UnknownReason};
use crate::smtlib::parse_script;

pub const CSV_HEADER: &str = "benchmark,variant,status,cpu_seconds,rounds";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalStatus {
    Sat,
    Unsat,
    Unknown,
    Timeout,
    Error,
}

impl EvalStatus {
    /// A definite verdict.
    pub fn is_solved(self) -> bool {
        matches!(self, EvalStatus::Sat | EvalStatus::Unsat)
    }

    pub fn name(self) -> &'static str {
        match self {
            EvalStatus::Sat => "sat",
            EvalStatus::Unsat => "unsat",
            EvalStatus::Unknown => "unknown",
            EvalStatus::Timeout => "timeout",
            EvalStatus::Error => "error",
        }
    }

    pub fn of(status: &Status) -> Self {
        match status {
            Status::Sat(_) => EvalStatus::Sat,
            Status::Unsat => EvalStatus::Unsat,
            Status::Unknown(UnknownReason::Timeout) => EvalStatus::Timeout,
            Status::Unknown(UnknownReason::BackendFailure(_)) => EvalStatus::Error,
            Status::Unknown(_) => EvalStatus::Unknown,
        }
    }

    /// Reads `sat`/`unsat` as recorded by `(set-info :status …)`.
    pub fn from_info(s: &str) -> Option<Self> {
        match s {
            "sat" => Some(EvalStatus::Sat),
            "unsat" => Some(EvalStatus::Unsat),
            _ => None,
        }
    }
}

impl std::fmt::Display for EvalStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub benchmark: String,
    pub variant: String,
    pub status: EvalStatus,
    pub cpu_seconds: f64,
    pub rounds: u32,
    #[serde(skip)]
    pub stage_stats: Vec<InstanceStats>,
}

/// Parses and solves one benchmark. `clock` reads the CPU time of the
/// calling thread or process; parsing is not counted.
pub fn evaluate(
    benchmark: &str,
    variant: &str,
    text: &str,
    config: &SchemeConfig,
    backend: &BackendKind,
    timeout: Option<Duration>,
    clock: &dyn Fn() -> Duration,
) -> EvalRecord {
    let mut rec = EvalRecord {
        benchmark: benchmark.to_string(),
        variant: variant.to_string(),
        status: EvalStatus::Error,
        cpu_seconds: 0.0,
        rounds: 0,
        stage_stats: Vec::new(),
    };
    let mut tt = TermTable::new();
    let Ok(script) = parse_script(&mut tt, text) else {
        return rec;
    };
    let start = clock();
    let Ok(mut handle) = BackendHandle::new(backend) else {
        return rec;
    };
    let r = solve(
        &mut tt,
        &script,
        config,
        &mut handle,
        Limits {
            timeout,
            max_rounds: None,
        },
    );
    drop(handle);
    rec.cpu_seconds = clock().saturating_sub(start).as_secs_f64();
    rec.status = EvalStatus::of(&r.status);
    rec.rounds = r.rounds;
    rec.stage_stats = r.instances;
    rec
}

/// Streams records to CSV, flushing after every row so that an interrupted
/// run keeps what it finished.
pub struct RecordWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> RecordWriter<W> {
    pub fn new(w: W) -> Self {
        RecordWriter {
            inner: csv::WriterBuilder::new().has_headers(true).from_writer(w),
        }
    }

    pub fn write(&mut self, rec: &EvalRecord) -> Result<(), csv::Error> {
        self.inner.serialize(rec)?;
        self.inner.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> Result<W, csv::Error> {
        self.inner
            .into_inner()
            .map_err(|e| csv::Error::from(e.into_error()))
    }
}

pub fn write_records<W: Write>(w: W, records: &[EvalRecord]) -> Result<(), csv::Error> {
    let mut out = RecordWriter::new(w);
    for r in records {
        out.write(r)?;
    }
    if records.is_empty() {
        // header only
        out.inner.write_record(CSV_HEADER.split(','))?;
        out.inner.flush()?;
    }
    Ok(())
}

pub fn read_records<R: Read>(r: R) -> Result<Vec<EvalRecord>, csv::Error> {
    csv::Reader::from_reader(r).deserialize().collect()
}
