//! `lazybv`: solve SMT-LIB files with the abstraction-refinement engine and
//! run the evaluation harness.

mod bench;
mod cpu;
mod server;
mod solve;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lazybv::abstraction::{FreshSymbolPolicy, SchemeConfig, SignedMode, Stage};
use lazybv::backend::BackendKind;
use lazybv::refine::DEFAULT_TIMEOUT_SECS;

#[derive(Parser)]
#[command(
    name = "lazybv",
    version,
    about = "Lazy abstraction-refinement for QF_BV"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide one SMT-LIB file.
    Solve(solve::SolveArgs),
    /// Run every benchmark of a directory under several variants.
    Bench(bench::BenchArgs),
    /// Contribution/cost table of a variant ladder.
    Metrics(bench::MetricsArgs),
    /// Baseline-vs-variant times as two TSV columns.
    Scatter(bench::ScatterArgs),
    /// Write the bundled benchmark families with reference statuses.
    GenCorpus(bench::GenCorpusArgs),
    #[command(hide = true)]
    BenchWorker(bench::WorkerArgs),
    /// Plain bit-blasting solver speaking SMT-LIB on stdin/stdout.
    #[command(hide = true)]
    Smt2,
}

#[derive(Args, Clone, Debug)]
pub struct BackendArgs {
    /// builtin, oracle[:<max bits>], or external:<path>
    #[arg(long, default_value = "builtin")]
    pub backend: String,
    /// Extra argument for an external backend (repeatable).
    #[arg(long = "backend-arg", allow_hyphen_values = true)]
    pub backend_args: Vec<String>,
    /// Wall-clock budget in seconds; 0 disables it.
    #[arg(long, default_value_t = DEFAULT_TIMEOUT_SECS as f64)]
    pub timeout: f64,
}

impl BackendArgs {
    pub fn kind(&self) -> anyhow::Result<BackendKind> {
        parse_backend(&self.backend, &self.backend_args)
    }

    pub fn timeout(&self) -> Option<std::time::Duration> {
        (self.timeout > 0.0).then(|| std::time::Duration::from_secs_f64(self.timeout))
    }
}

pub fn parse_backend(spec: &str, args: &[String]) -> anyhow::Result<BackendKind> {
    Ok(match spec.split_once(':') {
        None if spec == "builtin" => BackendKind::Builtin,
        None if spec == "oracle" => BackendKind::oracle(),
        Some(("oracle", bits)) => BackendKind::Oracle {
            max_bits: bits.parse()?,
        },
        Some(("external", path)) if !path.is_empty() => BackendKind::External {
            program: path.into(),
            args: args.to_vec(),
        },
        _ => anyhow::bail!("unknown backend `{spec}`"),
    })
}

#[derive(Args, Clone, Debug, Default)]
pub struct SchemeArgs {
    /// Named variant: baseline, step1, step1-2, step1-3, full, omit2, merge23.
    #[arg(long, default_value = "full")]
    pub variant: String,
    /// Multiplication steps in order, e.g. simple,intervals,relations,full-mul.
    #[arg(long, value_delimiter = ',')]
    pub stages: Option<Vec<Stage>>,
    /// Drop the n-th multiplication step (1-based).
    #[arg(long)]
    pub omit_stage: Option<usize>,
    /// Merge two adjacent multiplication steps, e.g. 2,3.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub merge_stages: Option<Vec<usize>>,
    /// per-app or shared
    #[arg(long, default_value = "per-app")]
    pub fresh_symbols: String,
    /// signed or rewrite-unsigned
    #[arg(long, default_value = "signed")]
    pub signed_mode: String,
}

impl SchemeArgs {
    pub fn config(&self) -> anyhow::Result<SchemeConfig> {
        let mut c = SchemeConfig::variant(&self.variant)?;
        if let Some(st) = &self.stages {
            c = c.with_stages(st)?;
        }
        if let Some(n) = self.omit_stage {
            c = c.omit_step(n)?;
        }
        if let Some(m) = &self.merge_stages {
            let [a, b] = m.as_slice() else {
                anyhow::bail!("--merge-stages takes two step numbers")
            };
            c = c.merge_steps(*a, *b)?;
        }
        c.fresh_symbols = match self.fresh_symbols.as_str() {
            "per-app" => FreshSymbolPolicy::PerApplication,
            "shared" => FreshSymbolPolicy::SharedPerOp,
            s => anyhow::bail!("unknown fresh-symbol policy `{s}`"),
        };
        c.signed_mode = match self.signed_mode.as_str() {
            "signed" => SignedMode::Signed,
            "rewrite-unsigned" => SignedMode::RewriteUnsigned,
            s => anyhow::bail!("unknown signed mode `{s}`"),
        };
        Ok(c)
    }
}

pub fn read_file(p: &PathBuf) -> anyhow::Result<String> {
    std::fs::read_to_string(p).map_err(|e| anyhow::anyhow!("{}: {e}", p.display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let res = match cli.cmd {
        Cmd::Solve(a) => return solve::run(&a),
        Cmd::Bench(a) => bench::bench(&a),
        Cmd::Metrics(a) => bench::metrics(&a),
        Cmd::Scatter(a) => bench::scatter(&a),
        Cmd::GenCorpus(a) => bench::gen_corpus(&a),
        Cmd::BenchWorker(a) => bench::worker(&a),
        Cmd::Smt2 => server::run(),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
