use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;
use lazybv::backend::BackendHandle;
use lazybv::ir::TermTable;
use lazybv::refine::{solve, Limits, Status, UnknownReason};
use lazybv::smtlib::{parse_script, print_term};

use crate::{read_file, BackendArgs, SchemeArgs};

#[derive(Args)]
pub struct SolveArgs {
    pub file: PathBuf,
    #[command(flatten)]
    pub backend: BackendArgs,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// Stop after this many refinement rounds.
    #[arg(long)]
    pub max_rounds: Option<u32>,
    /// Print round and per-instance statistics to stderr.
    #[arg(long)]
    pub stats: bool,
    /// Print the model after a sat verdict.
    #[arg(long)]
    pub model: bool,
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

pub fn run(a: &SolveArgs) -> ExitCode {
    let text = match read_file(&a.file) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let (config, kind) = match (a.scheme.config(), a.backend.kind()) {
        (Ok(c), Ok(k)) => (c, k),
        (Err(e), _) | (_, Err(e)) => return fail(e),
    };
    let mut tt = TermTable::new();
    let script = match parse_script(&mut tt, &text) {
        Ok(s) => s,
        Err(e) => return fail(format!("{}: {e}", a.file.display())),
    };
    let mut handle = match BackendHandle::new(&kind) {
        Ok(h) => h,
        Err(e) => {
            println!("unknown");
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let limits = Limits {
        timeout: a.backend.timeout(),
        max_rounds: a.max_rounds,
    };
    let r = solve(&mut tt, &script, &config, &mut handle, limits);
    println!("{}", r.status.name());
    if let (true, Status::Sat(m)) = (a.model, &r.status) {
        for &d in &script.declarations {
            if let Some(v) = m.get(d) {
                println!("(({} {}))", print_term(&tt, d), v.to_smtlib());
            }
        }
    }
    if a.stats {
        eprintln!("rounds {}", r.rounds);
        eprintln!("checks {}", r.checks);
        for (i, s) in r.instances.iter().enumerate() {
            let stages: Vec<&str> = s.stages.iter().map(|s| s.name()).collect();
            eprintln!(
                "instance {i} {} w={} depth={} steps={} rounds={} stages=[{}] hbs={:?}{}",
                s.op.name(),
                s.width,
                s.depth,
                s.steps,
                s.refinement_rounds,
                stages.join(","),
                s.hbs_indices,
                if s.exhausted { " exhausted" } else { "" }
            );
        }
    }
    match r.status {
        Status::Unknown(UnknownReason::BackendFailure(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Status::Unknown(reason) => {
            if a.stats {
                eprintln!("reason {reason:?}");
            }
            ExitCode::SUCCESS
        }
        _ => ExitCode::SUCCESS,
    }
}
