use std::collections::VecDeque;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::{mpsc, Arc, Mutex};
use std::time::Duration;

use anyhow::{bail, Context};
use clap::Args;
use lazybv::abstraction::{SchemeConfig, VARIANTS};
use lazybv::harness::{
    annotate, corpus_families, evaluate, read_records, reference_status, scatter_tsv, EvalRecord,
    EvalStatus, MetricsTable, RecordWriter,
};

use crate::cpu::process_cpu_time;
use crate::{read_file, BackendArgs};

#[derive(Args)]
pub struct BenchArgs {
    /// Directory searched recursively for .smt2 files.
    pub dir: PathBuf,
    /// Comma-separated variant names.
    #[arg(long, value_delimiter = ',', default_value = "baseline,full")]
    pub variants: Vec<String>,
    #[arg(long, short)]
    pub out: PathBuf,
    /// Parallel worker processes.
    #[arg(long, short, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub backend: BackendArgs,
}

#[derive(Args)]
pub struct WorkerArgs {
    #[command(flatten)]
    pub backend: BackendArgs,
}

#[derive(Args)]
pub struct MetricsArgs {
    /// Result CSVs; the baseline comes first unless --ladder says otherwise.
    #[arg(required = true)]
    pub csv: Vec<PathBuf>,
    /// Variant order, baseline first.
    #[arg(long, value_delimiter = ',')]
    pub ladder: Option<Vec<String>>,
    /// Also write the table as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ScatterArgs {
    #[arg(required = true)]
    pub csv: Vec<PathBuf>,
    #[arg(long, default_value = "baseline")]
    pub baseline: String,
    #[arg(long, default_value = "full")]
    pub variant: String,
    /// Time assigned to unsolved runs.
    #[arg(long, default_value_t = 1200.0)]
    pub timeout: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct GenCorpusArgs {
    pub dir: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Largest number of free bits decided by enumeration.
    #[arg(long, default_value_t = 24)]
    pub oracle_bits: u64,
    /// Budget per benchmark for the bit-blasting fallback, in seconds.
    #[arg(long, default_value_t = 60.0)]
    pub timeout: f64,
}

fn collect_smt2(dir: &Path, out: &mut Vec<PathBuf>) -> anyhow::Result<()> {
    for e in std::fs::read_dir(dir).with_context(|| dir.display().to_string())? {
        let p = e?.path();
        if p.is_dir() {
            collect_smt2(&p, out)?;
        } else if p.extension().is_some_and(|x| x == "smt2") {
            out.push(p);
        }
    }
    Ok(())
}

fn run_job(variant: &str, path: &Path, root: &Path, backend: &BackendArgs) -> EvalRecord {
    let name = path
        .strip_prefix(root)
        .unwrap_or(path)
        .display()
        .to_string();
    let err = |name: String| EvalRecord {
        benchmark: name,
        variant: variant.to_string(),
        status: EvalStatus::Error,
        cpu_seconds: 0.0,
        rounds: 0,
        stage_stats: Vec::new(),
    };
    let (Ok(text), Ok(config), Ok(kind)) = (
        read_file(&path.to_path_buf()),
        SchemeConfig::variant(variant),
        backend.kind(),
    ) else {
        return err(name);
    };
    evaluate(
        &name,
        variant,
        &text,
        &config,
        &kind,
        backend.timeout(),
        &process_cpu_time,
    )
}

/// Reads `variant<TAB>root<TAB>path` lines, answers one JSON record each.
pub fn worker(a: &WorkerArgs) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    for line in std::io::stdin().lock().lines() {
        let line = line?;
        let mut parts = line.splitn(3, '\t');
        let (Some(v), Some(root), Some(p)) = (parts.next(), parts.next(), parts.next()) else {
            bail!("malformed job `{line}`");
        };
        let rec = run_job(v, Path::new(p), Path::new(root), &a.backend);
        writeln!(out, "{}", serde_json::to_string(&rec)?)?;
        out.flush()?;
    }
    Ok(())
}

fn worker_command(b: &BackendArgs) -> anyhow::Result<Command> {
    let mut cmd = Command::new(std::env::current_exe()?);
    cmd.arg("bench-worker")
        .arg("--backend")
        .arg(&b.backend)
        .arg("--timeout")
        .arg(b.timeout.to_string());
    for x in &b.backend_args {
        cmd.arg(format!("--backend-arg={x}"));
    }
    Ok(cmd)
}

pub fn bench(a: &BenchArgs) -> anyhow::Result<()> {
    for v in &a.variants {
        if !VARIANTS.contains(&v.as_str()) {
            bail!("unknown variant `{v}` (known: {})", VARIANTS.join(", "));
        }
    }
    a.backend.kind()?;
    let mut files = Vec::new();
    collect_smt2(&a.dir, &mut files)?;
    files.sort();
    let jobs: VecDeque<(String, PathBuf)> = files
        .iter()
        .flat_map(|f| a.variants.iter().map(move |v| (v.clone(), f.clone())))
        .collect();
    let total = jobs.len();
    let mut writer = RecordWriter::new(BufWriter::new(File::create(&a.out)?));
    let mut records = Vec::with_capacity(total);

    if a.jobs <= 1 {
        for (v, f) in jobs {
            let r = run_job(&v, &f, &a.dir, &a.backend);
            writer.write(&r)?;
            records.push(r);
        }
    } else {
        let queue = Arc::new(Mutex::new(jobs));
        let (tx, rx) = mpsc::channel::<anyhow::Result<EvalRecord>>();
        let mut handles = Vec::new();
        for _ in 0..a.jobs.min(total.max(1)) {
            let queue = Arc::clone(&queue);
            let tx = tx.clone();
            let mut child = worker_command(&a.backend)?
                .stdin(Stdio::piped())
                .stdout(Stdio::piped())
                .spawn()?;
            let root = a.dir.clone();
            handles.push(std::thread::spawn(move || {
                let mut stdin = child.stdin.take().expect("piped");
                let mut stdout = BufReader::new(child.stdout.take().expect("piped"));
                loop {
                    let Some((v, f)) = queue.lock().expect("queue").pop_front() else {
                        break;
                    };
                    let res = (|| {
                        writeln!(stdin, "{v}\t{}\t{}", root.display(), f.display())?;
                        stdin.flush()?;
                        let mut line = String::new();
                        if stdout.read_line(&mut line)? == 0 {
                            bail!("worker exited");
                        }
                        Ok(serde_json::from_str::<EvalRecord>(&line)?)
                    })();
                    let failed = res.is_err();
                    let _ = tx.send(res);
                    if failed {
                        break;
                    }
                }
                drop(stdin);
                let _ = child.wait();
            }));
        }
        drop(tx);
        for r in rx {
            let r = r?;
            writer.write(&r)?;
            records.push(r);
        }
        for h in handles {
            let _ = h.join();
        }
    }
    drop(writer);
    if records.len() != total {
        bail!("{} of {total} runs finished", records.len());
    }
    // rewrite in a stable order
    let rank = |v: &str| a.variants.iter().position(|x| x == v);
    records.sort_by(|x, y| (&x.benchmark, rank(&x.variant)).cmp(&(&y.benchmark, rank(&y.variant))));
    lazybv::harness::write_records(BufWriter::new(File::create(&a.out)?), &records)?;
    let solved = |v: &str| {
        records
            .iter()
            .filter(|r| r.variant == v && r.status.is_solved())
            .count()
    };
    for v in &a.variants {
        eprintln!("{v}: {}/{} solved", solved(v), files.len());
    }
    Ok(())
}

fn load(paths: &[PathBuf]) -> anyhow::Result<Vec<EvalRecord>> {
    let mut all = Vec::new();
    for p in paths {
        all.extend(read_records(
            File::open(p).with_context(|| p.display().to_string())?,
        )?);
    }
    Ok(all)
}

fn by_variant(records: &[EvalRecord], order: &[String]) -> Vec<Vec<EvalRecord>> {
    order
        .iter()
        .map(|v| {
            records
                .iter()
                .filter(|r| &r.variant == v)
                .cloned()
                .collect()
        })
        .collect()
}

pub fn metrics(a: &MetricsArgs) -> anyhow::Result<()> {
    let records = load(&a.csv)?;
    let order = match &a.ladder {
        Some(l) => l.clone(),
        None => {
            let mut o: Vec<String> = Vec::new();
            for r in &records {
                if !o.contains(&r.variant) {
                    o.push(r.variant.clone());
                }
            }
            o
        }
    };
    let ladder = by_variant(&records, &order);
    if let Some((v, _)) = order.iter().zip(&ladder).find(|(_, l)| l.is_empty()) {
        bail!("no records for variant `{v}`");
    }
    let t = MetricsTable::from_records(&ladder)?;
    print!("{}", t.render());
    if let Some(p) = &a.out {
        std::fs::write(p, t.to_csv())?;
    }
    Ok(())
}

pub fn scatter(a: &ScatterArgs) -> anyhow::Result<()> {
    let records = load(&a.csv)?;
    let sel = by_variant(&records, &[a.baseline.clone(), a.variant.clone()]);
    let pts = lazybv::harness::scatter(&sel[0], &sel[1], a.timeout)?;
    let tsv = scatter_tsv(&pts, &a.baseline, &a.variant);
    match &a.out {
        Some(p) => std::fs::write(p, tsv)?,
        None => print!("{tsv}"),
    }
    Ok(())
}

pub fn gen_corpus(a: &GenCorpusArgs) -> anyhow::Result<()> {
    let timeout = Duration::from_secs_f64(a.timeout);
    let mut kept = 0;
    let mut skipped = 0;
    for b in corpus_families(a.seed) {
        let Some((status, prov)) = reference_status(&b.text, a.oracle_bits, timeout) else {
            eprintln!("skipping {}: no reference verdict", b.name);
            skipped += 1;
            continue;
        };
        let dir = a.dir.join(b.family);
        std::fs::create_dir_all(&dir)?;
        std::fs::write(
            dir.join(format!("{}.smt2", b.name)),
            annotate(&b.text, status, prov),
        )?;
        kept += 1;
    }
    eprintln!("wrote {kept} benchmarks, skipped {skipped}");
    Ok(())
}
