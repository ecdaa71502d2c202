//! Contribution and cost of scheme steps, solved/unsolved cross tables and
//! scatter data.
//!
//! With `S_N` the benchmarks solved by the variant using steps `1..N` (and
//! `S_0` the baseline), step `N` contributes `|S_N \ S_{N-1}|` and costs
//! `|S_{N-1} \ S_N|`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use super::record::EvalRecord;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error(
        "variant `{variant}` covers a different benchmark set ({missing} missing, {extra} extra)"
    )]
    BenchmarkSetMismatch {
        variant: String,
        missing: usize,
        extra: usize,
    },
    #[error("benchmark `{benchmark}` appears twice for variant `{variant}`")]
    DuplicateBenchmark { variant: String, benchmark: String },
    #[error("need a baseline and at least one variant")]
    EmptyLadder,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepMetrics {
    /// 1-based position in the ladder.
    pub step: usize,
    pub variant: String,
    pub solved: usize,
    pub contribution: usize,
    pub cost: usize,
}

/// Solved/unsolved counts of one variant against the baseline.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossTable {
    pub variant: String,
    pub both_solved: usize,
    pub baseline_only: usize,
    pub variant_only: usize,
    pub neither: usize,
}

impl CrossTable {
    pub fn total(&self) -> usize {
        self.both_solved + self.baseline_only + self.variant_only + self.neither
    }

    pub fn baseline_solved(&self) -> usize {
        self.both_solved + self.baseline_only
    }

    pub fn variant_solved(&self) -> usize {
        self.both_solved + self.variant_only
    }

    /// Rows are the variant, columns the baseline, with margins.
    pub fn render(&self, baseline: &str) -> String {
        let row = |s: &mut String, a: &str, b: &str, c: String, d: String, e: String| {
            let _ = writeln!(s, "{a:<12}{b:<10}{c:>10}{d:>10}{e:>10}");
        };
        let mut s = String::new();
        let _ = writeln!(s, "{:<22}{:^20}", "", baseline);
        row(
            &mut s,
            "",
            "",
            "unsolved".into(),
            "solved".into(),
            String::new(),
        );
        row(
            &mut s,
            &self.variant,
            "unsolved",
            self.neither.to_string(),
            self.baseline_only.to_string(),
            (self.neither + self.baseline_only).to_string(),
        );
        row(
            &mut s,
            "",
            "solved",
            self.variant_only.to_string(),
            self.both_solved.to_string(),
            self.variant_solved().to_string(),
        );
        row(
            &mut s,
            "",
            "",
            (self.variant_only + self.neither).to_string(),
            self.baseline_solved().to_string(),
            self.total().to_string(),
        );
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricsTable {
    pub baseline: String,
    pub benchmarks: usize,
    pub baseline_solved: usize,
    pub steps: Vec<StepMetrics>,
    pub cross: Vec<CrossTable>,
}

impl MetricsTable {
    /// `names[0]`/`sets[0]` is the baseline.
    pub fn from_sets(
        universe: &BTreeSet<String>,
        names: &[String],
        sets: &[BTreeSet<String>],
    ) -> Self {
        assert_eq!(names.len(), sets.len());
        assert!(!sets.is_empty());
        let base = &sets[0];
        let steps = (1..sets.len())
            .map(|n| StepMetrics {
                step: n,
                variant: names[n].clone(),
                solved: sets[n].len(),
                contribution: sets[n].difference(&sets[n - 1]).count(),
                cost: sets[n - 1].difference(&sets[n]).count(),
            })
            .collect();
        let cross = (1..sets.len())
            .map(|n| {
                let v = &sets[n];
                let both = v.intersection(base).count();
                CrossTable {
                    variant: names[n].clone(),
                    both_solved: both,
                    baseline_only: base.len() - both,
                    variant_only: v.len() - both,
                    neither: universe
                        .iter()
                        .filter(|b| !v.contains(*b) && !base.contains(*b))
                        .count(),
                }
            })
            .collect();
        MetricsTable {
            baseline: names[0].clone(),
            benchmarks: universe.len(),
            baseline_solved: base.len(),
            steps,
            cross,
        }
    }

    /// `ladder[0]` holds the baseline records, the rest one variant each in
    /// step order.
    pub fn from_records(ladder: &[Vec<EvalRecord>]) -> Result<Self, MetricsError> {
        if ladder.len() < 2 {
            return Err(MetricsError::EmptyLadder);
        }
        let mut names = Vec::new();
        let mut solved = Vec::new();
        let mut universe: Option<BTreeSet<String>> = None;
        for recs in ladder {
            let name = recs.first().map(|r| r.variant.clone()).unwrap_or_default();
            let mut seen = BTreeMap::new();
            for r in recs {
                if seen.insert(r.benchmark.clone(), r.status).is_some() {
                    return Err(MetricsError::DuplicateBenchmark {
                        variant: name,
                        benchmark: r.benchmark.clone(),
                    });
                }
            }
            let set: BTreeSet<String> = seen.keys().cloned().collect();
            match &universe {
                None => universe = Some(set),
                Some(u) if *u != set => {
                    return Err(MetricsError::BenchmarkSetMismatch {
                        variant: name,
                        missing: u.difference(&set).count(),
                        extra: set.difference(u).count(),
                    })
                }
                Some(_) => {}
            }
            solved.push(
                seen.into_iter()
                    .filter(|(_, s)| s.is_solved())
                    .map(|(b, _)| b)
                    .collect(),
            );
            names.push(name);
        }
        Ok(Self::from_sets(
            &universe.unwrap_or_default(),
            &names,
            &solved,
        ))
    }

    pub fn total_contribution(&self) -> usize {
        self.steps.iter().map(|s| s.contribution).sum()
    }

    pub fn total_cost(&self) -> usize {
        self.steps.iter().map(|s| s.cost).sum()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<10}{:<16}{:>8}{:>14}{:>8}",
            "step", "variant", "solved", "contribution", "cost"
        );
        let _ = writeln!(
            s,
            "{:<10}{:<16}{:>8}{:>14}{:>8}",
            "0", self.baseline, self.baseline_solved, "-", "-"
        );
        for st in &self.steps {
            let _ = writeln!(
                s,
                "{:<10}{:<16}{:>8}{:>14}{:>8}",
                format!("step {}", st.step),
                st.variant,
                st.solved,
                st.contribution,
                st.cost
            );
        }
        let _ = writeln!(
            s,
            "{:<10}{:<16}{:>8}{:>14}{:>8}",
            "sum",
            "",
            "",
            self.total_contribution(),
            self.total_cost()
        );
        for c in &self.cross {
            s.push('\n');
            s.push_str(&c.render(&self.baseline));
        }
        s
    }

    /// `step,variant,solved,contribution,cost`, baseline first.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("step,variant,solved,contribution,cost\n");
        let _ = writeln!(s, "0,{},{},,", self.baseline, self.baseline_solved);
        for st in &self.steps {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                st.step, st.variant, st.solved, st.contribution, st.cost
            );
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScatterPoint {
    pub benchmark: String,
    pub baseline_seconds: f64,
    pub variant_seconds: f64,
}

/// Pairs the runs of two variants by benchmark. Unsolved runs are placed
/// at `timeout`.
pub fn scatter(
    baseline: &[EvalRecord],
    variant: &[EvalRecord],
    timeout: f64,
) -> Result<Vec<ScatterPoint>, MetricsError> {
    let time = |r: &EvalRecord| {
        if r.status.is_solved() {
            r.cpu_seconds.min(timeout)
        } else {
            timeout
        }
    };
    let base: BTreeMap<&str, f64> = baseline
        .iter()
        .map(|r| (r.benchmark.as_str(), time(r)))
        .collect();
    let var: BTreeMap<&str, f64> = variant
        .iter()
        .map(|r| (r.benchmark.as_str(), time(r)))
        .collect();
    let bk: BTreeSet<&str> = base.keys().copied().collect();
    let vk: BTreeSet<&str> = var.keys().copied().collect();
    if bk != vk {
        return Err(MetricsError::BenchmarkSetMismatch {
            variant: variant
                .first()
                .map(|r| r.variant.clone())
                .unwrap_or_default(),
            missing: bk.difference(&vk).count(),
            extra: vk.difference(&bk).count(),
        });
    }
    Ok(base
        .into_iter()
        .map(|(b, t)| ScatterPoint {
            benchmark: b.to_string(),
            baseline_seconds: t,
            variant_seconds: var[b],
        })
        .collect())
}

/// Two tab-separated columns, baseline time then variant time.
pub fn scatter_tsv(points: &[ScatterPoint], baseline: &str, variant: &str) -> String {
    let mut s = format!("{baseline}\t{variant}\n");
    for p in points {
        let _ = writeln!(s, "{:.6}\t{:.6}", p.baseline_seconds, p.variant_seconds);
    }
    s
}
