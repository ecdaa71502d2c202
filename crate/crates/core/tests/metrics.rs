use std::collections::BTreeSet;

use lazybv::harness::{
    read_records, scatter, scatter_tsv, write_records, CrossTable, EvalRecord, EvalStatus,
    MetricsError, MetricsTable, CSV_HEADER,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rec(b: &str, v: &str, status: EvalStatus, secs: f64) -> EvalRecord {
    EvalRecord {
        benchmark: b.into(),
        variant: v.into(),
        status,
        cpu_seconds: secs,
        rounds: 0,
        stage_stats: Vec::new(),
    }
}

fn random_status(rng: &mut ChaCha8Rng) -> EvalStatus {
    match rng.gen_range(0..6) {
        0 | 1 => EvalStatus::Sat,
        2 | 3 => EvalStatus::Unsat,
        4 => EvalStatus::Timeout,
        _ => EvalStatus::Unknown,
    }
}

#[test]
fn telescoping_and_cross_tables_on_random_ladders() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..1000 {
        let n = rng.gen_range(0..60);
        let k = rng.gen_range(1..6);
        let names: Vec<String> = (0..n).map(|i| format!("b{i}")).collect();
        let mut ladder: Vec<Vec<EvalRecord>> = (0..=k)
            .map(|v| {
                names
                    .iter()
                    .map(|b| {
                        rec(
                            b,
                            &format!("v{v}"),
                            random_status(&mut rng),
                            rng.gen_range(0.0..10.0),
                        )
                    })
                    .collect()
            })
            .collect();
        if n == 0 {
            // empty variants carry no name; give each one a placeholder run
            for (v, l) in ladder.iter_mut().enumerate() {
                l.push(rec("only", &format!("v{v}"), EvalStatus::Error, 0.0));
            }
        }
        let t = MetricsTable::from_records(&ladder).unwrap();
        let solved: Vec<usize> = ladder
            .iter()
            .map(|l| l.iter().filter(|r| r.status.is_solved()).count())
            .collect();
        let delta: i64 = t
            .steps
            .iter()
            .map(|s| s.contribution as i64 - s.cost as i64)
            .sum();
        assert_eq!(delta, solved[k] as i64 - solved[0] as i64);
        assert_eq!(t.steps.len(), k);
        for (i, s) in t.steps.iter().enumerate() {
            assert_eq!(s.solved, solved[i + 1]);
            assert_eq!(s.step, i + 1);
            // per step as well
            assert_eq!(
                s.contribution as i64 - s.cost as i64,
                solved[i + 1] as i64 - solved[i] as i64
            );
        }
        for c in &t.cross {
            assert_eq!(c.total(), t.benchmarks);
            assert_eq!(c.baseline_solved(), solved[0]);
        }
        assert_eq!(t.benchmarks, n.max(1));
    }
}

fn set(xs: &[&str]) -> BTreeSet<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

#[test]
fn single_step_that_trades_one_benchmark() {
    let u = set(&["a", "b", "c"]);
    let names = vec!["s1".to_string(), "s2".to_string()];
    let t = MetricsTable::from_sets(&u, &names, &[set(&["a", "b"]), set(&["b", "c"])]);
    assert_eq!(t.steps[0].contribution, 1);
    assert_eq!(t.steps[0].cost, 1);
    assert_eq!(t.total_contribution() as i64 - t.total_cost() as i64, 0);
}

#[test]
fn cross_table_layout_with_margins() {
    let c = CrossTable {
        variant: "lazy".into(),
        both_solved: 5904,
        baseline_only: 28,
        variant_only: 39,
        neither: 113,
    };
    assert_eq!(c.total(), 6084);
    assert_eq!(c.baseline_solved(), 5932);
    assert_eq!(c.variant_solved(), 5943);
    let text = c.render("plain");
    let rows: Vec<Vec<&str>> = text
        .lines()
        .map(|l| l.split_whitespace().collect())
        .collect();
    assert_eq!(rows[0], ["plain"]);
    assert_eq!(rows[1], ["unsolved", "solved"]);
    assert_eq!(rows[2], ["lazy", "unsolved", "113", "28", "141"]);
    assert_eq!(rows[3], ["solved", "39", "5904", "5943"]);
    assert_eq!(rows[4], ["152", "5932", "6084"]);
}

#[test]
fn mismatched_benchmark_sets_are_rejected() {
    let base = vec![
        rec("a", "baseline", EvalStatus::Sat, 1.0),
        rec("b", "baseline", EvalStatus::Sat, 1.0),
    ];
    let var = vec![
        rec("a", "full", EvalStatus::Sat, 1.0),
        rec("c", "full", EvalStatus::Unsat, 1.0),
    ];
    assert_eq!(
        MetricsTable::from_records(&[base.clone(), var.clone()]),
        Err(MetricsError::BenchmarkSetMismatch {
            variant: "full".into(),
            missing: 1,
            extra: 1
        })
    );
    assert!(matches!(
        scatter(&base, &var, 10.0),
        Err(MetricsError::BenchmarkSetMismatch { .. })
    ));
    let dup = vec![
        rec("a", "full", EvalStatus::Sat, 1.0),
        rec("a", "full", EvalStatus::Sat, 2.0),
    ];
    assert!(matches!(
        MetricsTable::from_records(&[base.clone(), dup]),
        Err(MetricsError::DuplicateBenchmark { .. })
    ));
    assert_eq!(
        MetricsTable::from_records(&[base]),
        Err(MetricsError::EmptyLadder)
    );
}

#[test]
fn records_round_trip_through_csv() {
    let recs = vec![
        rec("opeq/mul_w4.smt2", "baseline", EvalStatus::Unsat, 0.25),
        rec("opeq/mul_w4.smt2", "full", EvalStatus::Timeout, 1200.0),
        rec("x,y.smt2", "step1", EvalStatus::Error, 0.0),
    ];
    let mut buf = Vec::new();
    write_records(&mut buf, &recs).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    assert_eq!(CSV_HEADER, "benchmark,variant,status,cpu_seconds,rounds");
    assert!(text.contains(",timeout,"));
    assert_eq!(read_records(buf.as_slice()).unwrap(), recs);
    // no header, no rows
    let mut empty = Vec::new();
    write_records(&mut empty, &[]).unwrap();
    assert!(read_records(empty.as_slice()).unwrap().is_empty());
}

#[test]
fn scatter_places_unsolved_runs_at_the_timeout() {
    let base = vec![
        rec("a", "baseline", EvalStatus::Sat, 3.0),
        rec("b", "baseline", EvalStatus::Timeout, 99.0),
    ];
    let var = vec![
        rec("b", "full", EvalStatus::Unsat, 0.5),
        rec("a", "full", EvalStatus::Error, 0.1),
    ];
    let pts = scatter(&base, &var, 60.0).unwrap();
    assert_eq!(pts.len(), 2);
    assert_eq!(
        (
            pts[0].benchmark.as_str(),
            pts[0].baseline_seconds,
            pts[0].variant_seconds
        ),
        ("a", 3.0, 60.0)
    );
    assert_eq!(
        (pts[1].baseline_seconds, pts[1].variant_seconds),
        (60.0, 0.5)
    );
    let tsv = scatter_tsv(&pts, "baseline", "full");
    assert_eq!(
        tsv.lines().collect::<Vec<_>>(),
        [
            "baseline\tfull",
            "3.000000\t60.000000",
            "60.000000\t0.500000"
        ]
    );
}
