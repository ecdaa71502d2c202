use lazybv::abstraction::{OpKind, SchemeConfig};
use lazybv::backend::{Backend, BackendHandle, BackendKind, CheckResult, OracleBackend};
use lazybv::harness::{FormulaGen, GenConfig};
use lazybv::ir::{eval_bool, TermTable};
use lazybv::refine::{solve, Limits, SolveResult, Status};
use lazybv::smtlib::parse_script;

fn oracle_verdict(text: &str) -> bool {
    let mut tt = TermTable::new();
    let s = parse_script(&mut tt, text).unwrap();
    let mut o = OracleBackend::new(64);
    for &d in &s.declarations {
        o.declare(&tt, d).unwrap();
    }
    for &a in &s.assertions {
        o.assert_term(&tt, a).unwrap();
    }
    match o.check_sat(&tt, None).unwrap() {
        CheckResult::Sat => true,
        CheckResult::Unsat => false,
        CheckResult::Unknown(u) => panic!("oracle unknown {u:?}: {text}"),
    }
}

fn lazy(text: &str, config: &SchemeConfig) -> SolveResult {
    let mut tt = TermTable::new();
    let s = parse_script(&mut tt, text).unwrap();
    let mut b = BackendHandle::new(&BackendKind::Builtin).unwrap();
    let r = solve(&mut tt, &s, config, &mut b, Limits::default());
    if let Status::Sat(m) = &r.status {
        for &a in &s.assertions {
            assert!(
                eval_bool(&tt, a, m).unwrap(),
                "model fails an assertion of\n{text}"
            );
        }
    }
    r
}

fn check_bounds(r: &SolveResult, config: &SchemeConfig, text: &str) {
    for i in &r.instances {
        let stages = config.steps(i.op).len() as u32;
        assert!(i.refinement_rounds <= stages - 1 + i.width, "{i:?}\n{text}");
        if i.op == OpKind::Mul {
            assert!(i.full_interval_refinements <= i.width, "{i:?}\n{text}");
        }
    }
}

#[test]
fn default_scheme_matches_oracle_on_generated_formulas() {
    let config = SchemeConfig::default();
    let mut gen = FormulaGen::new(2024, GenConfig::default());
    let (mut sat, mut unsat, mut instances) = (0, 0, 0);
    for _ in 0..600 {
        let text = gen.script();
        let expected = oracle_verdict(&text);
        let r = lazy(&text, &config);
        match (&r.status, expected) {
            (Status::Sat(_), true) => sat += 1,
            (Status::Unsat, false) => unsat += 1,
            (s, e) => panic!("got {s:?}, oracle says sat={e}\n{text}"),
        }
        check_bounds(&r, &config, &text);
        instances += r.instances.len();
    }
    assert!(sat >= 100 && unsat >= 100, "{sat} sat, {unsat} unsat");
    assert!(instances >= 600);
}

#[test]
fn experiment_variants_match_oracle_on_generated_formulas() {
    let mut gen = FormulaGen::new(77, GenConfig::default());
    let configs: Vec<SchemeConfig> = ["omit2", "merge23"]
        .iter()
        .map(|v| SchemeConfig::variant(v).unwrap())
        .collect();
    for _ in 0..200 {
        let text = gen.script();
        let expected = oracle_verdict(&text);
        for c in &configs {
            let r = lazy(&text, c);
            assert_eq!(
                r.status.name(),
                if expected { "sat" } else { "unsat" },
                "{text}"
            );
            check_bounds(&r, c, &text);
        }
    }
}
