use lazybv::abstraction::{OpKind, SchemeConfig, Stage};
use lazybv::backend::{BackendHandle, BackendKind};
use lazybv::ir::{eval_bool, TermTable};
use lazybv::refine::{solve, Limits, SolveResult, Status};
use lazybv::smtlib::parse_script;

fn run(text: &str, config: &SchemeConfig, kind: &BackendKind) -> SolveResult {
    let mut tt = TermTable::new();
    let script = parse_script(&mut tt, text).unwrap();
    let mut backend = BackendHandle::new(kind).unwrap();
    let r = solve(&mut tt, &script, config, &mut backend, Limits::default());
    if let Status::Sat(m) = &r.status {
        for &a in &script.assertions {
            assert!(
                eval_bool(&tt, a, m).unwrap(),
                "model does not satisfy {text}"
            );
        }
    }
    r
}

fn builtin(text: &str) -> SolveResult {
    run(text, &SchemeConfig::default(), &BackendKind::Builtin)
}

const DECL4: &str = "(declare-const x (_ BitVec 4)) (declare-const y (_ BitVec 4))";

#[test]
fn product_with_known_factor() {
    let r = builtin(&format!(
        "{DECL4} (assert (= (bvmul x y) #x6)) (assert (= x #x2))"
    ));
    assert_eq!(r.status.name(), "sat");
}

#[test]
fn commutativity_needs_no_full_multiplication() {
    let r = builtin(&format!(
        "{DECL4} (assert (distinct (bvmul x y) (bvmul y x)))"
    ));
    assert_eq!(r.status, Status::Unsat);
    for i in &r.instances {
        assert!(!i.stages.contains(&Stage::FullMul), "{:?}", r.instances);
    }
}

#[test]
fn no_square_is_two() {
    let r = builtin(&format!("{DECL4} (assert (= (bvmul x x) #x2))"));
    assert_eq!(r.status, Status::Unsat);
    for i in r
        .instances
        .iter()
        .filter(|i| i.depth == 0 && i.op == OpKind::Mul)
    {
        assert!(i.refinement_rounds <= 3 + i.width);
    }
}

#[test]
fn division_and_remainder() {
    let text = format!(
        "{DECL4} (assert (= (bvsdiv x y) #xd)) (assert (= (bvsrem x y) #xf)) (assert (bvslt y #x3))"
    );
    let r = builtin(&text);
    assert_eq!(r.status.name(), "sat");
    let r = builtin(&format!(
        "{DECL4} (assert (bvult y (bvurem x y))) (assert (distinct y #x0))"
    ));
    assert_eq!(r.status, Status::Unsat);
    let r = builtin(&format!(
        "{DECL4} (assert (bvugt (bvudiv x y) x)) (assert (distinct y #x0))"
    ));
    assert_eq!(r.status, Status::Unsat);
}

#[test]
fn prefix_scheme_only_loses_verdicts() {
    let text = format!("{DECL4} (assert (= (bvmul x y) #x6)) (assert (= x #x3))");
    let cfg = SchemeConfig::default()
        .with_stages(&[Stage::Simple])
        .unwrap();
    let r = run(&text, &cfg, &BackendKind::Builtin);
    assert!(matches!(r.status, Status::Sat(_) | Status::Unknown(_)));
    assert_eq!(builtin(&text).status.name(), "sat");
}

#[test]
fn oracle_and_baseline_agree() {
    let text = format!("{DECL4} (assert (= (bvmul x (bvadd y #x1)) #x9)) (assert (bvult x y))");
    let a = run(&text, &SchemeConfig::baseline(), &BackendKind::Builtin);
    let b = run(&text, &SchemeConfig::default(), &BackendKind::oracle());
    let c = builtin(&text);
    assert_eq!(a.status.name(), b.status.name());
    assert_eq!(a.status.name(), c.status.name());
}

#[test]
fn shared_symbols_and_unsigned_rewrite() {
    let text = format!("{DECL4} (assert (distinct (bvsrem x y) (bvsrem x y))) ");
    let mut cfg = SchemeConfig {
        fresh_symbols: lazybv::abstraction::FreshSymbolPolicy::SharedPerOp,
        ..Default::default()
    };
    assert_eq!(
        run(&text, &cfg, &BackendKind::Builtin).status,
        Status::Unsat
    );
    cfg.signed_mode = lazybv::abstraction::SignedMode::RewriteUnsigned;
    let text = format!("{DECL4} (assert (= (bvsdiv x y) #x3)) (assert (= (bvsrem x y) #xe))");
    let r = run(&text, &cfg, &BackendKind::Builtin);
    assert_eq!(
        r.status.name(),
        run(&text, &SchemeConfig::baseline(), &BackendKind::Builtin)
            .status
            .name(),
        "{:?}",
        r.status
    );
}
