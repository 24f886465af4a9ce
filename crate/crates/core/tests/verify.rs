use std::sync::OnceLock;

use oqlab::app::ModelPreset;
use oqlab::tower::Tower;
use oqlab::verify::{self, CheckKind, CheckParams, CheckSpec, Session};
use oqlab::Error;

fn params() -> CheckParams {
    CheckParams { trials: 120, ..CheckParams::default() }
}

fn kac5() -> &'static Tower {
    static T: OnceLock<Tower> = OnceLock::new();
    T.get_or_init(|| Tower::build(ModelPreset::Kac3.resolve().unwrap(), 5).unwrap())
}

fn nonkac5() -> &'static Tower {
    static T: OnceLock<Tower> = OnceLock::new();
    T.get_or_init(|| Tower::build(ModelPreset::NonKacLambda(2f64.sqrt()).resolve().unwrap(), 5).unwrap())
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

#[test]
fn registry_has_every_check_once() {
    let all = verify::check_names();
    assert_eq!(all.len(), 22);
    let mut sorted = all.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted.len(), all.len());
    for name in ["kappa-oracle", "faithfulness-decay", "decomp-consistency", "embed-associativity"] {
        assert!(all.contains(&name));
    }
}

#[test]
fn unknown_check_is_rejected_with_the_list() {
    let err = verify::resolve_suite(&names(&["kappa-ratio", "nope"]), params()).unwrap_err();
    match err {
        Error::UnknownCheck { name, available } => {
            assert_eq!(name, "nope");
            assert!(available.contains("kappa-ratio"));
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(CheckSpec::new("Kappa-Ratio", params()).is_err());
}

#[test]
fn empty_list_gives_empty_result() {
    assert!(verify::run_suite(&[], kac5(), params()).unwrap().is_empty());
}

#[test]
fn all_expands_in_registry_order_and_dedups() {
    let specs = verify::resolve_suite(&names(&["delta-p0", "all", "delta-p0"]), params()).unwrap();
    assert_eq!(specs.len(), 22);
    assert_eq!(specs[0].name, "delta-p0");
    let rest: Vec<&str> = specs[1..].iter().map(|s| s.name.as_str()).collect();
    let want: Vec<&str> = verify::check_names().into_iter().filter(|n| *n != "delta-p0").collect();
    assert_eq!(rest, want);
}

#[test]
fn invalid_params_fail_the_check() {
    let spec = CheckSpec::new("kappa-ratio", CheckParams { tol: 0.0, ..params() }).unwrap();
    let r = verify::run_check(&spec, kac5());
    assert!(!r.pass);
    assert!(r.notes.iter().any(|n| n.starts_with("aborted")), "{:?}", r.notes);
    let spec = CheckSpec::new("cone-bound", CheckParams { trials: 0, ..params() }).unwrap();
    assert!(!verify::run_check(&spec, kac5()).pass);
}

#[test]
fn full_suite_passes_on_small_towers() {
    for tower in [kac5(), nonkac5()] {
        let results = verify::run_suite(&names(&["all"]), tower, params()).unwrap();
        assert_eq!(results.len(), 22);
        for r in &results {
            assert!(r.pass, "{} failed: maxViolation {} notes {:?}", r.name, r.max_violation, r.notes);
            assert!(r.max_violation.is_finite());
            assert!(!r.expected.is_empty(), "{} has no expectation", r.name);
        }
    }
}

#[test]
fn fitted_constants_are_reported() {
    let results = verify::run_suite(
        &names(&["kappa-oracle", "kappa-ratio", "global-bound", "jw-defect-decay", "w-easy-bound"]),
        kac5(),
        params(),
    )
    .unwrap();
    let get = |check: &str, key: &str| results.iter().find(|r| r.name == check).unwrap().fitted_constants[key];
    let (d1, d2) = (get("kappa-oracle", "D1"), get("kappa-oracle", "D2"));
    assert!(d1 > 0.0 && d2 >= d1);
    assert!((get("kappa-oracle", "D2/D1") - d2 / d1).abs() < 1e-12);
    for k in 1..=3 {
        assert!(get("kappa-ratio", &format!("E_{k}")) > 0.0);
    }
    assert!(get("global-bound", "M") >= get("global-bound", "M_1"));
    assert!(get("jw-defect-decay", "B") > 0.0);
    assert!(get("w-easy-bound", "C") > 0.0);
}

#[test]
fn a_check_does_not_depend_on_its_neighbours() {
    let alone = verify::run_suite(&names(&["cone-bound"]), kac5(), params()).unwrap();
    let among = verify::run_suite(&names(&["trace-splitting", "cone-bound"]), kac5(), params()).unwrap();
    assert_eq!(alone[0].observed, among[1].observed);
    assert_eq!(alone[0].max_violation, among[1].max_violation);
}

#[test]
fn session_reuse_gives_identical_results() {
    let s = Session::new(nonkac5());
    let spec = CheckSpec::new("global-bound", params()).unwrap();
    let a = s.run(&spec);
    let b = s.run(&spec);
    assert_eq!(a.observed, b.observed);
    assert_eq!(a.fitted_constants, b.fitted_constants);
}

#[test]
fn trend_criterion() {
    let slack = 1.6;
    assert!(verify::trend_violation(&[1.0, 2.0], slack).is_none());
    assert!(verify::trend_violation(&[1.0, 1.0, 5.0], slack).unwrap() > 0.0);
    assert!(verify::trend_violation(&[1.0, 1.2, 1.5], slack).unwrap() < 0.0);
    // identically zero leading cells are ignored
    assert!(verify::trend_violation(&[0.0, 0.0, 1.0, 0.5, 0.25], slack).unwrap() < 0.0);
    assert!(verify::trend_violation(&[0.0, 0.0, 1.0, 0.5], slack).is_none());
    assert!(verify::trend_violation(&[1.0, 0.0, 0.0], slack).unwrap() < 0.0);
}

#[test]
fn plot_csv_lists_bound_series_only() {
    let results =
        verify::run_suite(&names(&["global-bound", "duality-coherence", "faithfulness-decay"]), kac5(), params()).unwrap();
    let csv = verify::plot_csv(&results);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("check,indices,value"));
    let rows: Vec<&str> = lines.collect();
    assert!(rows.iter().all(|l| !l.starts_with("duality-coherence")));
    let gb = results.iter().find(|r| r.name == "global-bound").unwrap();
    assert_eq!(rows.iter().filter(|l| l.starts_with("global-bound,")).count(), gb.observed.len());
    assert!(rows[0].split(',').nth(1).unwrap().contains(';'));
    assert!(results.iter().all(|r| r.kind != CheckKind::DecayEnvelope || r.name == "faithfulness-decay"));
}
