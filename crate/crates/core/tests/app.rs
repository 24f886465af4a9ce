use std::path::PathBuf;

use oqlab::app::{self, ModelPreset, Report, TowerSource};
use oqlab::linalg::c;
use oqlab::qnum;
use oqlab::tower::Tower;
use oqlab::verify::{self, CheckParams};
use oqlab::Error;

fn config_err(r: oqlab::Result<impl std::fmt::Debug>) -> String {
    match r {
        Err(Error::Config(m)) => m,
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn preset_parsing() {
    assert_eq!(ModelPreset::parse("kac3").unwrap(), ModelPreset::Kac3);
    assert_eq!(ModelPreset::parse("kacN:3").unwrap(), ModelPreset::Kac3);
    assert_eq!(ModelPreset::parse("kacN:5").unwrap(), ModelPreset::KacN(5));
    assert_eq!(ModelPreset::parse("kac4").unwrap(), ModelPreset::KacN(4));
    assert_eq!(ModelPreset::parse("nonkac-lambda:1.5").unwrap(), ModelPreset::NonKacLambda(1.5));
    assert_eq!(ModelPreset::parse("file:q.json").unwrap(), ModelPreset::File(PathBuf::from("q.json")));
    for bad in ["", "kac", "kac1", "kacN", "kacN:x", "nonkac-lambda", "nonkac-lambda:-2", "nonkac-lambda:nan", "oq"] {
        assert!(matches!(ModelPreset::parse(bad), Err(Error::Config(_))), "{bad:?} accepted");
    }
    for p in ["kac3", "kacN:6", "nonkac-lambda:1.4142135623730951", "file:/tmp/x.json"] {
        let parsed = ModelPreset::parse(p).unwrap();
        assert_eq!(ModelPreset::parse(&parsed.to_string()).unwrap(), parsed);
    }
}

#[test]
fn presets_resolve_to_admissible_models() {
    let kac = ModelPreset::Kac3.resolve().unwrap();
    assert!((kac.q() - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-15);
    let k5 = ModelPreset::KacN(5).resolve().unwrap();
    assert_eq!(k5.n(), 5);

    let nk = ModelPreset::NonKacLambda(2f64.sqrt()).resolve().unwrap();
    let q = nk.q_matrix();
    assert_eq!(q[(0, 1)], c(2f64.sqrt(), 0.0));
    assert!((q[(1, 0)] - c(1.0 / 2f64.sqrt(), 0.0)).norm() < 1e-16);
    assert_eq!(q[(2, 2)], c(1.0, 0.0));
    assert_eq!(nk.sign(), 1);
    // Tr F_1 = λ² + λ⁻² + 1 = 3.5
    assert!((nk.q() - qnum::q_from_trace(3.5).unwrap()).abs() < 1e-15);
}

#[test]
fn q_file_errors_name_the_position() {
    let msg = config_err(app::parse_q_json("{\"N\": 2,\n  \"sign\": 1,\n  \"entries\": [[1, 0] [0, 0]]}"));
    assert!(msg.starts_with("line 3, column"), "{msg}");

    let msg = config_err(app::parse_q_json(r#"{"N": 2, "sign": 1, "entries": [[1, 0], [0, 0], [0, "x"], [1, 0]]}"#));
    assert!(msg.contains("entries[2] (row 1, column 0)"), "{msg}");

    let msg = config_err(app::parse_q_json(r#"{"N": 2, "sign": 1, "entries": [[1, 0], [0, 0], [0, 0]]}"#));
    assert!(msg.contains("N² = 4"), "{msg}");

    let msg = config_err(app::parse_q_json(r#"{"N": 2, "sign": 2, "entries": []}"#));
    assert!(msg.starts_with("sign"), "{msg}");

    let msg = config_err(app::parse_q_json(r#"{"N": 2, "sign": 1, "entries": [], "extra": 0}"#));
    assert!(msg.contains("extra"), "{msg}");

    let msg = config_err(app::parse_q_json(r#"{"sign": 1, "entries": []}"#));
    assert!(msg.contains("N"), "{msg}");

    let msg = config_err(app::parse_q_json("[1, 2]"));
    assert!(msg.contains("object"), "{msg}");

    // Q conj(Q) = 2 I is not ±I
    let msg = config_err(app::parse_q_json(r#"{"N": 2, "sign": 1, "entries": [[1.4142135623730951, 0], [0, 0], [0, 0], [1.4142135623730951, 0]]}"#));
    assert!(msg.starts_with("Q matrix"), "{msg}");
}

#[test]
fn q_file_reading() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nonkac.json");
    let l = 2f64.sqrt();
    let text = format!(
        r#"{{"N": 3, "sign": 1, "entries": [[0, 0], [{l}, 0], [0, 0], [{}, 0], [0, 0], [0, 0], [0, 0], [0, 0], [1, 0]]}}"#,
        1.0 / l
    );
    std::fs::write(&path, text).unwrap();
    let from_file = ModelPreset::File(path.clone()).resolve().unwrap();
    let preset = ModelPreset::NonKacLambda(l).resolve().unwrap();
    assert_eq!(from_file.hash_hex(4), preset.hash_hex(4));

    let missing = config_err(app::read_q_file(&dir.path().join("absent.json")));
    assert!(missing.contains("absent.json"), "{missing}");
    std::fs::write(&path, "{\"N\": 3,").unwrap();
    let msg = config_err(app::read_q_file(&path));
    assert!(msg.contains("nonkac.json") && msg.contains("line 1"), "{msg}");
}

fn small_report(tower: &Tower) -> Report {
    let params = CheckParams { trials: 50, ..CheckParams::default() };
    let names: Vec<String> = ["kappa-oracle", "global-bound", "cone-bound"].iter().map(|s| s.to_string()).collect();
    let results = verify::run_suite(&names, tower, params).unwrap();
    Report::new(&ModelPreset::Kac3, tower, params, results)
}

#[test]
fn reports_are_byte_identical_without_runtime() {
    let tower = Tower::build(ModelPreset::Kac3.resolve().unwrap(), 4).unwrap();
    let a = small_report(&tower).to_json(false).unwrap();
    let b = small_report(&tower).to_json(false).unwrap();
    assert_eq!(a, b);
    assert!(!a.contains("runtimeMs"));
    assert!(small_report(&tower).to_json(true).unwrap().contains("runtimeMs"));

    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    for key in ["version", "model", "towerLevel", "checks", "seed", "precision", "tolerance", "trials", "pass"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    for key in ["preset", "N", "hash", "q", "normF1", "sign"] {
        assert!(v["model"].get(key).is_some(), "missing model.{key}");
    }
    assert_eq!(v["model"]["hash"].as_str().unwrap().len(), 64);
    let check = &v["checks"][0];
    for key in ["name", "pass", "maxViolation", "fittedConstants", "observed"] {
        assert!(check.get(key).is_some(), "missing checks[0].{key}");
    }
    // floats carry 17 significant digits
    assert!(a.contains(&format!("\"q\": {:.16e}", tower.q())), "q not in 17-digit form");
}

#[test]
fn report_file_is_written_whole() {
    let tower = Tower::build(ModelPreset::Kac3.resolve().unwrap(), 3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested").join("r.json");
    let report = small_report(&tower);
    report.write(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, report.to_json(true).unwrap());
    assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1, "temporary file left behind");
}

#[test]
fn cache_load_or_build() {
    let params = ModelPreset::NonKacLambda(1.5).resolve().unwrap();
    let name = app::cache_file_name(&params, 3);
    assert!(name.starts_with("tower-N3-L3-") && name.ends_with(".oqtw"), "{name}");
    assert_ne!(name, app::cache_file_name(&params, 4));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join(&name);
    let (_, src) = app::load_or_build(params.clone(), 3, Some(&path)).unwrap();
    assert_eq!(src, TowerSource::Built);
    assert!(!path.exists());
    let built = app::build_and_cache(params.clone(), 3, &path).unwrap();
    let (loaded, src) = app::load_or_build(params.clone(), 3, Some(&path)).unwrap();
    assert_eq!(src, TowerSource::Cache);
    assert_eq!(loaded.dims(), built.dims());
    assert_eq!(loaded.step(2).unwrap(), built.step(2).unwrap());

    // a cache for another model or level is an error, never a silent rebuild
    let other = ModelPreset::Kac3.resolve().unwrap();
    assert!(matches!(app::load_or_build(other, 3, Some(&path)), Err(Error::Cache(_))));
    assert!(app::load_or_build(params.clone(), 2, Some(&path)).is_err());

    let mut bytes = std::fs::read(&path).unwrap();
    let last = bytes.len() - 40;
    bytes[last] ^= 0x80;
    std::fs::write(&path, &bytes).unwrap();
    assert!(matches!(app::load_or_build(params, 3, Some(&path)), Err(Error::Cache(_))));
}

#[test]
fn cache_dir_follows_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    std::env::set_var(app::CACHE_DIR_ENV, dir.path());
    let params = ModelPreset::Kac3.resolve().unwrap();
    assert_eq!(app::cache_path(&params, 2), dir.path().join(app::cache_file_name(&params, 2)));
    std::env::remove_var(app::CACHE_DIR_ENV);
    assert_eq!(app::cache_dir(), PathBuf::from(".oqlab-cache"));
}

#[test]
fn walk_with_zero_steps_stays_put() {
    let s = app::simulate_walk(0.4, 3, 0, 25, 1).unwrap();
    assert!(s.final_levels.iter().all(|&n| n == 3));
    assert_eq!(s.mean_increment, 0.0);
    assert_eq!(s.escape_fraction, 0.0);
    assert!(s.per_level.is_empty());
    assert!(matches!(app::simulate_walk(0.4, 0, 5, 0, 1), Err(Error::InvalidParameter(_))));
}

#[test]
fn walk_is_deterministic_per_seed() {
    let a = app::simulate_walk(0.3, 1, 80, 200, 99).unwrap();
    let b = app::simulate_walk(0.3, 1, 80, 200, 99).unwrap();
    let c = app::simulate_walk(0.3, 1, 80, 200, 100).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_ne!(a.final_levels, c.final_levels);
}

#[test]
fn kac3_walk_drifts_upward_within_three_sigma() {
    let q = ModelPreset::Kac3.resolve().unwrap().q();
    // exact drift p_up − p_down is positive at every level
    for n in 1..50 {
        let w = qnum::walk_weights(n, q);
        assert!(w.p_up - w.p_down > 0.0);
    }
    let s = app::simulate_walk(q, 0, 200, 4000, 7).unwrap();
    assert!(s.expected_increment > 0.0);
    let z = (s.mean_increment - s.expected_increment) / s.increment_std_error;
    assert!(z.abs() <= 3.0, "drift off by {z} sigma");
    // far from the origin the drift approaches (1 − q²)/(1 + q²)
    assert!((s.expected_increment - s.asymptotic_drift).abs() < 0.01);
    for lv in s.per_level.iter().filter(|l| l.departures > 2000) {
        assert!((lv.empirical_p_up - lv.exact_p_up).abs() < 0.05);
    }
}

#[test]
fn level_distribution_is_a_probability() {
    let p = app::level_distribution(0.38, 2, 30);
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    // parity of the level is fixed by the number of steps
    assert!(p.iter().enumerate().all(|(n, &m)| n % 2 == 0 || m == 0.0));
}
