use std::path::Path;
use std::process::{Command, Output};

use oqlab_cli::{run, EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE};
use serde_json::Value;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("oqlab").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn binary(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oqlab"))
        .args(args)
        .env("OQLAB_CACHE_DIR", cache)
        .output()
        .expect("spawn oqlab")
}

fn without_runtime(path: &Path) -> Value {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    oqlab::app::strip_runtime(&mut v);
    v
}

#[test]
fn qdim_of_level_four_is_55() {
    let (code, out, _) = call(&["compute", "qdim", "--preset", "kac3", "--n", "4"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.trim(), "55");
}

#[test]
fn kappa_exact_form() {
    let (code, out, _) = call(&["compute", "kappa", "--preset", "kac3", "--r", "1", "--s", "1", "--t", "0", "--exact"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("1/sqrt([2]_q)"), "{out}");
    let float: f64 = out.lines().find_map(|l| l.strip_prefix("float: ")).unwrap().parse().unwrap();
    assert!((float - 1.0 / 3f64.sqrt()).abs() < 1e-15);
}

#[test]
fn weights_sum_to_one() {
    let (code, out, _) = call(&["compute", "weights", "--preset", "nonkac-lambda:1.4142135623730951", "--n", "3"]);
    assert_eq!(code, EXIT_OK);
    let vals: Vec<f64> = out.lines().map(|l| l.split(':').nth(1).unwrap().trim().parse().unwrap()).collect();
    assert!((vals[0] + vals[1] - 1.0).abs() < 1e-14);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(call(&["bogus"]).0, EXIT_USAGE);
    assert_eq!(call(&["compute", "qdim"]).0, EXIT_USAGE);
    assert_eq!(call(&["compute", "qdim", "--preset", "kac1", "--n", "2"]).0, EXIT_USAGE);
    let (code, _, err) = call(&["compute", "kappa", "--r", "1", "--s", "1", "--t", "1"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("inadmissible"), "{err}");
    let (code, _, err) = call(&["verify", "run", "--suite", "no-such-check", "--max-level", "2", "--no-cache"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("no-such-check"), "{err}");
}

#[test]
fn help_exits_0() {
    let (code, out, _) = call(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("verify"));
}

#[test]
fn malformed_q_file_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.json");
    std::fs::write(&path, "{\"N\": 2, \"sign\": 1,\n \"entries\": [[1, 0], [0, 0], [0 0], [1, 0]]}").unwrap();
    let preset = format!("file:{}", path.display());
    let (code, _, err) = call(&["compute", "qdim", "--preset", &preset, "--n", "1"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("line 2, column"), "{err}");

    std::fs::write(&path, r#"{"N": 2, "sign": 1, "entries": [[1, 0], [0, 0], [0, 0]]}"#).unwrap();
    let (code, _, err) = call(&["compute", "qdim", "--preset", &preset, "--n", "1"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("entries"), "{err}");

    std::fs::write(&path, r#"{"N": 2, "sign": 1, "entries": [[1, 0], [0, 0], [0, 0], [1, 0]]}"#).unwrap();
    let (code, out, _) = call(&["compute", "qdim", "--preset", &preset, "--n", "3"]);
    assert_eq!(code, EXIT_OK);
    // Q = I_2 is the q = 1 case: dimensions n + 1
    assert_eq!(out.trim(), "4");
}

#[test]
fn verify_run_writes_report_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("out.json");
    let csv = dir.path().join("series.csv");
    let (code, out, _) = call(&[
        "verify",
        "run",
        "--preset",
        "kac3",
        "--max-level",
        "4",
        "--no-cache",
        "--suite",
        "kappa-ratio,global-bound,duality-coherence,kappa-ratio",
        "--report",
        report.to_str().unwrap(),
        "--plot-data",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("3/3 checks passed"), "{out}");
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["towerLevel"], 4);
    assert_eq!(v["model"]["N"], 3);
    assert_eq!(v["pass"], true);
    assert_eq!(v["checks"].as_array().unwrap().len(), 3);
    for key in ["version", "seed", "precision", "tolerance"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("check,indices,value\n"));
    assert!(text.lines().any(|l| l.starts_with("global-bound,")));
}

#[test]
fn failing_check_exits_1() {
    let (code, out, _) =
        call(&["verify", "run", "--max-level", "3", "--no-cache", "--suite", "embed-associativity", "--tol", "1e-300"]);
    assert_eq!(code, EXIT_CHECK_FAILED, "{out}");
    assert!(out.contains("FAIL"));
}

#[test]
fn empty_suite_is_an_empty_passing_run() {
    let (code, out, _) = call(&["verify", "run", "--max-level", "2", "--no-cache", "--suite", ""]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("0/0 checks passed"));
}

#[test]
fn cache_round_trip_matches_in_memory_run() {
    let cache = tempfile::tempdir().unwrap();
    let build = binary(cache.path(), &["tower", "build", "--preset", "nonkac-lambda:1.4142135623730951", "--max-level", "4"]);
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));
    assert_eq!(std::fs::read_dir(cache.path()).unwrap().count(), 1);

    let suite = "kappa-oracle,markov-identity,trace-splitting,w-conjugation,fusion-completeness";
    let common = ["verify", "run", "--preset", "nonkac-lambda:1.4142135623730951", "--max-level", "4", "--suite", suite];
    let from_cache = cache.path().join("cached.json");
    let mut args: Vec<&str> = common.to_vec();
    args.extend(["--report", from_cache.to_str().unwrap()]);
    let cached = binary(cache.path(), &args);
    assert_eq!(cached.status.code(), Some(0), "{}", String::from_utf8_lossy(&cached.stdout));
    assert!(String::from_utf8_lossy(&cached.stderr).contains("loaded from cache"));

    let in_memory = cache.path().join("memory.json");
    let mut args: Vec<&str> = common.to_vec();
    args.extend(["--no-cache", "--report", in_memory.to_str().unwrap()]);
    let fresh = binary(cache.path(), &args);
    assert_eq!(fresh.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&fresh.stderr).contains("built"));

    assert_eq!(without_runtime(&from_cache), without_runtime(&in_memory));
}

#[test]
fn corrupted_cache_exits_2() {
    let cache = tempfile::tempdir().unwrap();
    assert!(binary(cache.path(), &["tower", "build", "--max-level", "3"]).status.success());
    let file = std::fs::read_dir(cache.path()).unwrap().next().unwrap().unwrap().path();
    let mut bytes = std::fs::read(&file).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0x01;
    std::fs::write(&file, bytes).unwrap();
    let run = binary(cache.path(), &["verify", "run", "--max-level", "3", "--suite", "kappa-ratio"]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("cache"));
}

#[test]
fn walk_json_is_deterministic() {
    let args = ["walk", "simulate", "--n0", "2", "--steps", "40", "--trials", "300", "--seed", "11", "--json"];
    let (c1, a, _) = call(&args);
    let (c2, b, _) = call(&args);
    assert_eq!((c1, c2), (EXIT_OK, EXIT_OK));
    assert_eq!(a, b);
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["finalLevels"].as_array().unwrap().len(), 300);
}

#[test]
fn z_norms_lists_cells() {
    let (code, out, _) = call(&["boundary", "z-norms", "--max-level", "5", "--no-cache", "--k", "0", "--offset", "3"]);
    assert_eq!(code, EXIT_OK);
    // header plus n = 0, 1, 2
    assert_eq!(out.lines().count(), 4, "{out}");
}
