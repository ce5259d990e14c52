use std::f64::consts::PI;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn so2deg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_so2deg")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn analyze_exit_codes_follow_the_verdict() {
    let proven = so2deg(&["analyze", &data("four_dim_resonant.json")]);
    assert_eq!(proven.status.code(), Some(0));
    assert!(stdout(&proven).contains("verdict: proven"));

    let undecided = so2deg(&["analyze", &data("sitnikov.json"), "--T", "1.0"]);
    assert_eq!(undecided.status.code(), Some(2));
    assert!(stdout(&undecided).contains("not-decided"));

    let expr = so2deg(&["analyze", &data("sitnikov.json"), "--T", "pi/sqrt(2) + 0.01"]);
    assert_eq!(expr.status.code(), Some(0));
}

#[test]
fn json_certificates_are_deterministic() {
    let args = ["analyze", &data("four_dim_singular.json"), "--format", "json"];
    let a = so2deg(&args);
    let b = so2deg(&args);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["verdict"], "proven");
    assert_eq!(v["witness_k"], 2);
    assert_eq!(v["points"][0]["brouwer_source"], "sum-formula-residual");
}

#[test]
fn hessian_only_input_analyzes_but_does_not_verify() {
    let a = so2deg(&["analyze", &data("four_dim_hessians.json"), "--format", "json"]);
    assert_eq!(a.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["hessian_only"], true);
    assert_eq!((v["lhs"].as_i64(), v["rhs"].as_i64()), (Some(0), Some(-1)));

    let b = so2deg(&["verify", &data("four_dim_hessians.json")]);
    assert_eq!(b.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&b.stderr).contains("hessian-only spec, verification unavailable"));
}

#[test]
fn reproductions_match() {
    for id in ["6.5", "6.6", "6.7", "6.8", "6.9"] {
        let o = so2deg(&["reproduce", id]);
        assert_eq!(o.status.code(), Some(0), "{id}: {}", stdout(&o));
        assert!(stdout(&o).contains("all values match"));
    }
    let j = so2deg(&["reproduce", "6.7", "--format", "json"]);
    let v: Value = serde_json::from_slice(&j.stdout).unwrap();
    assert_eq!(v["all_match"], true);
    assert_eq!(so2deg(&["reproduce", "7.1"]).status.code(), Some(1));
}

#[test]
fn verify_finds_the_sitnikov_orbit() {
    let dir = std::env::temp_dir().join(format!("so2deg-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("orbit.csv");
    let o = so2deg(&[
        "verify",
        &data("sitnikov.json"),
        "--format",
        "json",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let orbit = &v["search"]["orbit"];
    assert!((orbit["minimal_period"].as_f64().unwrap() - 2.0 * PI).abs() < 1e-9);
    assert!(orbit["ode_residual"].as_f64().unwrap() <= 1e-7);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,u1\n"));
    assert_eq!(text.lines().count(), 1002);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn verify_without_witness_is_undecided() {
    let o = so2deg(&["verify", &data("sitnikov.json"), "--T", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn trace_reaches_the_stationary_point() {
    let o = so2deg(&["trace", &data("sitnikov.json"), "--direction", "down", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let b = &v["branches"][0];
    assert_eq!(b["verdict"], "hit-stationary");
    assert_eq!(b["symmetry_breaking"], true);
    // 8 + lambda meets the mode-1 threshold 1 at lambda = -7
    assert!((b["final_lambda"].as_f64().unwrap() + 7.0).abs() < 0.05);
    assert_eq!(v["continuation"]["branches_guaranteed"], true);
}

#[test]
fn selftest_passes() {
    let o = so2deg(&["selftest", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn bad_inputs_are_errors() {
    let missing = so2deg(&["analyze", "/nonexistent/system.json"]);
    assert_eq!(missing.status.code(), Some(1));
    let dir = std::env::temp_dir().join(format!("so2deg-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("bad.json");
    std::fs::write(&f, r#"{"T": 1, "v_inf": [[1, 2], [3, 4]], "critical_points": []}"#).unwrap();
    let o = so2deg(&["analyze", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    std::fs::remove_dir_all(&dir).unwrap();
}
