use std::path::Path;
use std::process::{Command, Output};

use halfspace_stokes::fields::read_dump;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_halfspace-stokes")).args(args).output().expect("binary runs")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn negative_alpha_is_invalid_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["solve", "--out", &out_arg(dir.path()), "--set", "problem.alpha=-1"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("α ≥ 0"), "{stderr}");
    let r = report(dir.path());
    assert_eq!(r["status"], "invalid_configuration");
    assert_eq!(r["exit_code"], 2);
}

#[test]
fn unknown_key_and_bad_values_are_invalid_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let d = out_arg(dir.path());
    assert_eq!(run(&["verify", "--out", &d, "--set", "problem.beta=1"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--out", &d, "--set", "grid.n=abc"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--out", &d, "--set", "problem.lambda_angle=3.1"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--out", &d, "--config", "/nonexistent/config.txt"]).status.code(), Some(2));
    assert_eq!(run(&["certify", "--out", &d, "--set", "certify.orders=0,2"]).status.code(), Some(2));
}

#[test]
fn verify_passes_with_default_tolerances() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["verify", "--out", &out_arg(dir.path()), "--workers", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path());
    assert_eq!(r["status"], "pass");
    assert_eq!(r["config"]["grid.n"], "32");
    assert!(r["checks"].as_array().unwrap().iter().any(|c| c["name"] == "weak_form.relative_defect"));
}

#[test]
fn config_file_is_overridden_by_set_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small oracle run\noracle.steps = 256\noracle.s = 1\nseed = 5\n").unwrap();
    let out_dir = dir.path().join("o");
    let out = run(&[
        "oracle",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--set",
        "oracle.s=0.5,2",
        "--seed",
        "11",
        "--set",
        "tol.oracle=1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out_dir);
    assert_eq!(r["config"]["oracle.steps"], "256");
    assert_eq!(r["config"]["oracle.s"], "0.5,2");
    assert_eq!(r["config"]["seed"], "11");
    assert_eq!(r["results"]["modes"].as_array().unwrap().len(), 2);
}

#[test]
fn oracle_default_modes_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["oracle", "--out", &out_arg(dir.path()), "--set", "problem.lambda_modulus=10", "--set", "problem.lambda_angle=1.0471975511965976"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn solve_writes_field_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["solve", "--out", &out_arg(dir.path()), "--set", "grid.n=16", "--set", "grid.wall_intervals=32"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["phi", "u_prime", "u_d", "pressure", "phi_hat"] {
        assert!(dir.path().join(format!("fields/{name}.bin")).exists());
    }
    let (header, field) = read_dump(&dir.path().join("fields/u_d")).unwrap();
    assert_eq!(header.n, 16);
    assert_eq!(header.levels.len(), 33);
    assert_eq!(field.components(), 1);
    assert!(field.max_abs() > 0.0);
}

#[test]
fn identical_runs_give_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = ["--set", "sweep.experiments=gradient", "--set", "grid.n=16", "--set", "sweep.ratio_samples=2", "--set", "sweep.ps=2", "--seed", "3"];
    let mut first = vec!["sweep", "--out", a.to_str().unwrap()];
    first.extend(args);
    let mut second = vec!["sweep", "--out", b.to_str().unwrap()];
    second.extend(args);
    assert_eq!(run(&first).status.code(), Some(0));
    assert_eq!(run(&second).status.code(), Some(0));
    let ra = std::fs::read(a.join("report.json")).unwrap();
    assert_eq!(ra, std::fs::read(b.join("report.json")).unwrap());
    assert!(a.join("tables/ratios.csv").exists());
    // floats carry 17 significant digits
    let text = String::from_utf8(ra).unwrap();
    let seventeen = |tok: &str| {
        let t = tok.trim_matches(|c: char| c == ',' || c == '-');
        t.len() > 19 && t.as_bytes()[1] == b'.' && t[2..18].bytes().all(|b| b.is_ascii_digit()) && t.as_bytes()[18] == b'e'
    };
    let floats: Vec<&str> = text.split_whitespace().filter(|t| t.contains('e') && t.contains('.') && !t.contains('"')).collect();
    assert!(!floats.is_empty());
    assert!(floats.iter().all(|t| seventeen(t)), "{floats:?}");
}

#[test]
fn real_part_check_reports_violations_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["certify", "--check", "real-part", "--out", &out_arg(dir.path())]);
    // Re q ≥ s fails in the obtuse part of the sector
    assert_eq!(out.status.code(), Some(1));
    let r = report(dir.path());
    let violations = r["violations"].as_array().unwrap();
    assert_eq!(violations.len(), 1);
    assert!(violations[0]["name"].as_str().unwrap().contains("Re q"));
    assert!(violations[0]["location"]["lambda_angle"].as_f64().unwrap().abs() > 2.0);
    let csv = std::fs::read_to_string(dir.path().join("tables/inequalities.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("\"sqrt|lambda| <= |q + s|\"") && l.split(',').nth(3) == Some("0")));
}

#[test]
fn m2_identity_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["certify", "--check", "m2-identity", "--out", &out_arg(dir.path())]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}
