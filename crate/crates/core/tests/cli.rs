use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vstates"))
        .args(args)
        .env("VSTATE_OUTPUT_DIR", dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn column(csv: &str, col: usize) -> Vec<f64> {
    csv.lines().skip(1).map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect()
}

#[test]
fn dispersion_sqg_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["dispersion", "--alpha", "1", "--m-max", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("PASS dispersion"));
    let om = column(&std::fs::read_to_string(dir.path().join("dispersion.csv")).unwrap(), 1);
    let pi = std::f64::consts::PI;
    let mut partial = 0.0;
    for (k, v) in om.iter().enumerate() {
        partial += 2.0 / (pi * (2 * k + 3) as f64);
        assert!((v - partial).abs() < 1e-11);
    }
    assert!(dir.path().join("dispersion.svg").exists());
}

#[test]
fn dispersion_euler_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["dispersion", "--alpha", "0", "--m-max", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let om = column(&std::fs::read_to_string(dir.path().join("dispersion.csv")).unwrap(), 1);
    assert_eq!(om, [0.25, 1.0 / 3.0_f64, 0.375].iter().map(|v| format!("{v:.11e}").parse().unwrap()).collect::<Vec<f64>>());
}

#[test]
fn bad_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["dispersion", "--alpha", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("ERROR dispersion"));
    assert_eq!(run(dir.path(), &["scan", "--alpha", "0.5", "--m", "1"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["verify-integrals", "--alpha", "0.5", "--tol", "-1"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["nonsense"]).status.code(), Some(2));
}

#[test]
fn failed_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["verify-integrals", "--alpha", "0.5", "--n-max", "4", "--tol", "1e-20"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("FAIL verify-integrals"));
}

#[test]
fn verify_integrals_and_json_format() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["--format", "json", "verify-integrals", "--alpha", "0.5", "--n-max", "16"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("integrals.json")).unwrap()).unwrap();
    assert!(v["max_relative_error"].as_f64().unwrap() < 1e-8);
}

#[test]
fn ellipse_and_scan() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["ellipse-test", "--alpha", "0.5", "--Q", "0.3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("min_abs_g4=2.2275"));
    let o = run(dir.path(), &["--format", "json", "scan", "--alpha", "0.5", "--m", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("scan.json")).unwrap()).unwrap();
    for key in ["alpha", "m", "omega_located", "omega_closed_form", "gap"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

#[test]
fn solve_branch_outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["solve-branch", "--alpha", "0.5", "--m", "3", "--s-max", "0.04", "--ds", "0.01"];
    assert_eq!(run(a.path(), &args).status.code(), Some(0));
    assert_eq!(run(b.path(), &args).status.code(), Some(0));
    for f in ["branch.csv", "branch_boundaries.svg", "branch_diagram.svg"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        assert_eq!(x, std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let csv = std::fs::read_to_string(a.path().join("branch.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn evolve_and_rigid_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["evolve", "--alpha", "0.5", "--nodes", "64", "--periods", "0.05", "--frames", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let lines = std::fs::read_to_string(dir.path().join("trajectory.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 3);
    let o = run(dir.path(), &["rigid-check", "--alpha", "0.5", "--nodes", "128"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(dir.path().join("rigid.svg").exists());
}

#[test]
fn linearize_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["linearize", "--alpha", "0.5", "--m", "4", "--n-max", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(csv.starts_with("n,multiplier\n"));
    assert!(stdout(&o).contains("kernel=[3]"));
}
