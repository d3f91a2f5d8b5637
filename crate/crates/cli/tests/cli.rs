use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_thermoshift"));
    cmd.env_remove("THERMOSHIFT_MAX_DEPTH");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn example() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["example", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    dir
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn example_is_idempotent() {
    let dir = example();
    let first = read_all(dir.path());
    assert_eq!(first.len(), 8);
    let out = run(&["example", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(read_all(dir.path()), first);
}

#[test]
fn entropy_of_the_example_matrices() {
    let dir = example();
    let a = json(&run(&["entropy", &path(&dir, "A.txt")]));
    assert!((a["r"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!((a["log_r"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-12);
    let b = json(&run(&["entropy", &path(&dir, "B.txt")]));
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    assert!((b["r"].as_f64().unwrap() - golden).abs() < 1e-12);
}

#[test]
fn reducible_matrix_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("I.txt");
    std::fs::write(&file, "2\n1 0\n0 1\n").unwrap();
    let out = run(&["entropy", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("NotIrreducible"));
}

#[test]
fn zeta_needs_a_term() {
    let dir = example();
    let out = run(&["zeta", &path(&dir, "A.txt"), "--terms", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn rpf_of_the_cross_potential() {
    let dir = example();
    let out = run(&["rpf", &path(&dir, "B.txt"), &path(&dir, "potential_c2.json")]);
    assert!(out.status.success());
    assert!((json(&out)["eigenvalue"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn kms_solve_and_fixed_beta() {
    let dir = example();
    let (a, gauge) = (path(&dir, "A.txt"), path(&dir, "gauge_one.json"));
    let solved = json(&run(&["kms", &a, &gauge, "--solve"]));
    assert!((solved["beta"].as_f64().unwrap() - 2.0).abs() < 1e-9);

    let out = run(&["kms", &a, &gauge, "--beta", "2"]);
    assert_eq!(out.status.code(), Some(0));

    // wrong β: output is still written, with a warning and exit 4
    let out = run(&["kms", &a, &gauge, "--beta", "2.1"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(!out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("warning:"));
}

#[test]
fn kms_bracket_for_a_sign_changing_gauge() {
    let dir = example();
    let (b, c2) = (path(&dir, "B.txt"), path(&dir, "c2.json"));
    let out = run(&["kms", &b, &c2, "--solve"]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&["kms", &b, &c2, "--solve", "--bracket", "1.1", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!((json(&out)["beta"].as_f64().unwrap() - 2.0).abs() < 1e-8);
}

#[test]
fn verify_round_trip_of_the_example_witness() {
    let dir = example();
    let out = run(&["coe", &path(&dir, "witness.json"), "verify", "--depth", "12"]);
    assert!(out.status.success());
    let report = json(&out);
    assert_eq!(report["passed"], Value::Bool(true));
    assert_eq!(report["violation_count"], 0);
}

#[test]
fn broken_witness_fails_verification() {
    let dir = example();
    let file = path(&dir, "witness.json");
    let mut w: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    // k₁ = 1 on symbol 1 breaks the first equation
    w["k1"]["values"]["1"] = Value::from(1);
    std::fs::write(&file, w.to_string()).unwrap();
    let out = run(&["coe", &file, "verify", "--depth", "8"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json(&out)["passed"], Value::Bool(false));
}

#[test]
fn scoe_certificate_and_hn_check() {
    let dir = example();
    let w = path(&dir, "witness.json");
    let out = run(&["coe", &w, "scoe"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"sum\": 2"));
    let out = run(&["coe", &w, "hn-check"]);
    assert!(out.status.success());
}

#[test]
fn entropy_limit_csv() {
    let dir = example();
    let out = run(&["coe", &path(&dir, "witness.json"), "entropy-limit", "--side", "1", "--format", "csv", "--n-max", "10"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,E_n,entropy_estimate,r_pow_n_times_E_n"));
    assert_eq!(lines.count(), 10);
}

#[test]
fn parallel_and_serial_agree() {
    let dir = example();
    let w = path(&dir, "witness.json");
    let serial = run(&["coe", &w, "entropy-limit", "--side", "both", "--n-max", "12"]);
    let parallel = run(&["coe", &w, "entropy-limit", "--side", "both", "--n-max", "12", "--parallel"]);
    assert!(serial.status.success());
    assert_eq!(serial.stdout, parallel.stdout);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = example();
    let args = ["rpf", &path(&dir, "A.txt"), &path(&dir, "potential_c1.json")].map(String::from);
    let first = bin().args(&args).output().unwrap();
    let second = bin().args(&args).output().unwrap();
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn output_flag_writes_a_file() {
    let dir = example();
    let target = path(&dir, "out.json");
    let out = run(&["entropy", &path(&dir, "A.txt"), "--output", &target]);
    assert!(out.status.success());
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert!((written["r"].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn depth_cap_from_the_environment() {
    let dir = example();
    let w = path(&dir, "witness.json");
    let out = bin().args(["coe", &w, "verify", "--depth", "30"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .args(["coe", &w, "verify"])
        .env("THERMOSHIFT_MAX_DEPTH", "8")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(json(&out)["depth"], 8);

    let out = bin()
        .args(["coe", &w, "verify", "--depth", "10"])
        .env("THERMOSHIFT_MAX_DEPTH", "8")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
