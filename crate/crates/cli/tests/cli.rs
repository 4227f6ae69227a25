use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_timearrow")).args(args).output().expect("spawn")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json")
}

fn matrix(v: &Value) -> Vec<Vec<f64>> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|r| r.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect())
        .collect()
}

fn close(a: &[Vec<f64>], b: &[[f64; 2]; 2], tol: f64) -> bool {
    a.iter().zip(b).all(|(r, s)| r.iter().zip(s).all(|(x, y)| (x - y).abs() < tol))
}

#[test]
fn dichotomy_on_ma_example() {
    let v = json(&["dichotomy", "--model", "ma-2", "--windows", "1..=8"]);
    let r = &v["result"];
    assert!(close(&matrix(&r["omega_f"]), &[[1.0, 1.0], [1.0, 1.0]], 1e-10));
    assert!(close(&matrix(&r["omega_b"]), &[[4.0, 0.0], [0.0, 0.0]], 1e-10));
    assert_eq!(r["numeric"]["verdict"], "NotDeterministic");
    assert_eq!(v["meta"]["tool"], "timearrow");
}

#[test]
fn dichotomy_on_harmonic_example() {
    let v = json(&["dichotomy", "--model", "harmonic", "--windows", "1..=16"]);
    let r = &v["result"];
    assert_eq!(r["rule"]["verdict"], "Deterministic");
    assert_eq!(r["numeric"]["strictly_decreasing"], true);
}

#[test]
fn szego_of_white_noise_is_one() {
    let v = json(&["szego", "--model", "white"]);
    assert!((v["result"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn catalog_lists_builtin_models() {
    let out = run(&["catalog", "list"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in ["ma-2", "harmonic", "white"] {
        assert!(text.contains(name), "{name}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["predict", "--model", "nope", "--window", "2"]).status.code(), Some(1));
    assert_eq!(run(&["predict", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["--format", "csv", "catalog", "show", "ma-2"]).status.code(), Some(1));
    let strict = ["validate", "--model", "ma-2", "--T", "2000", "--tolerance", "1e-9"];
    assert_eq!(run(&strict).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn sweep_csv_layout() {
    let out = run(&["--format", "csv", "sweep", "--model", "ma-2", "--windows", "1..=3", "--direction", "fwd"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# meta {"));
    assert_eq!(lines.next().unwrap(), "window,direction,trace,det,omega_0_0,omega_0_1,omega_1_0,omega_1_1");
    assert_eq!(lines.count(), 3);
}

#[test]
fn probe_csv_layout() {
    let out = run(&["--format", "csv", "probe", "--symbol", "harmonic", "--shifts", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows[0], "shifts,residual");
    let r: Vec<f64> = rows[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(r.len(), 6);
    assert!(r.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn simulate_writes_file_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("path.csv");
    let p = path.to_str().unwrap();
    let out = run(&["--format", "csv", "--out", p, "simulate", "--model", "ma-2", "--T", "50", "--seed", "7"]);
    assert!(out.status.success());
    let body = std::fs::read_to_string(&path).unwrap();
    assert_eq!(body.lines().filter(|l| !l.starts_with('#')).count(), 51);
    let side: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("path.meta.json")).unwrap()).unwrap();
    assert_eq!(side["seed"], 7);
    assert_eq!(side["T"], 50);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["simulate", "--model", "ma-0.5", "--T", "100", "--seed", "3"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let args = ["sweep", "--model", "harmonic", "--windows", "1..=12", "--precision", "extended"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}
