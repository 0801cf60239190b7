//! End-to-end behaviour of the `moment-tails` binary.

use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moment-tails"))
        .args(args)
        .env("MOMENT_TAILS_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn write_cir(dir: &Path) -> String {
    let p = dir.join("cir.json");
    std::fs::write(&p, r#"{"type": "cir", "a": 0.4, "b": 1, "sigma": 1, "x0": 0.5, "t": 1}"#).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn critical_moment_prints_value() {
    let o = bin(&["critical-moment", "--b", "1", "--sigma", "1", "--t", "1"]);
    assert!(o.status.success());
    let v: f64 = String::from_utf8(o.stdout).unwrap().trim().parse().unwrap();
    assert!((v - 2.0 / (1.0 - (-1f64).exp())).abs() < 1e-14);
    assert_eq!(format!("{v:.6}"), "3.163953");
}

#[test]
fn tail_csv_has_manifest_and_three_rows() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_cir(dir.path());
    let before = std::fs::read(&model).unwrap();
    let out = dir.path().join("tail.csv");
    let o = bin(&["tail", "--model", &model, "--x", "10,100,1000", "--order", "refined", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# manifest: {"));
    assert_eq!(lines[1], "x,lambda_star,leading,correction,estimate,exact,ratio,reliable");
    assert_eq!(lines.len(), 5);
    // the sidecar carries timing and paths; the CSV does not
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("tail.csv.json")).unwrap()).unwrap();
    assert!(side["timing_secs"].is_number());
    assert!(!lines[0].contains("timing"));
    assert_eq!(std::fs::read(&model).unwrap(), before, "input file was modified");
}

#[test]
fn replay_is_bit_identical_without_the_model_file() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_cir(dir.path());
    let first = dir.path().join("mc.csv");
    let o = bin(&["mc", "--model", &model, "--paths", "5000", "--steps", "50", "--seed", "3",
        "--mu-fractions", "0.25,0.5", "--x", "0.5,1", "--out", first.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::remove_file(&model).unwrap();
    let second = dir.path().join("again.csv");
    // the CSV itself is a valid manifest
    let o = bin(&["replay", "--manifest", first.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
    let third = dir.path().join("third.csv");
    let o = bin(&["replay", "--manifest", dir.path().join("mc.csv.json").to_str().unwrap(), "--out", third.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&third).unwrap());
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(bin(&["critical-moment", "--b", "1", "--sigma", "1"]).status.code(), Some(1));
    assert_eq!(bin(&["critical-moment", "--b", "1", "--sigma", "1", "--t", "1", "--bogus"]).status.code(), Some(1));
    assert_eq!(bin(&["critical-moment", "--b", "1", "--sigma", "1", "--t=-1"]).status.code(), Some(2));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"type": "cir", "a": 0.4, "b": 1, "sigma": -1, "x0": 0.5, "t": 1}"#).unwrap();
    let o = bin(&["cir-ccdf", "--model", bad.to_str().unwrap(), "--x", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sigma"));
    let typo = dir.path().join("typo.json");
    std::fs::write(&typo, r#"{"type": "cir", "alpha": 0.4}"#).unwrap();
    let o = bin(&["cir-ccdf", "--model", typo.to_str().unwrap(), "--x", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));
    // p = 1/2 with a > 0 is outside the series' domain
    let o = bin(&["cev", "--p", "0.5", "--a", "0.3", "--b", "1", "--sigma", "0.5", "--v0", "0.5", "--t", "1", "--x", "2"]);
    assert_eq!(o.status.code(), Some(2));
    // the explosion boundary
    let model = write_cir(dir.path());
    assert_eq!(bin(&["cir-mgf", "--model", &model, "--mu-fractions", "1.5"]).status.code(), Some(2));
}

#[test]
fn fixed_point_emits_grid_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("pd.json");
    std::fs::write(&model, r#"{"type": "custom", "a": 0, "b": 1, "c": 1, "beta": 0.3333333333333333, "x0": 0.5, "t": 1}"#).unwrap();
    let out = dir.path().join("fp.csv");
    let o = bin(&["fixed-point", "--model", model.to_str().unwrap(), "--x-max", "1e5", "--last-only", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().nth(1).unwrap(), "t,x,R,Gamma,dGamma_dx");
    assert_eq!(text.lines().count(), 2 + 161);
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("fp.csv.json")).unwrap()).unwrap();
    assert!(side["diagnostics"]["contraction"].as_f64().unwrap() <= 0.9);
    assert!(side["diagnostics"]["residual_history"].as_array().unwrap().len() >= 2);
}
