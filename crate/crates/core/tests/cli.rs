use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use kspace_forge::io::read_curve_csv;
use kspace_forge::kinematics::{check_admissible, derive_limits, HardwareLimits};

const SMALL: &str = r#"{"grid": {"dims": [64, 64], "resolution_m": 3.6e-4}, "scheme": {"kind": "tsp", "n_cities": 300}}"#;

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kspace-forge"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "error")
        .output()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn design_bundle_is_admissible() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("c.json"), SMALL).unwrap();
    let out = run(&["design", "--config", "c.json", "--out", "d"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let d = tmp.path().join("d");
    let desc = json(&d.join("descriptor.json"));
    assert_eq!(desc["scheme"], "tsp+projection");
    assert!(desc["T_s"].as_f64().unwrap() < desc["T_OC_s"].as_f64().unwrap());
    let curve = read_curve_csv(&d.join("curve.csv")).unwrap();
    let lim = derive_limits(&HardwareLimits::default()).unwrap();
    assert!(check_admissible(&curve, &lim, 1e-6).admissible);
    assert_eq!(curve.len() as u64, desc["n_samples"].as_u64().unwrap());
}

#[test]
fn simulate_and_report() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("c.json"), SMALL).unwrap();
    let out = run(&["simulate", "--config", "c.json", "--seed", "3", "--out", "s"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = json(&tmp.path().join("s/report.json"));
    assert!(rep["psnr_db"].as_f64().unwrap().is_finite());
    assert!(rep["iterations"].as_u64().unwrap() > 0);
    for f in ["recon.pgm", "reference.pgm", "zero_filled.pgm", "mask.pbm"] {
        assert!(tmp.path().join("s").join(f).exists(), "{f} missing");
    }

    let out = run(&["report", "s", "--out", "r"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("r/report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.starts_with("scheme,"));
    assert!(tmp.path().join("r/trajectories.svg").exists());
}

#[test]
fn bad_config_exits_with_config_code() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("bad.json"), r#"{"bogus": 1}"#).unwrap();
    let out = run(&["design", "--config", "bad.json", "--out", "x"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
    assert!(!tmp.path().join("x").exists());
}

#[test]
fn report_without_bundle_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["report", "nowhere", "--out", "r"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn selftest_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["selftest"], tmp.path());
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().count() >= 5 && !text.contains("FAIL"), "{text}");
}
