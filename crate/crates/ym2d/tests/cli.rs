use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn run_in(dir: &std::path::Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ym2d"))
        .args(args)
        .current_dir(dir)
        .env("YM2D_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn run(args: &[&str]) -> Output {
    run_in(&std::env::temp_dir(), args)
}

fn json_ok(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn value(doc: &Value, key: &str) -> f64 {
    doc[key]
        .as_f64()
        .unwrap_or_else(|| panic!("no number `{key}` in {doc}"))
}

#[test]
fn faces_lists_bounded_faces() {
    let simple = json_ok(&["faces", data("simple.loop").to_str().unwrap()]);
    assert_eq!(simple["bounded_faces"], 1);
    let eight = json_ok(&["faces", data("eight.loop").to_str().unwrap()]);
    assert_eq!(eight["bounded_faces"], 4);
    assert_eq!(eight["faces"].as_array().unwrap().len(), 5);
    assert_eq!(
        eight["faces"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|f| f["unbounded"] == true)
            .count(),
        1
    );
}

#[test]
fn invalid_codes_fail_with_a_category() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.loop");
    std::fs::write(&bad, "loop: 1 2 1\nsign: 1:+ 2:+\n").unwrap();
    let out = run(&["faces", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["category"], "semantic");
    assert!(err["error"]["message"]
        .as_str()
        .unwrap()
        .contains("crossing 2"));

    let out = run(&["faces", data("invalid.loop").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&["faces", "/nonexistent/file.loop"]);
    assert_eq!(out.status.code(), Some(7));
    let out = run(&["moment", "--n", "2", "--t", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn moment_methods() {
    let v = json_ok(&[
        "moment",
        "--n",
        "2",
        "--t",
        "1",
        "--N",
        "3",
        "--method",
        "character",
    ]);
    let want = (-1.0f64).exp() * ((1.0f64 / 3.0).cosh() - 3.0 * (1.0f64 / 3.0).sinh());
    assert!((value(&v, "value") - want).abs() < 1e-12);
    let v = json_ok(&["moment", "--n", "2", "--t", "1", "--method", "limit"]);
    assert!(value(&v, "value").abs() < 1e-15);
    let v = json_ok(&[
        "moment",
        "--n",
        "1",
        "--t",
        "0",
        "--N",
        "4",
        "--method",
        "mc",
        "--samples",
        "10",
    ]);
    assert_eq!(value(&v, "value"), 1.0);
    assert_eq!(value(&v, "stderr"), 0.0);
    assert_eq!(v["manifest"]["seed"], 0);
}

#[test]
fn master_field_files() {
    let v = json_ok(&["master-field", data("simple.loop").to_str().unwrap()]);
    assert!((value(&v, "value") - (-1.0f64).exp()).abs() < 1e-9);
    // heart with s = 0.5, t = 1: e^{-s/2 - t}(1 - t) = 0
    let v = json_ok(&[
        "master-field",
        data("heart.loop").to_str().unwrap(),
        "--tol",
        "1e-10",
    ]);
    assert!(value(&v, "value").abs() < 1e-8);
    // three windings around area 0.8: e^{-3u/2}(1 - 3u + 3u²/2)
    let u = 0.8f64;
    let want = (-1.5 * u).exp() * (1.0 - 3.0 * u + 1.5 * u * u);
    let v = json_ok(&[
        "master-field",
        data("triple_winding.loop").to_str().unwrap(),
        "--tol",
        "1e-10",
    ]);
    assert!((value(&v, "value") - want).abs() < 1e-8);
    let out = run(&["master-field", data("sphere_simple.loop").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn mc_wilson_is_reproducible() {
    let v = json_ok(&[
        "mc-wilson",
        data("zero_area.loop").to_str().unwrap(),
        "--N",
        "3",
        "--samples",
        "20",
    ]);
    assert_eq!(value(&v, "mean"), 1.0);
    let heart = data("heart.loop");
    let args = [
        "mc-wilson",
        heart.to_str().unwrap(),
        "--N",
        "2",
        "--samples",
        "300",
        "--seed",
        "9",
    ];
    let a = json_ok(&args);
    let b = json_ok(&args);
    assert_eq!(a["mean"], b["mean"]);
    assert_eq!(a["stderr"], b["stderr"]);
    // thread count does not change the value
    let out = Command::new(env!("CARGO_BIN_EXE_ym2d"))
        .args(args)
        .env("YM2D_THREADS", "3")
        .output()
        .unwrap();
    let c: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(a["mean"], c["mean"]);
    let out = Command::new(env!("CARGO_BIN_EXE_ym2d"))
        .args(args)
        .env("YM2D_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn subdivision_command() {
    for f in ["heart.loop", "sphere_simple.loop", "eight.loop"] {
        let v = json_ok(&["check-subdivision", data(f).to_str().unwrap()]);
        assert_eq!(v["u1_equal"], true, "{f}");
        assert_eq!(v["refinements"].as_array().unwrap().len(), 3);
    }
    let v = json_ok(&[
        "check-subdivision",
        data("heart.loop").to_str().unwrap(),
        "--N",
        "2",
        "--samples",
        "400",
    ]);
    assert!(v["max_mc_z"].as_f64().unwrap().is_finite());
}

#[test]
fn sphere_commands_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["sphere", "minimize", "--T", "4", "--grid", "512"],
    );
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["cap_interval"].is_null());
    let csv = dir.path().join("sphere-minimize-T4.csv");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("x,rho"));
    assert_eq!(text.lines().count(), 513);
    assert_eq!(v["manifest"]["outputs"][0], "sphere-minimize-T4.csv");

    let path = dir.path().join("scan.csv");
    let out = run_in(
        dir.path(),
        &[
            "sphere",
            "free-energy",
            "--from",
            "9",
            "--to",
            "10.7",
            "--points",
            "35",
            "--grid",
            "1024",
            "--csv",
            path.to_str().unwrap(),
        ],
    );
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let b = &v["third_difference_jump"]["bracket"];
    let (lo, hi) = (b[0].as_f64().unwrap(), b[1].as_f64().unwrap());
    let c = std::f64::consts::PI.powi(2);
    assert!(lo - 0.05 < c && c < hi + 0.05, "{lo} {hi}");
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 36);

    let a = json_ok(&[
        "sphere", "moment", "--n", "1", "--T", "4", "--t", "1", "--grid", "512",
    ]);
    let b = json_ok(&[
        "sphere", "moment", "--n", "1", "--T", "4", "--t", "3", "--grid", "512",
    ]);
    assert!((value(&a, "value") - value(&b, "value")).abs() < 1e-12);
    let out = run(&["sphere", "moment", "--n", "1", "--T", "4", "--t", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn manifest_is_stable() {
    let args = ["moment", "--n", "3", "--t", "0.7", "--N", "5"];
    let mut a = json_ok(&args);
    let mut b = json_ok(&args);
    for d in [&mut a, &mut b] {
        d["manifest"]
            .as_object_mut()
            .unwrap()
            .remove("elapsed_seconds");
    }
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    assert_eq!(a["manifest"]["version"], env!("CARGO_PKG_VERSION"));
}
