use std::path::Path;
use std::process::{Command, Output};

const SPIKE: &str = r#"{
  "matrix": {"kind": "second_difference", "n": 4},
  "nonlinearity": {"function": {"kind": "spike_train", "regime": "infinity"}},
  "perturbation": {"function": {"kind": "sine", "amplitude": 0.1}, "lipschitz": 0.1},
  "lambda": 1.0
}"#;

fn varcrit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varcrit")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn analyze_twice_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "spike.json", SPIKE);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let oa = varcrit(&["analyze", &cfg, "--out", a.to_str().unwrap()]);
    let ob = varcrit(&["analyze", &cfg, "--out", b.to_str().unwrap()]);
    assert_eq!((code(&oa), code(&ob)), (0, 0));
    assert_eq!(oa.stdout, ob.stdout);
    for f in ["analysis.txt", "analysis.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }
    let text = String::from_utf8(oa.stdout).unwrap();
    assert!(text.starts_with("seed: 0\n"));
    assert!(text.contains("L < lambda_1: pass"));
}

#[test]
fn seed_flag_is_embedded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "spike.json", SPIKE);
    let out = dir.path().join("o");
    let o = varcrit(&["analyze", &cfg, "--seed", "42", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("seed: 42\n"));
}

#[test]
fn cascade_writes_series() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "spike.json", SPIKE);
    let out = dir.path().join("o");
    let o = varcrit(&["cascade", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let phi = std::fs::read_to_string(out.join("cascade_phi.csv")).unwrap();
    let rows: Vec<f64> = phi.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(rows.len() >= 5);
    assert!(rows.windows(2).all(|w| w[1] > w[0]));
    assert!(out.join("solutions.csv").exists() && out.join("witness.json").exists());
}

#[test]
fn failed_hypothesis_exits_2_unless_overridden() {
    let dir = tempfile::tempdir().unwrap();
    let text = SPIKE.replace("\"amplitude\": 0.1}, \"lipschitz\": 0.1", "\"amplitude\": 0.5}, \"lipschitz\": 0.5");
    let cfg = write(dir.path(), "bad.json", &text);
    let out = dir.path().join("o");
    let o = varcrit(&["solve", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8(o.stderr).unwrap().contains("L < lambda_1 fails"));
    assert!(!out.join("solutions.csv").exists());

    // analysis itself still completes
    assert_eq!(code(&varcrit(&["analyze", &cfg, "--out", out.to_str().unwrap()])), 0);

    let o = varcrit(&["solve", &cfg, "--override-hypotheses", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(out.join("solutions.csv")).unwrap();
    assert!(csv.starts_with("# NO GUARANTEE"));
    let json = std::fs::read_to_string(out.join("solutions.json")).unwrap();
    assert!(json.contains("\"watermark\": \"NO GUARANTEE"));
}

#[test]
fn cascade_without_profile_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"matrix": {"kind": "second_difference", "n": 2},
                   "nonlinearity": {"function": {"kind": "polynomial", "coefficients": [0, 0, 0, 1]}}, "lambda": 1}"#;
    let cfg = write(dir.path(), "cubic.json", text);
    let out = dir.path().join("o");
    assert_eq!(code(&varcrit(&["cascade", &cfg, "--out", out.to_str().unwrap()])), 2);
    assert_eq!(code(&varcrit(&["solve", &cfg, "--out", out.to_str().unwrap()])), 0);
}

#[test]
fn config_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        "{\n  \"matrix\": {\"kind\": \"second_difference\", \"n\": 3},\n  \"lambda\": \"x\"\n}",
    );
    let o = varcrit(&["analyze", &cfg]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8(o.stderr).unwrap().contains("line"));
    assert_eq!(code(&varcrit(&["analyze", dir.path().join("missing.json").to_str().unwrap()])), 3);
    assert_eq!(code(&varcrit(&["frobnicate"])), 3);
    let asym = r#"{"matrix": {"kind": "entries", "rows": [[2, 1], [0, 2]]},
                   "nonlinearity": {"function": {"kind": "zero"}}, "lambda": 1}"#;
    assert_eq!(code(&varcrit(&["analyze", &write(dir.path(), "a.json", asym)])), 3);
    let grid_only = SPIKE.replace("\"lambda\": 1.0", "\"lambda\": 1.0, \"output\": {\"dir\": \"o\"}");
    assert_eq!(code(&varcrit(&["grid", &write(dir.path(), "g.json", &grid_only)])), 3);
}

#[test]
fn grid_exports_framed_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{
      "matrix": {"kind": "grid", "m": 2, "n": 2},
      "nonlinearity": {"function": {"kind": "polynomial", "coefficients": [0, 0, 0, 1]}},
      "lambda": 1,
      "solver": {"starts": {"explicit": [[0, 0, 0, 0]], "random": 64, "box_radius": 3}, "dedupe_radius": 1e-4}
    }"#;
    let cfg = write(dir.path(), "g.json", text);
    let out = dir.path().join("o");
    let o = varcrit(&["grid", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut found = Vec::new();
    for k in 1.. {
        let Ok(text) = std::fs::read_to_string(out.join(format!("solution_{k}.csv"))) else { break };
        let rows: Vec<Vec<f64>> = text.lines().map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.len() == 4 && r[0] == 0.0 && r[3] == 0.0));
        found.push(rows[1][1]);
    }
    // constant grids c with 2c = c³. At c = ±√2 the Hessian A − 6I is
    // singular and the residual is cubic in the error, so a 1e-8 residual
    // only locates the root to about 1e-4.
    let s = 2f64.sqrt();
    assert!(found.contains(&0.0), "0 not in {found:?}");
    for target in [-s, s] {
        assert!(found.iter().any(|c| (c - target).abs() < 1e-4), "{target} not in {found:?}");
    }
}
