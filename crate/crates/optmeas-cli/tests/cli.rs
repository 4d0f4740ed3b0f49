//! End-to-end tests of the `optmeas` binary: exit-code contract, artifact
//! shapes, and the manifest.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optmeas"))
        .args(args)
        .current_dir(dir)
        .env("OPTMEAS_LOG", "quiet")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn base_config(points: usize, degrees: &str, outputs: &str) -> String {
    format!(
        r#"{{
  "domain": {{"kind": "interval", "a": -1.0, "b": 1.0, "points": {points}}},
  "weight": {{"kind": "constant"}},
  "degrees": {degrees},
  "solver": {{"tolerance": 1e-6, "max_iterations": 50000, "algorithm": "hybrid", "prune_threshold": 1e-12}},
  "outputs": "{outputs}",
  "seed": 7
}}"#
    )
}

#[test]
fn design_writes_artifacts_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.json", &base_config(201, "[1, 2]", "out"));
    let out = run(&["design", "--config", &config], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "design");
    // Every artifact referenced by the manifest exists and parses.
    for (_stage, files) in manifest["artifacts"].as_object().unwrap() {
        for file in files.as_array().unwrap() {
            let path = dir.path().join("out").join(file.as_str().unwrap());
            assert!(path.exists(), "missing {}", path.display());
            if path.extension().is_some_and(|e| e == "json") {
                let _: Value =
                    serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
            }
        }
    }

    let design: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/design_n1.json")).unwrap())
            .unwrap();
    assert_eq!(design["converged"], Value::Bool(true));
    let weights = design["weights"].as_array().unwrap();
    assert_eq!(weights.len(), 201);
    assert!((weights[0].as_f64().unwrap() - 0.5).abs() < 1e-3);
    assert!((weights[200].as_f64().unwrap() - 0.5).abs() < 1e-3);
    assert_eq!(design["support_indices"], serde_json::json!([0, 200]));
}

#[test]
fn design_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // Rank guard: 3 points cannot carry degree 4.
    let infeasible = write_config(dir.path(), "i.json", &base_config(3, "[4]", "o1"));
    let out = run(&["design", "--config", &infeasible], dir.path());
    assert_eq!(out.status.code(), Some(3));

    // Unknown keys are a hard usage error.
    let unknown = write_config(
        dir.path(),
        "u.json",
        &base_config(21, "[1]", "o2").replace("\"seed\": 7", "\"seed\": 7, \"oops\": 1"),
    );
    let out = run(&["design", "--config", &unknown], dir.path());
    assert_eq!(out.status.code(), Some(2));

    // Malformed JSON.
    let broken = write_config(dir.path(), "b.json", "{nope");
    let out = run(&["design", "--config", &broken], dir.path());
    assert_eq!(out.status.code(), Some(2));

    // Non-convergence still writes artifacts and exits 1.
    let slow = write_config(
        dir.path(),
        "s.json",
        &base_config(201, "[4]", "o3").replace("\"max_iterations\": 50000", "\"max_iterations\": 3"),
    );
    let out = run(&["design", "--config", &slow], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(dir.path().join("o3/design_n4.json").exists());
}

#[test]
fn points_fekete_and_leja() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.json", &base_config(5, "[2]", "pts"));
    let out = run(&["points", "fekete", "--config", &config], dir.path());
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("pts/points_fekete_bruteforce_n2.csv")).unwrap();
    let xs: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(xs, vec![-1.0, 0.0, 1.0]);

    let config10 = write_config(dir.path(), "c10.json", &base_config(101, "[12]", "pts10"));
    let out = run(
        &["points", "leja", "--count", "10", "--config", &config10],
        dir.path(),
    );
    assert!(out.status.success());
    let sidecar: Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("pts10/points_leja_n12.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(sidecar["kind"], "leja");
    assert_eq!(sidecar["n"], 12);
    let increments = sidecar["increments"].as_array().unwrap();
    assert_eq!(increments.len(), 10);
    let total: f64 = increments.iter().map(|v| v.as_f64().unwrap()).sum();
    assert!((total - sidecar["log_weighted_vdm"].as_f64().unwrap()).abs() < 1e-10);
    let csv = fs::read_to_string(dir.path().join("pts10/points_leja_n12.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11); // header + 10 nodes

    // Scale guard surfaces as infeasible.
    let big = write_config(dir.path(), "big.json", &base_config(2001, "[2]", "pbig"));
    let out = run(&["points", "fekete", "--config", &big], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn diameter_table_shape() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.json", &base_config(201, "[1, 2, 3]", "diam"));
    let out = run(&["diameter", "--config", &config], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("diam/diameter.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "degree,delta_from_points,delta_from_gram,log_det,log_sandwich_lo,log_sandwich_hi,sandwich_ok,delta_source"
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "1");
    let delta: f64 = first[1].parse().unwrap();
    assert!((delta - 2.0).abs() < 1e-12); // δ̂₁ from {-1, 1}
    for line in csv.lines().skip(1) {
        assert!(line.contains(",true,"), "sandwich flagged: {line}");
    }
    assert!(dir.path().join("diam/plot_diameter.csv").exists());
}

#[test]
fn converge_reports_and_reference_guard() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.json", &base_config(301, "[2, 4]", "conv"));
    let out = run(
        &["converge", "arcsine_interval", "--config", &config],
        dir.path(),
    );
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("conv/convergence.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("degree,mass_outside_region,err_0_0"));
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    let pos = header.split(',').position(|c| c == "err_2_0").unwrap();
    assert!(rows[1][pos] < rows[0][pos], "second-moment error decreasing");
    assert!(dir.path().join("conv/plot_moment_error.csv").exists());
    assert!(dir.path().join("conv/convergence.json").exists());

    let out = run(&["converge", "lemniscate", "--config", &config], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_passes_and_zero_scale_fails_with_names() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.json", &base_config(21, "[1]", "chk"));
    let out = run(&["check", "--config", &config], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("mass_identity"));
    assert!(table.contains("PASS"));
    assert!(!table.contains("FAIL"));

    // Same seed, different seed: cases change, pass/fail does not.
    let out2 = run(&["check", "--config", &config, "--seed", "12345"], dir.path());
    assert!(out2.status.success());

    let zero = write_config(
        dir.path(),
        "z.json",
        &base_config(21, "[1]", "chk0")
            .replace("\"seed\": 7", "\"seed\": 7, \"check_tolerance_scale\": 0.0"),
    );
    let out = run(&["check", "--config", &zero], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("FAIL"));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("mass_identity"), "failures are named: {err}");
}

#[test]
fn workers_do_not_change_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.json", &base_config(201, "[1, 2, 3]", "w1"));
    let out = run(&["design", "--config", &config, "--out", "w1"], dir.path());
    assert!(out.status.success());
    let out = run(
        &["design", "--config", &config, "--out", "w4", "--workers", "4"],
        dir.path(),
    );
    assert!(out.status.success());
    for n in [1, 2, 3] {
        let a = fs::read(dir.path().join(format!("w1/design_n{n}.json"))).unwrap();
        let b = fs::read(dir.path().join(format!("w4/design_n{n}.json"))).unwrap();
        assert_eq!(a, b, "design_n{n}.json differs across worker counts");
    }
}
