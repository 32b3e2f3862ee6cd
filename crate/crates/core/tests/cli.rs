//! End-to-end checks of the `noisy-response` binary: exit codes, artifact
//! formats, determinism, and a respond→control round trip through files.

use std::fs;
use std::path::Path;
use std::process::Command;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_noisy-response"))
}

fn small_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("config.json");
    fs::write(
        &path,
        r#"{
  "system": {
    "map": {"name": "doubling"},
    "kernel": {"name": "uniform", "radius": 0.1},
    "grid_n": 128,
    "boundary": "reflecting",
    "quadrature_k": 64
  },
  "perturbation": {
    "kind": "map",
    "bump": {"center": 0.5, "halfwidth": 0.25, "height": 0.25}
  },
  "simulate": {"samples": 200000, "burn_in": 1000, "seeds": [7]}
}"#,
    )
    .unwrap();
    path
}

#[test]
fn stationary_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let out = dir.path().join("run");
    let status = binary()
        .args(["stationary", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let f0 = fs::read_to_string(out.join("f0.csv")).unwrap();
    assert!(f0.starts_with("x_left,x_right,density\n"));
    assert_eq!(f0.lines().count(), 129);
    let diag: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("diagnostics.json")).unwrap()).unwrap();
    assert_eq!(diag["command"], "stationary");
    assert!(diag["stationary"]["residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn malformed_config_exits_3_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(
        &path,
        r#"{
  "system": {
    "map": {"name": "doubling"},
    "kernel": {"name": "uniform", "radius": 0.1},
    "grid_n": -4,
    "boundary": "reflecting"
  }
}"#,
    )
    .unwrap();
    let output = binary()
        .args(["stationary", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("grid_n"), "stderr must name the field: {stderr}");
}

#[test]
fn validate_zero_perturbation_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    fs::write(
        &path,
        r#"{
  "system": {
    "map": {"name": "doubling"},
    "kernel": {"name": "uniform", "radius": 0.1},
    "grid_n": 64,
    "boundary": "reflecting",
    "quadrature_k": 64
  },
  "perturbation": {
    "kind": "map",
    "nodes": [[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]]
  },
  "validate": {"deltas": [0.01, 0.001]}
}"#,
    )
    .unwrap();
    let out = dir.path().join("run");
    let output = binary()
        .args(["validate", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let report = fs::read_to_string(out.join("fd_report.csv")).unwrap();
    assert!(report.starts_with("delta,error\n"));
    for line in report.lines().skip(1) {
        let err: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(err < 1e-10);
    }
}

#[test]
fn simulate_is_byte_identical_for_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = binary()
            .args(["simulate", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .args(["--seed", "42", "--threads", "2"])
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(fs::read(out.join("histogram_seed42.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn respond_then_control_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let respond_out = dir.path().join("respond");
    let status = binary()
        .args(["respond", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&respond_out)
        .status()
        .unwrap();
    assert!(status.success());

    // The emitted response becomes the control target.
    let control_config = dir.path().join("control.json");
    fs::write(
        &control_config,
        format!(
            r#"{{
  "system": {{
    "map": {{"name": "doubling"}},
    "kernel": {{"name": "uniform", "radius": 0.1}},
    "grid_n": 128,
    "boundary": "reflecting",
    "quadrature_k": 64
  }},
  "control": {{"target_csv": "{}"}}
}}"#,
            respond_out.join("response.csv").display()
        ),
    )
    .unwrap();
    let control_out = dir.path().join("control");
    let status = binary()
        .args(["control", "--config"])
        .arg(&control_config)
        .arg("--out")
        .arg(&control_out)
        .status()
        .unwrap();
    assert!(status.success());

    let diag: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(control_out.join("diagnostics.json")).unwrap(),
    )
    .unwrap();
    let round_trip = diag["control"]["round_trip_error"].as_f64().unwrap();
    assert!(round_trip < 0.05, "round trip through files: {round_trip}");

    // The recovered node list is loadable as a perturbation profile and
    // should resemble the bump that generated the target.
    let nodes = fs::read_to_string(control_out.join("s_nodes.csv")).unwrap();
    let s = noisy_response::io::read_nodes_csv(nodes.as_bytes()).unwrap();
    let mut sup = 0.0f64;
    for k in 0..=256 {
        let t = 0.3 + 0.4 * k as f64 / 256.0;
        let bump = noisy_response::dynamics::PerturbationS::bump(0.5, 0.25, 0.25).unwrap();
        sup = sup.max((s.eval(t) - bump.eval(t)).abs());
    }
    assert!(sup < 0.01, "recovered S differs from the seeding bump by {sup}");
}

#[test]
fn mixing_command_writes_estimates() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let out = dir.path().join("mix");
    let status = binary()
        .args(["mixing", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let mixing = fs::read_to_string(out.join("mixing.csv")).unwrap();
    let mut lines = mixing.lines();
    assert_eq!(lines.next(), Some("n_steps,upper,exact"));
    let row = lines.next().unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[0], "20");
    let upper: f64 = fields[1].parse().unwrap();
    let exact: f64 = fields[2].parse().unwrap();
    assert!(exact <= upper + 1e-13);
    assert!(upper < 1.0);
}

#[test]
fn exhausted_iteration_budget_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    fs::write(
        &path,
        r#"{
  "system": {
    "map": {"name": "bz"},
    "kernel": {"name": "uniform", "radius": 0.0086},
    "grid_n": 256,
    "boundary": "reflecting",
    "quadrature_k": 16
  },
  "solver": {"max_iter": 2}
}"#,
    )
    .unwrap();
    let output = binary()
        .args(["stationary", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("did not converge"), "{stderr}");
}

#[test]
fn fd_report_is_deterministic_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    fs::write(
        &path,
        r#"{
  "system": {
    "map": {"name": "doubling"},
    "kernel": {"name": "uniform", "radius": 0.1},
    "grid_n": 64,
    "boundary": "reflecting",
    "quadrature_k": 512
  },
  "perturbation": {
    "kind": "map",
    "bump": {"center": 0.5, "halfwidth": 0.25, "height": 0.25}
  },
  "validate": {"deltas": [0.1, 0.01]}
}"#,
    )
    .unwrap();
    let mut outputs = Vec::new();
    for (run, threads) in [("a", "1"), ("b", "2")] {
        let out = dir.path().join(run);
        let status = binary()
            .args(["validate", "--config"])
            .arg(&path)
            .arg("--out")
            .arg(&out)
            .args(["--threads", threads])
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(fs::read(out.join("fd_report.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "FD reports must be bit-identical");
}

#[test]
fn missing_config_file_exits_3() {
    let output = binary()
        .args(["stationary", "--config", "/nonexistent/nope.json"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
}
