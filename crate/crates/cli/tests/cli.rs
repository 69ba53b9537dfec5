//! End-to-end tests of the `qpack` binary: exit codes, output schema,
//! and determinism across thread counts.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qpack() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qpack"))
}

fn write_model(dir: &Path, name: &str, contents: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn noiseless_binary_json() -> &'static str {
    r#"{
        "kind": "cq-channel",
        "dimB": 2,
        "inputs": [
            { "symbol": "0", "prior": 0.5,
              "state": [[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[0.0,0.0]]] },
            { "symbol": "1", "prior": 0.5,
              "state": [[[0.0,0.0],[0.0,0.0]],[[0.0,0.0],[1.0,0.0]]] }
        ]
    }"#
}

fn stdout_json(output: &Output) -> Value {
    assert!(
        output.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

#[test]
fn bound_cq_reports_expected_values() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "ch.json", noiseless_binary_json());
    let output = qpack()
        .args(["bound", "cq", "--messages", "2", "--strengthened"])
        .arg("--model")
        .arg(&model)
        .output()
        .unwrap();
    let json = stdout_json(&output);
    assert_eq!(json["protocol"], "cq");
    assert!((json["values"]["bound"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert!((json["values"]["strengthened_bound"].as_f64().unwrap() - 0.375).abs() < 1e-9);
    assert_eq!(json["diagnostics"]["trivial"], Value::Bool(false));
    assert!(json["inputs_digest"].as_str().unwrap().starts_with("sha256:"));
}

#[test]
fn bound_cq_rejects_zero_messages_with_usage_exit() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "ch.json", noiseless_binary_json());
    let output = qpack()
        .args(["bound", "cq", "--messages", "0"])
        .arg("--model")
        .arg(&model)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(output.stdout.is_empty());
    assert!(!output.stderr.is_empty());
}

#[test]
fn invalid_model_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = noiseless_binary_json().replace("0.5", "0.4");
    let model = write_model(dir.path(), "bad.json", &bad);
    let output = qpack()
        .args(["bound", "cq", "--messages", "2"])
        .arg("--model")
        .arg(&model)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("prior"), "stderr: {stderr}");
}

#[test]
fn simulate_mc_requires_seed() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "ch.json", noiseless_binary_json());
    let output = qpack()
        .args(["simulate", "cq", "--messages", "2", "--mode", "mc", "--trials", "10"])
        .arg("--model")
        .arg(&model)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("--seed"));
}

#[test]
fn simulate_mc_bit_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "ch.json", noiseless_binary_json());
    let run = |threads: &str| {
        let output = qpack()
            .args([
                "simulate", "cq", "--messages", "2", "--mode", "mc", "--trials", "200", "--seed",
                "99", "--threads", threads,
            ])
            .arg("--model")
            .arg(&model)
            .output()
            .unwrap();
        stdout_json(&output)["values"]["mean_error"]
            .as_f64()
            .unwrap()
    };
    let single = run("1");
    let quad = run("4");
    assert_eq!(single.to_bits(), quad.to_bits());
}

#[test]
fn exponent_csv_has_header_and_grid_rows() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "ch.json", noiseless_binary_json());
    let output = qpack()
        .args([
            "exponent",
            "--rate",
            "0.5",
            "--grid-steps",
            "7",
            "--format",
            "csv",
        ])
        .arg("--model")
        .arg(&model)
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8_lossy(&output.stdout);
    let lines: Vec<&str> = text.trim().lines().collect();
    assert_eq!(lines[0], "alpha,integrand");
    assert_eq!(lines.len(), 8, "header plus one row per grid point");
}

#[test]
fn divergence_reports_infinite_as_string() {
    let dir = tempfile::tempdir().unwrap();
    let rho = write_model(
        dir.path(),
        "rho.json",
        r#"{ "kind": "density", "matrix": [[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[0.0,0.0]]] }"#,
    );
    let sigma = write_model(
        dir.path(),
        "sigma.json",
        r#"{ "kind": "density", "matrix": [[[0.0,0.0],[0.0,0.0]],[[0.0,0.0],[1.0,0.0]]] }"#,
    );
    let output = qpack()
        .args(["divergence", "max"])
        .arg("--rho")
        .arg(&rho)
        .arg("--sigma")
        .arg(&sigma)
        .output()
        .unwrap();
    let json = stdout_json(&output);
    assert_eq!(json["values"]["value"], Value::String("inf".into()));
}

#[test]
fn bits_flag_rescales_divergences() {
    let dir = tempfile::tempdir().unwrap();
    let rho = write_model(
        dir.path(),
        "rho.json",
        r#"{ "kind": "density", "matrix": [[[0.5,0.0],[0.0,0.0]],[[0.0,0.0],[0.5,0.0]]] }"#,
    );
    let sigma = write_model(
        dir.path(),
        "sigma.json",
        r#"{ "kind": "density", "matrix": [[[0.9,0.0],[0.0,0.0]],[[0.0,0.0],[0.1,0.0]]] }"#,
    );
    let value = |bits: bool| {
        let mut cmd = qpack();
        cmd.args(["divergence", "max"]);
        if bits {
            cmd.arg("--bits");
        }
        let output = cmd.arg("--rho").arg(&rho).arg("--sigma").arg(&sigma).output().unwrap();
        stdout_json(&output)["values"]["value"].as_f64().unwrap()
    };
    let nats = value(false);
    let bits = value(true);
    assert!((nats - 5.0f64.ln()).abs() < 1e-9);
    assert!((bits - nats / std::f64::consts::LN_2).abs() < 1e-12);
}

#[test]
fn check_battery_passes_and_reports_margins() {
    let output = qpack()
        .args(["check", "hn", "--trials", "50", "--dim", "3", "--seed", "7"])
        .output()
        .unwrap();
    let json = stdout_json(&output);
    assert_eq!(json["diagnostics"]["passed"], Value::Bool(true));
    let margin = json["values"]["margin_hayashi_nagaoka_inequality"]
        .as_f64()
        .unwrap();
    assert!(margin >= -1e-8);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("pass"), "stderr: {stderr}");
}

#[test]
fn mac_bound_via_composite_alphabet() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(
        dir.path(),
        "mac.json",
        r#"{
            "kind": "cq-channel",
            "dimB": 4,
            "inputs": [
                { "symbol": "0|0", "prior": 0.25,
                  "state": [[[1.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]],
                            [[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]],
                            [[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]],
                            [[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]]] },
                { "symbol": "0|1", "prior": 0.25,
                  "state": [[[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]],
                            [[0.0,0.0],[1.0,0.0],[0.0,0.0],[0.0,0.0]],
                            [[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]],
                            [[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]]] },
                { "symbol": "1|0", "prior": 0.25,
                  "state": [[[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]],
                            [[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]],
                            [[0.0,0.0],[0.0,0.0],[1.0,0.0],[0.0,0.0]],
                            [[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]]] },
                { "symbol": "1|1", "prior": 0.25,
                  "state": [[[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]],
                            [[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]],
                            [[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]],
                            [[0.0,0.0],[0.0,0.0],[0.0,0.0],[1.0,0.0]]] }
            ]
        }"#,
    );
    let output = qpack()
        .args(["bound", "mac", "--ma", "2", "--mb", "2"])
        .arg("--model")
        .arg(&model)
        .output()
        .unwrap();
    let json = stdout_json(&output);
    assert!((json["values"]["bound"].as_f64().unwrap() - 1.0).abs() < 1e-9);

    let output = qpack()
        .args(["simulate", "mac", "--ma", "2", "--mb", "2"])
        .arg("--model")
        .arg(&model)
        .output()
        .unwrap();
    let json = stdout_json(&output);
    assert_eq!(json["diagnostics"]["certified"], Value::Bool(true));
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "ch.json", noiseless_binary_json());
    let out_path = dir.path().join("report.json");
    let output = qpack()
        .args(["bound", "cq", "--messages", "2"])
        .arg("--model")
        .arg(&model)
        .arg("--output")
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(output.stdout.is_empty());
    let json: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(json["protocol"], "cq");
}

#[test]
fn broadcast_and_state_info_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    // broadcast: d_B = d_C = 1 is degenerate, use a 2x2 output built
    // from diagonal states
    let model = write_model(
        dir.path(),
        "bc.json",
        r#"{
            "kind": "cq-channel",
            "dimB": 4,
            "inputs": [
                { "symbol": "0", "prior": 0.5,
                  "state": [[[0.7,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]],
                            [[0.0,0.0],[0.1,0.0],[0.0,0.0],[0.0,0.0]],
                            [[0.0,0.0],[0.0,0.0],[0.1,0.0],[0.0,0.0]],
                            [[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.1,0.0]]] },
                { "symbol": "1", "prior": 0.5,
                  "state": [[[0.1,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]],
                            [[0.0,0.0],[0.1,0.0],[0.0,0.0],[0.0,0.0]],
                            [[0.0,0.0],[0.0,0.0],[0.1,0.0],[0.0,0.0]],
                            [[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.7,0.0]]] }
            ]
        }"#,
    );
    let output = qpack()
        .args([
            "bound",
            "broadcast",
            "--db",
            "2",
            "--precoder",
            "0,0;1,1",
            "--pu",
            "0.5,0.5",
            "--pv",
            "0.5,0.5",
            "--mb",
            "2",
            "--mc",
            "2",
        ])
        .arg("--model")
        .arg(&model)
        .output()
        .unwrap();
    let json = stdout_json(&output);
    let bound_b = json["values"]["bound_b"].as_f64().unwrap();
    assert!(bound_b > 0.0 && bound_b <= 1.0 + 1e-9);

    let output = qpack()
        .args([
            "simulate",
            "broadcast",
            "--db",
            "2",
            "--precoder",
            "0,0;1,1",
            "--pu",
            "0.5,0.5",
            "--pv",
            "0.5,0.5",
            "--mb",
            "2",
            "--mc",
            "2",
        ])
        .arg("--model")
        .arg(&model)
        .output()
        .unwrap();
    let json = stdout_json(&output);
    assert_eq!(json["diagnostics"]["certified_b"], Value::Bool(true));
    assert_eq!(json["diagnostics"]["certified_c"], Value::Bool(true));
}
