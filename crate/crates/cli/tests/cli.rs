use std::path::Path;
use std::process::Command;

fn alfven(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_alfven"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn check_linear_fixture_passes_with_case_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.json", r#"{"profile": {"u": [0, 0.5], "b": [0, 1], "c0": 0.4}}"#);
    let (code, stdout, _) = alfven(&["check", "--config", &cfg]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["case_id"], 1);
    assert_eq!(v["pass"], true);
}

#[test]
fn check_reports_monotonicity_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.json", r#"{"profile": {"u": [0, 1], "b": [0, 1]}}"#);
    let (code, _, stderr) = alfven(&["check", "--config", &cfg]);
    assert_eq!(code, 1);
    assert!(stderr.contains("(M) violated"), "{stderr}");
}

#[test]
fn malformed_or_unknown_config_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = config(dir.path(), "bad.json", "{ not json");
    assert_eq!(alfven(&["check", "--config", &bad]).0, 2);
    let unknown = config(dir.path(), "unknown.json", r#"{"profile": {"u": [0], "b": [0, 1]}, "alfa": 1}"#);
    assert_eq!(alfven(&["check", "--config", &unknown]).0, 2);
    assert_eq!(alfven(&["check", "--config", "/nonexistent/x.json"]).0, 2);
    assert_eq!(alfven(&["nonsense"]).0, 2);
    assert_eq!(alfven(&["wronskian", "--scan", "1:0"]).0, 2);
}

#[test]
fn island_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("island");
    let (code, _, stderr) = alfven(&["island", "--alpha", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{stderr}");
    let (header, rows) = csv_rows(&out.join("island.csv"));
    assert_eq!(header[1], "b_gamma");
    let alpha: f64 = 2.0;
    let worst = rows
        .iter()
        .filter(|r| r[0].abs() >= 1e-3)
        .map(|r| (-r[1] - (alpha * (1.0 - r[0].abs())).sinh() / alpha.sinh()).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-6, "{worst}");
    assert!(out.join("summary.json").exists());
}

#[test]
fn wronskian_scan_vanishes_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w");
    let (code, _, stderr) = alfven(&["wronskian", "--scan=-0.1:0.1:5", "--jobs", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{stderr}");
    let (header, rows) = csv_rows(&out.join("wronskian.csv"));
    let col = header.iter().position(|h| h == "abs_inv_d").unwrap();
    let centre = rows.iter().find(|r| r[0] == 0.0).unwrap();
    assert_eq!(centre[col], 0.0);
    assert!(rows.iter().filter(|r| r[0] != 0.0).all(|r| r[col] > 0.0));
}

#[test]
fn json_emit_writes_single_document() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h");
    let (code, _, _) = alfven(&["homog", "--eps", "0.1", "--n", "257", "--emit", "json", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("homog.json")).unwrap()).unwrap();
    assert_eq!(doc["summary"]["n_nodes"], 257);
    assert!(doc["data"]["plus"]["phi"].as_array().unwrap().len() == 257);
}

#[test]
fn theta_reports_small_residual() {
    let (code, stdout, stderr) = alfven(&["theta", "--alpha", "1"]);
    assert_eq!(code, 0, "{stderr}");
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!(v["residual"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn compare_fails_honestly_before_convergence() {
    let (code, stdout, stderr) = alfven(&["compare", "--n", "256", "--t-final", "2"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("FAIL"), "{stderr}");
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["pass"], false);
}

#[test]
fn evolve_rejects_data_violating_boundary_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "e.json", r#"{"phi0": [1, 0, 0], "n": 64, "t_final": 1}"#);
    assert_eq!(alfven(&["evolve", "--config", &cfg]).0, 2);
}
