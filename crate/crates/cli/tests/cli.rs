use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn qrf(cmd: &str, config: &Value, dir: &Path, extra: &[&str]) -> Output {
    let cfg_path = dir.join(format!("{cmd}.json"));
    fs::write(&cfg_path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    Command::new(env!("CARGO_BIN_EXE_qrf"))
        .arg(cmd)
        .arg("--config")
        .arg(&cfg_path)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap()
}

fn vacuum() -> Value {
    json!({"type": "gaussian", "x0": 0, "p0": 0, "r": 0})
}

fn all_vacuum() -> Value {
    json!({
        "system_state": vacuum(),
        "frame_omega": vacuum(),
        "frame_T_prime": vacuum(),
        "apparatus_T": vacuum(),
        "scenarios": "all"
    })
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn audit_all_vacuum() {
    let dir = tempfile::tempdir().unwrap();
    let o = qrf("audit", &all_vacuum(), dir.path(), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "scenario,delta_q,delta_p,product,bound,slack,pass"
    );
    assert_eq!(lines.len(), 10);
    let expected = [0.5, 1.0, 0.5, 1.5, 2.0, 1.0, 1.5, 0.5, 1.0];
    for (line, e) in lines[1..].iter().zip(expected) {
        let cols: Vec<&str> = line.split(',').collect();
        let product: f64 = cols[3].parse().unwrap();
        assert!((product - e).abs() < 1e-3, "{line}");
        assert_eq!(cols[6], "true");
    }
}

#[test]
fn audit_json_matches_schema() {
    let dir = tempfile::tempdir().unwrap();
    let o = qrf(
        "audit",
        &all_vacuum(),
        dir.path(),
        &["--quiet", "--seed", "7"],
    );
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let report: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/report.json")).unwrap())
            .unwrap();
    assert_eq!(report["seed"], 7);
    let schema: Value = serde_json::from_str(include_str!("../schema/report.schema.json")).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).unwrap();
    assert!(compiled.is_valid(&report));
    let mut broken = report.clone();
    broken["reports"][0]["scenario"] = json!("BOGUS");
    assert!(!compiled.is_valid(&broken));
}

#[test]
fn audit_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut cfg = all_vacuum();
    cfg["system_state"] = json!({"type": "mixture", "components": [
        {"w": 0.4, "state": {"type": "hermite", "k": 2}},
        {"w": 0.6, "state": {"type": "gaussian", "x0": 1.0, "p0": -0.5, "r": 0.3}}
    ]});
    cfg["seed"] = json!(42);
    assert_eq!(code(&qrf("audit", &cfg, a.path(), &[])), 0);
    assert_eq!(code(&qrf("audit", &cfg, b.path(), &[])), 0);
    for f in ["report.csv", "report.json"] {
        assert_eq!(
            fs::read(a.path().join("out").join(f)).unwrap(),
            fs::read(b.path().join("out").join(f)).unwrap()
        );
    }
}

#[test]
fn missing_apparatus_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({"system_state": vacuum(), "scenarios": ["SMEARED"]});
    let o = qrf("audit", &cfg, dir.path(), &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("MissingApparatusState"));
}

#[test]
fn all_without_apparatus_skips_smeared_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let o = qrf("audit", &json!({"system_state": vacuum()}), dir.path(), &[]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn grid_too_small_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = all_vacuum();
    cfg["frame_omega"] = json!({"type": "gaussian", "r": 2.0});
    cfg["grid"] = json!({"x_min": -10.0, "dx": 0.078125, "n": 256});
    let o = qrf("audit", &cfg, dir.path(), &[]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("GridTooSmall"));
}

#[test]
fn malformed_configs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for cfg in [
        json!({"system_state": {"type": "cat"}}),
        json!({"system_state": vacuum(), "scenarios": ["NOPE"]}),
        json!({"system_state": vacuum(), "surprise": 1}),
        json!({"system_state": {"type": "classical_point"}}),
        json!({"system_state": vacuum(), "grid": {"x_min": 0, "dx": 0.1, "n": 1000}}),
    ] {
        assert_eq!(code(&qrf("audit", &cfg, dir.path(), &[])), 2, "{cfg}");
    }
    let o = Command::new(env!("CARGO_BIN_EXE_qrf"))
        .args(["audit", "--config", "/nonexistent/config.json"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn fully_classical_frame_audit_passes() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = all_vacuum();
    cfg["frame_T_prime"] = json!({"type": "classical_point"});
    cfg["frame_omega"] = json!({"type": "classical_point"});
    assert_eq!(code(&qrf("audit", &cfg, dir.path(), &[])), 0);
}

fn read_husimi(path: &Path) -> Vec<(f64, f64, f64)> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let c: Vec<f64> = l.split(',').map(|v| v.parse().unwrap()).collect();
            (c[0], c[1], c[2])
        })
        .collect()
}

#[test]
fn husimi_vacuum_peak() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = all_vacuum();
    cfg["window"] = json!({"q_range": [-8, 8], "p_range": [-8, 8], "n_q": 64, "n_p": 64});
    let o = qrf("husimi", &cfg, dir.path(), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/husimi.csv")).unwrap();
    assert!(csv.starts_with("q,p,density\n"));
    let rows = read_husimi(&dir.path().join("out/husimi.csv"));
    assert_eq!(rows.len(), 64 * 64);
    let best = rows
        .iter()
        .cloned()
        .fold((0.0, 0.0, 0.0), |a, r| if r.2 > a.2 { r } else { a });
    assert!(best.0.abs() <= 0.125 && best.1.abs() <= 0.125);
    let expect = (-(best.0 * best.0 + best.1 * best.1) / 2.0).exp() / (2.0 * std::f64::consts::PI);
    assert!((best.2 - expect).abs() < 1e-6);
}

#[test]
fn husimi_displaced_state() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = all_vacuum();
    cfg["system_state"] = json!({"type": "gaussian", "x0": 2.0, "p0": 1.0, "r": 0});
    let o = qrf("husimi", &cfg, dir.path(), &[]);
    assert_eq!(code(&o), 0);
    let rows = read_husimi(&dir.path().join("out/husimi.csv"));
    let best = rows
        .iter()
        .cloned()
        .fold((0.0, 0.0, 0.0), |a, r| if r.2 > a.2 { r } else { a });
    assert!((best.0 - 2.0).abs() <= 0.0625 + 1e-12 && (best.1 - 1.0).abs() <= 0.0625 + 1e-12);
}

#[test]
fn husimi_window_too_small() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = all_vacuum();
    cfg["window"] = json!({"q_range": [-1, 1], "p_range": [-1, 1], "n_q": 16, "n_p": 16});
    let o = qrf("husimi", &cfg, dir.path(), &[]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("WindowTooSmall"));
}

#[test]
fn margins_defaults_and_excited_system() {
    let dir = tempfile::tempdir().unwrap();
    let o = qrf("margins", &all_vacuum(), dir.path(), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/margins.json")).unwrap())
            .unwrap();
    assert_eq!(m["pass"], true);
    for k in ["husimi", "joint"] {
        assert!(m[k]["q_l1"].as_f64().unwrap() < 1e-4);
        assert!(m[k]["p_l1"].as_f64().unwrap() < 1e-4);
    }
    let mut cfg = all_vacuum();
    cfg["system_state"] = json!({"type": "hermite", "k": 2});
    assert_eq!(code(&qrf("margins", &cfg, dir.path(), &["--quiet"])), 0);
}

#[test]
fn margins_detect_corrupted_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = all_vacuum();
    cfg["test_hooks"] = json!({"corrupt_kernel": true});
    let o = qrf("margins", &cfg, dir.path(), &[]);
    assert_eq!(code(&o), 1);
    let m: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/margins.json")).unwrap())
            .unwrap();
    assert_eq!(m["pass"], false);
}

#[test]
fn classical_limit_sweep_table() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = all_vacuum();
    cfg["r_values"] = json!([0, 0.5, 1, 1.5, 2, "inf"]);
    let o = qrf("classical-limit", &cfg, dir.path(), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r,scenario,product,bound"));
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    assert_eq!(rows.len(), 12);
    let sharp: Vec<f64> = rows
        .iter()
        .filter(|r| r[1] == "REL_SHARP")
        .map(|r| r[2].parse().unwrap())
        .collect();
    assert!(sharp[..5].windows(2).all(|w| w[1] > w[0]));
    assert!((sharp[0] - 1.5).abs() < 1e-6);
    assert!((sharp[5] - 0.5).abs() < 1e-6);
    let end = rows
        .iter()
        .find(|r| r[0] == "inf" && r[1] == "REL_SMEARED")
        .unwrap();
    assert!((end[2].parse::<f64>().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn classical_limit_empty_r_list() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = all_vacuum();
    cfg["r_values"] = json!([]);
    assert_eq!(code(&qrf("classical-limit", &cfg, dir.path(), &[])), 2);
}
