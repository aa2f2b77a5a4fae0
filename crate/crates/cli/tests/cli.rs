use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;

use adshiggs::domains::ChartGrid;
use serde_json::{json, Value};
use tempfile::TempDir;

fn adshiggs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adshiggs"))
        .args(args)
        .output()
        .expect("spawn adshiggs")
}

fn adshiggs_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adshiggs"))
        .args(args)
        .env("ADSHIGGS_THREADS", threads)
        .output()
        .expect("spawn adshiggs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &TempDir, name: &str, v: &Value) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, serde_json::to_string_pretty(v).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

fn fuchsian_octagon(n: usize) -> Value {
    json!({
        "schema": 1,
        "domain": { "kind": "octagon", "n": n },
        "higgs": { "alpha": "1", "beta": "0", "gamma": "0", "delta": "0", "e1": 2, "e2": 0 },
        "metric": { "h": "1", "k": "1 - z*conj(z)" }
    })
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn identities_certify_by_default() {
    let o = adshiggs(&["identities"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = stdout_json(&o);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["all_certified"], true);
    let certs = v["certificates"].as_array().unwrap();
    assert_eq!(certs.len(), 7);
    for c in certs {
        assert_eq!(c["certified"], true);
        for check in c["checks"].as_array().unwrap() {
            assert_eq!(check["residual_terms"], 0);
        }
    }
    assert_eq!(v["ordering"]["displayed_slot"], json!([0, 1, 2, 3, 4, 5]));
    assert_eq!(v["ordering"]["sign"], 1);
}

#[test]
fn injected_faults_fail_with_the_named_identity() {
    let names = [
        "unit-structure",
        "metric-entries",
        "det-g",
        "volume-integrand",
        "fiber-geodesic",
        "gauss-map",
        "domination-lemma",
    ];
    for name in names {
        let o = adshiggs(&["identities", "--inject-fault", name]);
        assert_eq!(code(&o), 2, "{name}");
        assert!(stderr(&o).contains(name), "{}", stderr(&o));
        let v = stdout_json(&o);
        for c in v["certificates"].as_array().unwrap() {
            assert_eq!(c["certified"], c["identity"] != name, "{name}");
        }
    }
    let o = adshiggs(&["identities", "--inject-fault", "no-such-identity"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn identities_write_to_file() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("certs.json");
    let o = adshiggs(&["identities", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let file: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(file, stdout_json(&o));
}

#[test]
fn bundled_fuchsian_volume() {
    let o = adshiggs(&["report", "fuchsian-genus2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = stdout_json(&o);
    let vol = &v["claims"]["volume"];
    let measured = vol["measured"].as_f64().unwrap();
    let predicted = vol["predicted"].as_f64().unwrap();
    assert!((measured - 19.74).abs() < 5e-3, "{measured}");
    assert!((predicted - 19.7392).abs() < 1e-4);
    assert!((vol["ratio"].as_f64().unwrap() - 1.0).abs() < 1e-2);
    assert!(vol["anchor"].is_string());
    let claims = v["claims"].as_object().unwrap();
    for (name, c) in claims {
        assert!(c["anchor"].is_string(), "{name}");
    }
    assert_eq!(claims["euler"]["first"]["nearest_even"], 2);
    assert_eq!(claims["euler"]["consistent"], true);
    assert_eq!(claims["domination"]["dominated"], true);
    assert_eq!(claims["transversality"]["transverse"], true);
    assert_eq!(claims["conformality"]["minimal"], true);
    assert_eq!(claims["splitting"]["classes"], json!([2, 2]));
    for f in claims["fibers"]["nodes"].as_array().unwrap() {
        assert!(f["timelike_defect"].as_f64().unwrap() < 1e-12);
    }
}

#[test]
fn bundled_torus_solves_to_the_constant_balance() {
    let o = adshiggs(&["solve", "torus-constants"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = stdout_json(&o);
    // α = 2, β = 1/2
    let k = &v["k"];
    for key in ["min", "max", "mean"] {
        assert!((k[key].as_f64().unwrap() - 2.0).abs() < 1e-10);
    }
    let h_expected = v["balance"]["h"].as_f64().unwrap();
    assert!((v["h"]["mean"].as_f64().unwrap() - h_expected).abs() < 1e-10);
    assert!(v["solver"]["flatness_residual"].as_f64().unwrap() <= 1e-10);

    let o = adshiggs(&["report", "torus-constants.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = stdout_json(&o);
    assert!(v["solver"]["iterations"].as_u64().unwrap() >= 1);
    assert_eq!(v["claims"]["euler"]["consistent"], true);
}

#[test]
fn malformed_expression_reports_position() {
    let dir = TempDir::new().unwrap();
    let mut cfg = fuchsian_octagon(64);
    cfg["higgs"]["alpha"] = json!("1 + (z * 2");
    let path = write_config(&dir, "bad.json", &cfg);
    let o = adshiggs(&["report", &path]);
    assert_eq!(code(&o), 4);
    let err = stderr(&o);
    assert!(err.contains("higgs.alpha") && err.contains("position 10"), "{err}");
}

#[test]
fn malformed_json_reports_line_and_column() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\n  \"schema\": 1,\n  \"domain\": {\"kind\": \"torus\",}\n}").unwrap();
    let o = adshiggs(&["report", path.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("line 3, column"), "{}", stderr(&o));
}

#[test]
fn config_errors_exit_four() {
    let dir = TempDir::new().unwrap();
    let mut odd = fuchsian_octagon(64);
    odd["higgs"]["e1"] = json!(3);
    let mut wrong_schema = fuchsian_octagon(64);
    wrong_schema["schema"] = json!(2);
    let mut not_torus = fuchsian_octagon(64);
    not_torus["metric"] = json!("solve");
    let mut negative = fuchsian_octagon(64);
    negative["metric"]["k"] = json!("z*conj(z) - 1");
    for (name, cfg) in [("odd", odd), ("schema", wrong_schema), ("not-torus", not_torus), ("negative", negative)] {
        let path = write_config(&dir, &format!("{name}.json"), &cfg);
        let o = adshiggs(&["report", &path]);
        assert_eq!(code(&o), 4, "{name}: {}", stderr(&o));
        assert!(stderr(&o).starts_with("adshiggs: config error"), "{name}");
    }
    assert_eq!(code(&adshiggs(&["report", "no-such-config"])), 4);
    assert_eq!(code(&adshiggs(&["frobnicate"])), 4);
    assert_eq!(code(&adshiggs(&["fields", "fuchsian-genus2"])), 4);
    assert_eq!(code(&adshiggs_env(&["identities"], "zero")), 4);
}

#[test]
fn solver_failures_exit_three() {
    let dir = TempDir::new().unwrap();
    let torus = |alpha: &str, beta: &str, max_iter: usize| {
        json!({
            "schema": 1,
            "domain": { "kind": "torus", "n": 16, "modulus": [0.0, 1.0] },
            "higgs": { "alpha": alpha, "beta": beta, "gamma": "1", "delta": "1", "e1": 0, "e2": 0 },
            "metric": "solve",
            "params": { "max_iter": max_iter, "tolerance": 1e-14 }
        })
    };
    // exactly one of α, β vanishing obstructs a solution
    let path = write_config(&dir, "obstructed.json", &torus("1", "0", 25));
    let o = adshiggs(&["solve", &path]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let path = write_config(&dir, "short.json", &torus("100", "0.01", 1));
    let o = adshiggs(&["report", &path]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("did not converge"));
}

#[test]
fn fuchsian_fields_match_substitution() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "f.json", &fuchsian_octagon(96));
    let out = dir.path().join("out");
    let o = adshiggs(&["fields", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary = stdout_json(&o);

    let grid = Arc::new(ChartGrid::genus2_octagon(96).unwrap());
    let support = (0..grid.len()).filter(|&i| grid.in_support(i)).count();
    for f in summary["files"].as_array().unwrap() {
        let name = f["name"].as_str().unwrap();
        let (header, rows) = read_csv(&out.join(name));
        assert_eq!(&header[..2], ["x", "y"]);
        assert_eq!(rows.len() as u64, f["rows"].as_u64().unwrap(), "{name}");
        if name != "fz_wedge.csv" {
            assert_eq!(rows.len(), support, "{name}");
        }
    }
    let (header, rows) = read_csv(&out.join("vol_g1.csv"));
    assert_eq!(header, ["x", "y", "vol"]);
    for r in rows.iter().step_by(97) {
        let expected = 4.0 / (1.0 - r[0] * r[0] - r[1] * r[1]).powi(2);
        assert!((r[2] - expected).abs() <= 1e-12 * expected);
    }
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(out.join("grid.json")).unwrap()).unwrap();
    assert_eq!(meta["schema"], 1);
    assert_eq!(meta["node_count"], grid.len());
}

#[test]
fn zero_field_dumps_are_zero() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "schema": 1,
        "domain": { "kind": "octagon", "n": 64 },
        "higgs": { "alpha": 0, "beta": 0, "gamma": 0, "delta": 0, "e1": 0, "e2": 0 },
        "metric": { "h": 1, "k": 1 }
    });
    let cfg = write_config(&dir, "zero.json", &cfg);
    let out = dir.path().join("out");
    let o = adshiggs(&["fields", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for name in ["g1.csv", "g2.csv", "vol_g1.csv", "vol_g2.csv", "pfaffian.csv", "xw_minus_yz.csv", "fz_wedge.csv"] {
        let (_, rows) = read_csv(&out.join(name));
        assert!(!rows.is_empty(), "{name}");
        assert!(rows.iter().all(|r| r[2..].iter().all(|v| *v == 0.0)), "{name}");
    }
}

#[test]
fn disk_report_omits_closed_surface_claims() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "schema": 1,
        "domain": { "kind": "disk", "n": 48, "radius": 0.6 },
        "higgs": { "alpha": "1", "beta": "1 + z", "gamma": "z", "delta": "1", "e1": 0, "e2": 0 },
        "metric": { "h": "1 + 0.2*z*conj(z)", "k": 1.5 }
    });
    let cfg = write_config(&dir, "disk.json", &cfg);
    let o = adshiggs(&["report", &cfg]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = stdout_json(&o);
    let c = &v["claims"];
    assert!(c["euler"]["first"].is_null() && c["euler"]["consistent"].is_null());
    assert!(c["volume"].get("measured").is_none());
    assert_eq!(c["conformality"]["minimal"], false);
    // αβ − γδ ≡ 1
    assert!((c["pfaffian"]["sup"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(c["conformality"]["wedge_defect"].as_f64().unwrap() < 1e-10);
}

#[test]
fn inline_samples_match_expressions() {
    let dir = TempDir::new().unwrap();
    let n = 8;
    let base = |alpha: Value| {
        json!({
            "schema": 1,
            "domain": { "kind": "torus", "n": n, "modulus": [0.0, 1.0] },
            "higgs": { "alpha": alpha, "beta": "0.5", "gamma": "1", "delta": "2", "e1": 0, "e2": 0 },
            "metric": "solve"
        })
    };
    let samples = json!({ "re": vec![2.0; n * n], "im": vec![0.0; n * n] });
    let a = write_config(&dir, "a.json", &base(json!("2")));
    let b = write_config(&dir, "b.json", &base(samples));
    let ra = stdout_json(&adshiggs(&["solve", &a]));
    let rb = stdout_json(&adshiggs(&["solve", &b]));
    assert_eq!(ra["k"], rb["k"]);
    assert_eq!(ra["h"], rb["h"]);

    let short = json!({ "re": [1.0, 2.0] });
    let c = write_config(&dir, "c.json", &base(short));
    let o = adshiggs(&["solve", &c]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("higgs.alpha"));
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "f.json", &fuchsian_octagon(64));
    let one = adshiggs_env(&["report", &cfg], "1");
    let four = adshiggs_env(&["report", &cfg], "4");
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn report_writes_json_and_csv_alongside() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "f.json", &fuchsian_octagon(64));
    let out = dir.path().join("rep");
    let o = adshiggs(&["report", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(saved, stdout_json(&o));
    let files = saved["files"].as_array().unwrap();
    assert!(files.len() >= 8);
    for f in files {
        assert!(out.join(f["name"].as_str().unwrap()).is_file());
    }
}
