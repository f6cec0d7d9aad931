use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fockhtm"))
        .args(args)
        .env_remove("FOCKHTM_FRAME_CACHE")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> (Value, i32) {
    let out = run(args);
    let doc = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stderr));
    });
    (doc, out.status.code().unwrap())
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn table_s1_default_run_all_rows_pass() {
    let (doc, code) = json(&["table-s1"]);
    let rows = doc["data"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 9);
    let failing: Vec<String> = rows
        .iter()
        .filter(|r| r["pass"] != Value::Bool(true))
        .map(|r| format!("θ={} {}", r["theta_deg"], r["mismatched"]))
        .collect();
    assert!(failing.is_empty() && code == 0, "exit {code}, failing rows: {failing:?}");
}

#[test]
fn table_s1_reports_mismatch_exit_code() {
    let (doc, code) = json(&["table-s1"]);
    let failed = doc["data"]["summary"]["failed_cells"].as_i64().unwrap();
    assert_eq!(code, if failed == 0 { 0 } else { 2 });
}

#[test]
fn table_s1_formats_agree() {
    let (doc, _) = json(&["table-s1"]);
    let csv = String::from_utf8(run(&["table-s1", "--format", "csv"]).stdout).unwrap();
    let body: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    let headers: Vec<&str> = body[0].split(',').collect();
    assert_eq!(body.len(), 10);
    for (line, row) in body[1..].iter().zip(doc["data"]["rows"].as_array().unwrap()) {
        for (h, cell) in headers.iter().zip(line.split(',')) {
            let v = &row[*h];
            match v {
                Value::Number(x) => assert_eq!(cell.parse::<f64>().unwrap(), x.as_f64().unwrap(), "{h}"),
                Value::Bool(b) => assert_eq!(cell, b.to_string()),
                Value::String(s) => assert_eq!(cell, s),
                other => panic!("unexpected {other}"),
            }
        }
    }
}

#[test]
fn table_s1_extended_precision_rounds_to_table() {
    let (short, _) = json(&["table-s1"]);
    let (long, _) = json(&["table-s1", "--precision", "6"]);
    for (a, b) in short["data"]["rows"].as_array().unwrap().iter().zip(long["data"]["rows"].as_array().unwrap()) {
        for key in ["alpha_deg", "amp_20", "amp_11", "i_t", "i_p", "i_t_prime", "i_o"] {
            let rounded = (num(&b[key]) * 1e3).round() / 1e3;
            assert!((rounded - num(&a[key])).abs() < 1e-12, "{key}: {} vs {}", b[key], a[key]);
        }
    }
}

#[test]
fn fig3_theory_endpoints_and_monotonicity() {
    let (doc, code) = json(&["fig3-theory", "--alpha-step", "0.5"]);
    assert_eq!(code, 0);
    let rows = doc["data"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 181);
    assert!((num(&rows[0]["i_t_prime"]) - 0.5).abs() < 1e-10);
    let last = rows.last().unwrap();
    assert_eq!(num(&last["alpha_deg"]), 90.0);
    assert!(num(&last["i_t_prime"]).abs() < 1e-10);
    assert!((num(&last["i_o"]) - 2.0).abs() < 1e-10);
    for w in rows.windows(2) {
        assert!(num(&w[1]["i_t_prime"]) <= num(&w[0]["i_t_prime"]) + 1e-12);
    }
}

#[test]
fn conserve_exact_mode_has_no_deviation() {
    let (doc, code) = json(&["conserve"]);
    assert_eq!(code, 0);
    assert_eq!(doc["data"]["rows"].as_array().unwrap().len(), 72);
    let dev: f64 = doc["data"]["summary"]["max_exact_deviation"].as_str().unwrap().parse().unwrap();
    assert!(dev < 1e-10);
}

#[test]
fn conserve_spread_shrinks_with_shots() {
    let spread = |shots: &str| {
        let (doc, code) = json(&["conserve", "--thetas", "22.5,30", "--shots", shots]);
        assert_eq!(code, 0);
        let s = &doc["data"]["summary"];
        let t: f64 = s["tomography_spread"].as_str().unwrap().parse().unwrap();
        let d: f64 = s["direct_spread"].as_str().unwrap().parse().unwrap();
        (t, d)
    };
    let (t4, d4) = spread("10000");
    let (t5, d5) = spread("100000");
    assert!(t5 < t4, "{t5} vs {t4}");
    assert!(d5 < d4, "{d5} vs {d4}");
}

#[test]
fn conserve_haar_run_is_reproducible() {
    let args = ["conserve", "--unitaries", "haar", "--seed", "7", "--thetas", "15", "--shots", "2000"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["conserve", "--unitaries", "haar", "--seed", "8", "--thetas", "15", "--shots", "2000"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn invariants_of_maximally_mixed_state() {
    let dir = tempfile::tempdir().unwrap();
    let t = 1.0 / 3.0;
    let rho = format!("[[[{t},0],[0,0],[0,0]],[[0,0],[{t},0],[0,0]],[[0,0],[0,0],[{t},0]]]");
    let path = write(dir.path(), "mixed.json", &format!("{{\"photons\":2,\"modes\":2,\"rho\":{rho}}}"));
    let (doc, code) = json(&["invariants", "--state", &path]);
    assert_eq!(code, 0);
    assert!(num(&doc["data"]["summary"]["i_t_prime"]).abs() < 1e-10);
    assert_eq!(doc["data"]["rows"].as_array().unwrap().len(), 9);
}

#[test]
fn invariants_of_prepared_state_files_match_table() {
    let dir = tempfile::tempdir().unwrap();
    let (table, _) = json(&["table-s1", "--precision", "10"]);
    for row in table["data"]["rows"].as_array().unwrap() {
        let theta = row["theta_deg"].to_string();
        let out = run(&["prepare", "--theta", &theta]);
        assert_eq!(out.status.code(), Some(0));
        let path = write(dir.path(), "state.json", std::str::from_utf8(&out.stdout).unwrap());
        let (doc, code) = json(&["invariants", "--state", &path]);
        assert_eq!(code, 0);
        for key in ["i_t", "i_p", "i_t_prime", "i_o"] {
            assert!((num(&doc["data"]["summary"][key]) - num(&row[key])).abs() < 1e-9, "θ={theta} {key}");
        }
    }
}

#[test]
fn corrupt_state_file_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bad.json", "{\n  \"photons\": 2,\n  \"modes\": 2,\n  \"rho\": [[[1, 0]\n");
    let out = run(&["invariants", "--state", &path]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line"), "{err}");
    let path = write(dir.path(), "neg.json", "{\"photons\":1,\"modes\":2,\"rho\":[[[1.5,0],[0,0]],[[0,0],[-0.5,0]]]}");
    assert_eq!(run(&["invariants", "--state", &path]).status.code(), Some(3));
}

#[test]
fn bad_arguments_are_input_errors() {
    assert_eq!(run(&["prepare", "--theta", "60"]).status.code(), Some(3));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(3));
    assert_eq!(run(&["tomo-simulate", "--unitary", "9"]).status.code(), Some(3));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn tomography_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out_str = out_dir.display().to_string();
    let sim = run(&["tomo-simulate", "--theta", "22.5", "--unitary", "1", "--shots", "200000", "--out", &out_str]);
    assert_eq!(sim.status.code(), Some(0));
    let counts = out_dir.join("tomo-simulate.json").display().to_string();
    for model in ["ideal", "splitting"] {
        let sim = run(&["tomo-simulate", "--detector-model", model, "--unitary", "3"]);
        let path = write(dir.path(), &format!("{model}.json"), std::str::from_utf8(&sim.stdout).unwrap());
        let (doc, code) = json(&["tomo-reconstruct", "--counts", &path]);
        assert_eq!(code, 0);
        assert!(num(&doc["data"]["summary"]["fidelity"]) > 0.99, "{model}");
    }
    let (doc, code) = json(&["tomo-reconstruct", "--counts", &counts, "--method", "cholesky-refined"]);
    assert_eq!(code, 0);
    assert!(num(&doc["data"]["summary"]["fidelity"]) > 0.995);
    assert!((num(&doc["data"]["summary"]["i_t_prime"]) - 4.0 / 9.0).abs() < 0.02);
    assert_eq!(doc["data"]["result"]["method"], "cholesky_refined");
}

#[test]
fn identical_configs_give_identical_bytes() {
    for args in [
        vec!["tomo-simulate", "--seed", "11", "--shots", "5000"],
        vec!["sample-u2", "--seed", "4", "--count", "3", "--format", "csv"],
        vec!["dip-fit", "--seed", "2"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let (a, _) = json(&["tomo-simulate", "--seed", "11", "--shots", "5000"]);
    let (b, _) = json(&["tomo-simulate", "--seed", "12", "--shots", "5000"]);
    assert_ne!(a["manifest"]["config_hash"], b["manifest"]["config_hash"]);
    assert_eq!(a["manifest"]["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(a["manifest"]["master_seed"], 11);
}

#[test]
fn sample_u2_angles_reproduce_samples() {
    let (doc, code) = json(&["sample-u2", "--count", "5"]);
    assert_eq!(code, 0);
    for row in doc["data"]["rows"].as_array().unwrap() {
        let r: f64 = row["residual"].as_str().unwrap().parse().unwrap();
        assert!(r < 1e-8);
    }
}

#[test]
fn dip_fit_recovers_visibility() {
    let (doc, code) = json(&["dip-fit"]);
    assert_eq!(code, 0);
    assert!((num(&doc["data"]["summary"]["visibility"]) - 0.968).abs() < 0.05 * 0.968);
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "few.csv", "x,y\n0,0.1\n1,0.5\n2,1\n");
    assert_eq!(run(&["dip-fit", "--input", &path]).status.code(), Some(3));
}

#[test]
fn frame_cache_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_fockhtm"))
        .args(["prepare"])
        .env("FOCKHTM_FRAME_CACHE", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let cached: Vec<_> = std::fs::read_dir(dir.path()).unwrap().flatten().collect();
    assert_eq!(cached.len(), 1);
    assert!(cached[0].file_name().to_string_lossy().starts_with("frame-"));
    let again = Command::new(env!("CARGO_BIN_EXE_fockhtm"))
        .args(["prepare"])
        .env("FOCKHTM_FRAME_CACHE", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.stdout, again.stdout);
}
