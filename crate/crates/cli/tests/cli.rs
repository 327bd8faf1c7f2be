use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn trilocal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trilocal"))
        .args(args)
        .env_remove("TRILOCAL_THREADS")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn violation_report_for_ghz_symmetric_point() {
    let r = report(&trilocal(&["violation", "--family", "ghz-symmetric", "--p1", "0.3", "--p2", "0.4", "--restarts", "8"]));
    for key in ["config", "results", "version", "timings"] {
        assert!(r.get(key).is_some(), "{key}");
    }
    let tri = &r["results"][0]["trilocal"];
    assert!((tri["score"].as_f64().unwrap() - 16f64.cbrt() * 0.3).abs() < 1e-3);
    assert_eq!(tri["verdict"], "no violation found");
    assert_eq!(tri["i_values"]["k0"].as_object().unwrap().len(), 4);
    assert_eq!(r["config"]["seed"], 0);
    assert_eq!(r["config"]["restarts"], 8);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"family": "gghz", "alpha": 0.1, "restarts": 4}"#);
    let r = report(&trilocal(&["violation", "--config", &cfg, "--alpha", "0.6"]));
    assert_eq!(r["config"]["alpha"], 0.6);
    assert_eq!(r["config"]["restarts"], 4);
    assert_eq!(r["results"][0]["trilocal"]["verdict"], "violation");
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "u.json", r#"{"family": "gghz", "alpah": 0.1}"#);
    for args in [
        vec!["violation", "--config", unknown.as_str()],
        vec!["violation", "--config", "/nonexistent/config.json"],
        vec!["violation", "--family", "gghz"],
        vec!["violation", "--family", "gghz", "--alpha", "2.0"],
        vec!["nlocal", "--family", "ghz", "--kind", "bilocal"],
        vec!["violation", "--bogus-flag"],
    ] {
        assert_eq!(trilocal(&args).status.code(), Some(2), "{args:?}");
    }
    let out = Command::new(env!("CARGO_BIN_EXE_trilocal"))
        .args(["lhv-check", "--r-step", "0.5"])
        .env("TRILOCAL_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_bracket_exits_with_3() {
    let out = trilocal(&["threshold", "--family", "depolarized", "--lo", "0", "--hi", "0.5", "--grid-points", "3", "--restarts", "2"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn threshold_for_depolarized_sources() {
    let r = report(&trilocal(&["threshold", "--width", "1e-3", "--restarts", "4"]));
    let c = r["results"][0]["critical"].as_f64().unwrap();
    assert!((c - 2f64.powf(-1.0 / 3.0)).abs() < 1e-3, "{c}");
    assert_eq!(r["config"]["family"], "depolarized");
    assert_eq!(r["config"]["mode"], "joint");
}

#[test]
fn scan_writes_csv_with_header() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("scan.csv");
    let r = report(&trilocal(&[
        "scan", "--family", "gghz", "--parameter", "alpha", "--from", "0", "--to", "0.785398", "--steps", "3",
        "--restarts", "4", "--csv", csv.to_str().unwrap(),
    ]));
    assert_eq!(r["results"].as_array().unwrap().len(), 3);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("parameter,value,score,local_score,bound,violated"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn lhv_check_is_tight() {
    let r = report(&trilocal(&["lhv-check"]));
    let rows = r["results"].as_array().unwrap();
    assert_eq!(rows.len(), 22);
    for row in &rows[..21] {
        assert!((row["trilocal_score"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert!(row["i_value_deviation"].as_f64().unwrap() < 1e-12);
    }
    assert_eq!(rows[21]["max_local_score"], 1.0);
}

#[test]
fn nlocal_bilocal_reaches_sqrt2() {
    let r = report(&trilocal(&["nlocal", "--n", "2", "--family", "ghz", "--restarts", "4"]));
    let s = r["results"][0]["optimum"]["score"].as_f64().unwrap();
    assert!((s - 2f64.sqrt()).abs() < 1e-3);
}

#[test]
fn swap_report_with_functional_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "f.json",
        r#"{"scenario": [3, 2, 2], "bound": 0.5, "terms": [{"a": 0, "b": 0, "c": 0, "x": 0, "y": 0, "z": 0, "coeff": 1.0}]}"#,
    );
    let out = dir.path().join("swap.json");
    let run = trilocal(&[
        "swap", "--family", "amplitude-damped", "--gamma", "0.2", "--functional", &f, "--output", out.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let rows = r["results"].as_array().unwrap();
    assert_eq!(rows.len(), 16);
    for row in rows {
        for cut in ["A|DT", "D|AT", "T|AD"] {
            assert!(row["negativity"][cut].as_f64().unwrap() <= 1e-10);
        }
        assert_eq!(row["separability"]["criterion1_satisfied"], true);
        assert!(row["bell"]["value"].is_number());
    }

    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"scenario": [3, 2, 2], "bound": 0.5, "terms": [], "note": "x"}"#,
    );
    let run = trilocal(&["swap", "--family", "ghz", "--functional", &bad]);
    assert_eq!(run.status.code(), Some(2));
}
