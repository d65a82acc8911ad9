use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn xplain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xplain"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn train(dir: &Path) -> String {
    let model = dir.join("model.json").display().to_string();
    let out = xplain(&["train", "--model", "tree", "--seed", "7", "--max-depth", "3", "--out", &model]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(summary["holdout_accuracy"].as_f64().unwrap() >= 0.9);
    model
}

#[test]
fn train_then_explain_shap_adds_up() {
    let dir = tempfile::tempdir().unwrap();
    let model = train(dir.path());
    let out = xplain(&[
        "explain", "--model", &model, "--method", "shap", "--instance", "[6.4, 3.2, 4.5, 1.5]", "--seed", "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["method"], "shap");
    assert_eq!(v["seed"], 2);
    let a = &v["result"]["attribution"];
    let t = a["target_class"].as_u64().unwrap() as usize;
    let sum: f64 = a["contributions"].as_array().unwrap().iter().map(|c| c.as_f64().unwrap()).sum();
    let p = v["result"]["prediction"]["probabilities"][t].as_f64().unwrap();
    assert!((a["base_value"].as_f64().unwrap() + sum - p).abs() <= 1e-9);
}

#[test]
fn same_seed_gives_identical_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let model = train(dir.path());
    for method in ["lime", "shap", "anchors", "cf"] {
        let args = [
            "explain", "--model", &model, "--method", method, "--instance", "[5.9, 3.0, 5.1, 1.8]", "--seed", "9",
        ];
        let (a, b) = (xplain(&args), xplain(&args));
        assert_eq!(a.status.code(), Some(0), "{method}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{method}");
    }
}

#[test]
fn predict_and_export_chart() {
    let dir = tempfile::tempdir().unwrap();
    let model = train(dir.path());
    let out = xplain(&["predict", "--model", &model, "--instance", "[5.1, 3.5, 1.4, 0.2]"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["class_name"], "setosa");

    let file = dir.path().join("why.json");
    let out = xplain(&[
        "export-chart", "--model", &model, "--reference", "why", "--instance", "[5.9, 3.0, 5.1, 1.8]",
        "--out", file.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let chart: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(chart["kind"], "waterfall");
    let cumulative = chart["series"][1]["values"].as_array().unwrap();
    assert!((cumulative.last().unwrap().as_f64().unwrap() - chart["total"].as_f64().unwrap()).abs() < 1e-9);

    let out = xplain(&["export-chart", "--model", &model, "--reference", "when", "--instance", "[5.9, 3.0, 5.1, 1.8]"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
}

#[test]
fn conformance_reports_nine_passes() {
    let out = xplain(&["conformance"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| l.starts_with("DF")).collect();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r.contains(" PASS ")));
    assert!(text.contains("9/9 passed"));

    let out = xplain(&["conformance", "--json"]);
    let rows: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 9);
}

#[test]
fn usage_and_domain_errors_have_distinct_exit_codes() {
    for args in [&["frobnicate"][..], &["explain", "--method", "shap"], &["train", "--out", "m.json", "--colour"]] {
        let out = xplain(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }
    let out = xplain(&["explain", "--model", "/nonexistent/model.json", "--method", "shap", "--instance", "[1,2,3,4]"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());

    let dir = tempfile::tempdir().unwrap();
    let model = train(dir.path());
    let out = xplain(&["explain", "--model", &model, "--method", "cf", "--instance", "[5.1, 3.5, 1.4, 0.2]", "--target-class", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("already the predicted class"));
    assert_eq!(xplain(&["--help"]).status.code(), Some(0));
}

#[test]
fn model_trained_on_other_data_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let model = train(dir.path());
    let csv = dir.path().join("other.csv");
    std::fs::write(&csv, "a,b,c,d,label\n1,2,3,4,x\n2,3,4,5,y\n3,4,5,6,x\n").unwrap();
    let out = xplain(&[
        "explain", "--model", &model, "--data", csv.to_str().unwrap(), "--method", "shap", "--instance", "[1,2,3,4]",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trained on dataset"));
}

#[test]
fn serve_honours_the_port_variable_and_rejects_bad_configs() {
    use std::io::{BufRead, BufReader, Read, Write};
    use std::process::Stdio;

    let example = concat!(env!("CARGO_MANIFEST_DIR"), "/xplain.example.toml");
    let mut child = Command::new(env!("CARGO_BIN_EXE_xplain"))
        .args(["serve", "--config", example])
        .env("XPLAIN_PORT", "0")
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut lines = BufReader::new(child.stderr.take().unwrap()).lines();
    let addr = loop {
        let line = lines.next().expect("server announces its address").unwrap();
        if let Some(a) = line.strip_prefix("listening on http://") {
            break a.to_string();
        }
    };
    let mut stream = std::net::TcpStream::connect(&addr).unwrap();
    write!(stream, "GET /api/model HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n").unwrap();
    let mut raw = String::new();
    stream.read_to_string(&mut raw).unwrap();
    child.kill().unwrap();
    let _ = child.wait();
    assert!(raw.starts_with("HTTP/1.1 200"), "{raw}");
    assert!(raw.contains("\"kind\":\"decision_tree\""));

    let out = Command::new(env!("CARGO_BIN_EXE_xplain"))
        .args(["serve"])
        .env("XPLAIN_PORT", "eighty")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[server]\nprot = 1\n").unwrap();
    let out = xplain(&["serve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field `prot`"));
}
