//! End-to-end runs of the `subexp` binary.

use std::path::{Path, PathBuf};
use std::process::Command;

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(format!("{name}.json"))
}

fn subexp(args: &[&str], out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_subexp"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn json(path: PathBuf) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn classify_example1_is_case_a() {
    let out = tempfile::tempdir().unwrap();
    let cfg = example("example1");
    let o = subexp(&["classify", "--config", cfg.to_str().unwrap()], out.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(out.path().join("classification.json"))["regime"]["case"], "CaseA");
}

#[test]
fn expand_example2_case1_term_set() {
    let out = tempfile::tempdir().unwrap();
    let cfg = example("example2_case1");
    let o = subexp(&["expand", "--config", cfg.to_str().unwrap()], out.path());
    assert!(o.status.success());
    let doc = json(out.path().join("expansion.json"));
    let terms: Vec<(f64, u64)> = doc["expansion"]["terms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| (t["scale"].as_f64().unwrap(), t["derivative_index"].as_u64().unwrap()))
        .collect();
    assert_eq!(terms, vec![(1.0, 0), (1.0, 1)]);
}

#[test]
fn exit_codes_by_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let base = std::fs::read_to_string(example("example3")).unwrap();
    let cases = [
        (base.replace("[1.0, 0.5, 0.25]", "[]"), 2, "schema"),
        (base.replace("\"shape\": 0.4", "\"shape\": 1.2"), 3, "regime"),
        (base.replace("\"order\": 3", "\"order\": 17"), 4, "smoothness"),
    ];
    for (text, code, kind) in cases {
        let cfg = write_config(dir.path(), &text);
        let out = dir.path().join(kind);
        let o = subexp(&["expand", "--config", cfg.to_str().unwrap()], &out);
        assert_eq!(o.status.code(), Some(code), "{kind}");
        let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
        assert_eq!(err["kind"], kind);
        assert_eq!(json(out.join("error.json")), err);
    }
}

#[test]
fn schema_error_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let base = std::fs::read_to_string(example("example3")).unwrap();
    let cfg = write_config(dir.path(), &base.replace("\"points\": 9", "\"points\": 9, \"step\": 2"));
    let o = subexp(&["evaluate", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["path"], "grid.step");
}

#[test]
fn compare_is_deterministic_across_thread_counts() {
    let cfg = example("example2_case2");
    let run = |threads: &str| {
        let out = tempfile::tempdir().unwrap();
        let o = Command::new(env!("CARGO_BIN_EXE_subexp"))
            .args(["compare", "--config", cfg.to_str().unwrap(), "--seed", "11"])
            .env("SUBEXP_OUT_DIR", out.path())
            .env("SUBEXP_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success());
        std::fs::read(out.path().join("comparison.csv")).unwrap()
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn report_reingestion_reproduces_evaluation() {
    let out = tempfile::tempdir().unwrap();
    let cfg = example("example5");
    assert!(subexp(&["evaluate", "--config", cfg.to_str().unwrap()], out.path()).status.success());
    let first = std::fs::read(out.path().join("evaluation.csv")).unwrap();
    let report = out.path().join("report.json");
    let again = out.path().join("again");
    let o = subexp(&["evaluate", "--report", report.to_str().unwrap()], &again);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(first, std::fs::read(again.join("evaluation.csv")).unwrap());
    assert_eq!(
        std::fs::read(&report).unwrap(),
        std::fs::read(again.join("report.json")).unwrap()
    );
}

#[test]
fn tampered_report_is_rejected() {
    let out = tempfile::tempdir().unwrap();
    let cfg = example("example3");
    assert!(subexp(&["evaluate", "--config", cfg.to_str().unwrap()], out.path()).status.success());
    let path = out.path().join("report.json");
    let mut doc = json(path.clone());
    let total = &mut doc["evaluation"]["rows"][0]["total"];
    *total = serde_json::json!(total.as_f64().unwrap() * 2.0);
    std::fs::write(&path, serde_json::to_vec(&doc).unwrap()).unwrap();
    let o = subexp(&["evaluate", "--report", path.to_str().unwrap()], &out.path().join("x"));
    assert_eq!(o.status.code(), Some(1));
}
