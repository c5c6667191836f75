use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn qamp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qamp"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = qamp(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn build_musk(dir: &TempDir) -> String {
    let idx = dir.path().join("idx");
    ok(&[
        "build",
        "--graph",
        fixture("musk.nt").to_str().unwrap(),
        "--vectors",
        fixture("musk.vec").to_str().unwrap(),
        "--out",
        idx.to_str().unwrap(),
    ]);
    idx.to_str().unwrap().to_string()
}

#[test]
fn interpreted_question_reproduces_worked_scores() {
    let dir = TempDir::new().unwrap();
    let idx = build_musk(&dir);
    let out = ok(&[
        "ask",
        "--index",
        &idx,
        "--norm",
        "edge-mean",
        "--interpretation",
        fixture("musk-two-hop.json").to_str().unwrap(),
    ]);
    let v: Value = serde_json::from_str(&out).unwrap();
    let hop1 = &v["hops"][0][0];
    assert_eq!(hop1["uri"], "http://ex.org/Elon_Musk");
    assert!((hop1["score"].as_f64().unwrap() - 0.94).abs() < 1e-12);
    let last = &v["entities"][0];
    assert_eq!(last["uri"], "http://ex.org/Pretoria");
    assert!((last["score"].as_f64().unwrap() - (0.94 * 0.9 + 2.0) / 3.0).abs() < 1e-12);
    assert_eq!(v["value"], serde_json::json!(["http://ex.org/Pretoria"]));
}

#[test]
fn text_question_answers_founder() {
    let dir = TempDir::new().unwrap();
    let idx = build_musk(&dir);
    let out = ok(&[
        "ask",
        "--index",
        &idx,
        "--norm",
        "edge-mean",
        "Who founded Tesla?",
    ]);
    let v: Value = serde_json::from_str(&out).unwrap();
    // One entity row (Tesla, 1.0) and one property row whose foundedBy
    // candidate (0.8) carries the only edge.
    let musk = &v["entities"][0];
    assert_eq!(musk["uri"], "http://ex.org/Elon_Musk");
    assert!((musk["score"].as_f64().unwrap() - (0.8 + 1.0 + 1.0) / 3.0).abs() < 1e-12);
    assert_eq!(
        out,
        ok(&[
            "ask",
            "--index",
            &idx,
            "--norm",
            "edge-mean",
            "Who founded Tesla?"
        ])
    );
}

#[test]
fn eval_writes_report() {
    let dir = TempDir::new().unwrap();
    let idx = build_musk(&dir);
    let report = dir.path().join("report.json");
    ok(&[
        "eval",
        "--index",
        &idx,
        "--dataset",
        fixture("musk-dataset.json").to_str().unwrap(),
        "--mode",
        "gt",
        "--report",
        report.to_str().unwrap(),
    ]);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["macro"]["f"], 1.0);
    assert_eq!(v["per_question"].as_array().unwrap().len(), 4);
    for key in ["min", "median", "mean", "max"] {
        assert!(v["runtime"][key].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn build_is_byte_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let ia = build_musk(&a);
    let ib = build_musk(&b);
    for f in ["graph.json", "catalog.json"] {
        let x = std::fs::read(Path::new(&ia).join(f)).unwrap();
        let y = std::fs::read(Path::new(&ib).join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(qamp(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(qamp(&["ask", "--bogus", "x"]).status.code(), Some(1));
    assert_eq!(
        qamp(&["ask", "--index", "i", "--norm", "median", "q"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        qamp(&[
            "ablate",
            "--setup",
            "nope",
            "--index",
            "i",
            "--dataset",
            "d",
            "--report",
            "r"
        ])
        .status
        .code(),
        Some(1)
    );
    let out = qamp(&["frobnicate"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(qamp(&["--help"]).status.code(), Some(0));
}

#[test]
fn data_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing");
    let out = qamp(&["ask", "--index", missing.to_str().unwrap(), "q"]);
    assert_eq!(out.status.code(), Some(2));

    let idx = build_musk(&dir);
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"[{"id": "a", "question": "?", "type": "SELECT", "gold": true}]"#,
    )
    .unwrap();
    let out = qamp(&[
        "eval",
        "--index",
        &idx,
        "--dataset",
        bad.to_str().unwrap(),
        "--report",
        "r.json",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("record 0"));

    let graph = dir.path().join("bad.nt");
    std::fs::write(&graph, "<a> <b> .\n").unwrap();
    let out = qamp(&[
        "build",
        "--graph",
        graph.to_str().unwrap(),
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn synth_then_ablate() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(&[
        "synth",
        "--out",
        d.to_str().unwrap(),
        "--triples",
        "1000",
        "--questions",
        "30",
        "--seed",
        "4",
    ]);
    let idx = d.join("idx");
    ok(&[
        "build",
        "--graph",
        d.join("graph.nt").to_str().unwrap(),
        "--out",
        idx.to_str().unwrap(),
    ]);
    let report = d.join("r.json");
    let printed = ok(&[
        "ablate",
        "--setup",
        "predicates-parsed",
        "--index",
        idx.to_str().unwrap(),
        "--dataset",
        d.join("dataset.json").to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    let m: Value = serde_json::from_str(&printed).unwrap();
    assert!(m["f"].as_f64().unwrap() >= 0.0);
    assert!(report.exists());
}
