use std::path::{Path, PathBuf};
use std::process::Command;

use aimc::cli::{dispatch, EXIT_ERROR, EXIT_NO, EXIT_UNKNOWN, EXIT_YES};
use serde_json::Value;

const DETERMINED: &str = r#"{
  "vertices": ["s", "t", "f"],
  "transitions": [
    {"from": "s", "to": "t", "p": "1/3"},
    {"from": "s", "to": "f", "p": "2/3"},
    {"from": "t", "to": "t", "p": "1"},
    {"from": "f", "to": "f", "p": "1"}
  ],
  "query": {"source": "s", "target": "t", "relation": "ge", "threshold": "1/3"}
}"#;

const CHOICE: &str = r#"{
  "vertices": ["s", "t", "f"],
  "transitions": [
    {"from": "s", "to": "t", "lo": "0", "hi": "1"},
    {"from": "s", "to": "f", "lo": "0", "hi": "1"},
    {"from": "t", "to": "t", "p": "1"},
    {"from": "f", "to": "f", "p": "1"}
  ],
  "query": {"source": "s", "target": "t", "relation": "ge", "threshold": "1"}
}"#;

const BOXED: &str = r#"{
  "vertices": ["s", "t", "f"],
  "transitions": [
    {"from": "s", "to": "t", "lo": "1/4", "hi": "3/4"},
    {"from": "s", "to": "f", "lo": "1/4", "hi": "3/4"},
    {"from": "t", "to": "t", "p": "1"},
    {"from": "f", "to": "f", "p": "1"}
  ],
  "query": {"source": "s", "target": "t", "relation": "ge", "threshold": "3/4", "epsilon": "1/10"}
}"#;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = dispatch(std::iter::once("aimc").chain(args.iter().copied()), &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let r = run(&full);
    (r.code, serde_json::from_str(&r.stdout).unwrap_or_else(|e| panic!("{e}: {}", r.stdout)))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn reach_and_validate() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", DETERMINED);
    let m = m.to_str().unwrap();
    let r = run(&["reach", m]);
    assert_eq!(r.code, EXIT_YES);
    assert!(r.stdout.starts_with("P(s -> t) = 1/3 ~ 0.333"), "{}", r.stdout);
    let (code, v) = json(&["reach", m, "--to", "f"]);
    assert_eq!(code, EXIT_YES);
    assert_eq!(v["result"]["probability"], "2/3");
    assert_eq!(v["model_sha256"].as_str().unwrap().len(), 64);
    assert!(v.get("timing").is_none());
    assert_eq!(run(&["validate", m]).code, EXIT_YES);

    let bad = write(dir.path(), "bad.json", r#"{"vertices": ["s"], "transitions": [{"from": "s", "to": "s", "lo": "0", "hi": "1/2"}]}"#);
    let r = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_NO);
    assert!(r.stdout.contains("row cannot sum to 1"));
}

#[test]
fn structure_and_qual() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", CHOICE);
    let (_, v) = json(&["structure", m.to_str().unwrap()]);
    assert_eq!(v["result"]["kind"], "uncertain");
    assert_eq!(v["result"]["optional_edges"].as_array().unwrap().len(), 2);

    let witness = dir.path().join("w.json");
    let (code, v) = json(&["qual", m.to_str().unwrap(), "--witness", witness.to_str().unwrap()]);
    assert_eq!(code, EXIT_YES);
    assert_eq!(v["result"]["decision"], true);
    let (wm, _) = aimc::model::parse_document(&std::fs::read_to_string(&witness).unwrap()).unwrap();
    assert!(wm.is_fully_determined());

    let r = run(&["qual", m.to_str().unwrap(), "--threshold", "1/2"]);
    assert_eq!(r.code, EXIT_ERROR);
    assert!(r.stderr.starts_with("error: "));
}

#[test]
fn approx_and_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", BOXED);
    let m = m.to_str().unwrap();
    let (code, v) = json(&["approx", m]);
    assert_eq!(code, EXIT_YES);
    assert_eq!(v["result"]["decision"], "accept");
    assert_eq!(run(&["approx", m, "--threshold", "17/20"]).code, EXIT_NO);
    let r = run(&["approx", m, "--budget", "2"]);
    assert_eq!(r.code, EXIT_ERROR);
    assert!(r.stderr.contains("budget"), "{}", r.stderr);

    let (code, v) = json(&["oracle", m, "--resolution", "4"]);
    assert_eq!(code, EXIT_YES);
    assert_eq!(v["result"]["best_prob"], "3/4");
    assert_eq!(v["result"]["objective"], "max");
    let (_, v) = json(&["oracle", m, "--relation", "le", "--mode", "sample", "--count", "20", "--denominator", "4"]);
    assert_eq!(v["result"]["best_prob"], "1/4");
    assert_eq!(v["counters"]["evaluations"], 20);
}

#[test]
fn etr_script_and_solver_errors() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", BOXED);
    let out = dir.path().join("q.smt2");
    let r = run(&["etr", m.to_str().unwrap(), "--solver", "", "--out", out.to_str().unwrap()]);
    // an empty template is rejected
    assert_eq!(r.code, EXIT_ERROR);
    let script = std::fs::read_to_string(&out).unwrap();
    assert!(script.contains("(set-logic QF_NRA)"));
    let (_, v) = json(&["etr", m.to_str().unwrap(), "--mode", "full", "--solver", "/bin/false {file}"]);
    assert_eq!(v["exit_code"], EXIT_UNKNOWN);
    assert_eq!(v["result"]["variables"], 2 + 3);
    // the fixed encoding writes s -> f as the rest of its row
    let (_, v) = json(&["etr", m.to_str().unwrap(), "--solver", "/bin/false {file}"]);
    assert_eq!(v["result"]["variables"], 1 + 2);
}

#[test]
fn gadgets_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = write(dir.path(), "f.cnf", "p cnf 2 2\n1 2 0\n-1 0\n");
    let out = dir.path().join("sat.json");
    let r = run(&["gadget", "sat", "--cnf", cnf.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_YES);
    assert_eq!(run(&["qual", out.to_str().unwrap()]).code, EXIT_YES);

    let out = dir.path().join("sq.json");
    let args = ["gadget", "sqrtsum", "--r", "4", "--k", "1", "--M", "4", "--N", "32", "--x-lo", "1/8", "--x-hi", "7/8"];
    let mut with_out = args.to_vec();
    with_out.extend(["--out", out.to_str().unwrap()]);
    assert_eq!(run(&with_out).code, EXIT_YES);
    let (_, v) = json(&args);
    assert_eq!(v["result"]["parameters"]["beta"][0], "8/27");
    assert_eq!(v["result"]["vertices"], 15);
    let (_, v) = json(&["oracle", out.to_str().unwrap(), "--from", "g1.a", "--threshold", "0", "--resolution", "8"]);
    assert_eq!(v["result"]["best_prob"], "59/432");

    let poly = write(dir.path(), "p.json", r#"{"vars": ["x"], "monomials": [{"coef": "1", "exponents": [1]}]}"#);
    let r = run(&["gadget", "poly", "--poly", poly.to_str().unwrap(), "--tau", "2"]);
    assert_eq!(r.code, EXIT_ERROR);
    assert_eq!(run(&["gadget", "poly", "--poly", poly.to_str().unwrap(), "--tau", "1/2"]).code, EXIT_YES);
}

#[test]
fn json_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", BOXED);
    let m = m.to_str().unwrap();
    for args in [
        vec!["--json", "approx", m],
        vec!["--json", "oracle", m, "--mode", "sample", "--count", "500"],
    ] {
        let base = run(&args).stdout;
        assert_eq!(run(&args).stdout, base);
        for jobs in ["1", "4"] {
            let mut a = args.clone();
            a.extend(["--jobs", jobs]);
            assert_eq!(run(&a).stdout, base);
        }
    }
}

#[test]
fn errors_and_usage() {
    let r = run(&["reach", "/nonexistent/model.json"]);
    assert_eq!(r.code, EXIT_ERROR);
    let (code, v) = json(&["reach", "/nonexistent/model.json"]);
    assert_eq!(code, EXIT_ERROR);
    assert_eq!(v["exit_code"], EXIT_ERROR);
    assert!(v["error"].is_string());
    assert_eq!(run(&["frobnicate"]).code, EXIT_ERROR);
    assert_eq!(run(&["--help"]).code, EXIT_YES);
}

#[test]
fn binary_reads_budget_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", BOXED);
    let out = Command::new(env!("CARGO_BIN_EXE_aimc"))
        .args(["approx", m.to_str().unwrap()])
        .env("AIMC_BUDGET", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_ERROR));
    let out = Command::new(env!("CARGO_BIN_EXE_aimc"))
        .args(["--json", "--timing", "approx", m.to_str().unwrap()])
        .env_remove("AIMC_BUDGET")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_YES));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["timing"]["elapsed_ms"].is_number());
}
