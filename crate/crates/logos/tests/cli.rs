mod common;

use std::process::{Command, Output};

use common::{apply_hint, bin, corpus_dir, misspelled_trace, StubServer};
use serde_json::Value;

fn logos(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("run logos")
}

fn program(stem: &str) -> String {
    corpus_dir().join(format!("{}.json", stem)).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{}: {}", e, stdout(o)))
}

#[test]
fn verify_trace_one_on_both_backends() {
    let o = logos(&["verify", &program("trace1_sotomayor"), "--backend", "both"]);
    assert_eq!(stdout(&o), "UNSAT (False)\n");
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_trace_two_is_true() {
    let o = logos(&["verify", &program("trace2_cherokee")]);
    assert!(stdout(&o).starts_with("SAT (True)\n"), "{}", stdout(&o));
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn verify_json_carries_base_consistency() {
    let o = logos(&["verify", &program("hse1_ladder"), "--format", "json", "--backend", "enum"]);
    let v = json(&o);
    assert_eq!(v["base_consistent"], false);
    assert!(v["answer"].is_null());
    assert_eq!(v["verifications"].as_array().unwrap().len(), 2);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn emit_smt_prints_a_script() {
    let o = logos(&["emit-smt", &program("unsat04_cnf")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("(set-logic ALL)") && text.contains("(check-sat)"), "{}", text);
}

#[test]
fn optimize_reports_the_optimum() {
    let o = logos(&["optimize", &program("sat10_assignment"), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["optimization"]["status"], "OPTIMAL");
    assert_eq!(v["optimization"]["objectives"][0]["value"]["exact"], "80");
    let o = logos(&["optimize", &program("unsat09_impossible_optimization")]);
    assert_eq!(stdout(&o), "INFEASIBLE\n");
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn check_reports_diagnostics_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, misspelled_trace()).unwrap();
    let o = logos(&["check", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(2));
    let v = json(&o);
    assert_eq!(v["diagnostics"][0]["category"], "UndefinedSymbol");
    assert_eq!(v["diagnostics"][0]["path"], "/verifications/0/constraint");
    let o = logos(&["check", &program("trace1_sotomayor")]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn malformed_json_is_a_syntax_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\"sorts\": [").unwrap();
    let o = logos(&["verify", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(2));
    let v = json(&o);
    assert_eq!(v["diagnostics"][0]["category"], "JsonSyntax");
    assert!(v["verifications"].as_array().is_none_or(|a| a.is_empty()));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(logos(&[]).status.code(), Some(2));
    assert_eq!(logos(&["verify"]).status.code(), Some(2));
    assert_eq!(logos(&["verify", "x.json", "--backend", "cvc"]).status.code(), Some(2));
    let o = logos(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn missing_file_and_missing_solver_exit_three() {
    assert_eq!(logos(&["verify", "/nonexistent/program.json"]).status.code(), Some(3));
    let o = logos(&["verify", &program("sat01_arithmetic"), "--solver-cmd", "/nonexistent/z3"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("SolverFailure"), "{}", stdout(&o));
}

#[test]
fn int_window_bounds_the_enumerator() {
    let narrow = logos(&["verify", &program("sat01_arithmetic"), "--backend", "enum", "--int-window=0:2"]);
    assert!(stdout(&narrow).starts_with("UNKNOWN"), "{}", stdout(&narrow));
    assert_eq!(narrow.status.code(), Some(3));
    let wide = logos(&["verify", &program("sat01_arithmetic"), "--backend", "enum", "--int-window=0:3"]);
    assert_eq!(stdout(&wide), "SAT (True)\n  x = 3\n");
    assert_eq!(logos(&["verify", &program("sat01_arithmetic"), "--int-window", "9:1"]).status.code(), Some(2));
}

#[test]
fn diff_agrees_on_the_ladder() {
    let o = logos(&["diff", &program("hse1_ladder"), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v = json(&o);
    let rows = v["comparisons"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["outcome"] == "agree"), "{}", v);
}

#[test]
fn bench_prints_summary_json() {
    let dir = corpus_dir();
    let labels = dir.join("labels.json");
    let o = logos(&[
        "bench",
        dir.to_str().unwrap(),
        "--labels",
        labels.to_str().unwrap(),
        "--format",
        "json",
        "--backend",
        "enum",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["summary"]["total"], 24);
    assert_eq!(v["summary"]["compiled"], 24);
    assert_eq!(v["summary"]["matched"], 24);
    assert_eq!(v["summary"]["accuracy"]["exact"], "1");
    assert_eq!(v["cases"].as_array().unwrap().len(), 24);
}

#[test]
fn repair_command_uses_the_reviser() {
    let server = StubServer::start(apply_hint);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, misspelled_trace()).unwrap();
    let o = logos(&[
        "repair",
        path.to_str().unwrap(),
        "--reviser-url",
        &server.url,
        "--format",
        "json",
        "--backend",
        "enum",
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    let v = json(&o);
    assert_eq!(v["attempts_used"], 2);
    assert_eq!(v["answer"], false);
    assert_eq!(v["trace"].as_array().unwrap().len(), 2);
    assert!(v["reviser_error"].is_null());
}
