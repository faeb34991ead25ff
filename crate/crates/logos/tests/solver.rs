mod common;

use std::time::Duration;

use common::{case, source};
use logos::parse_program;
use logos::solver::{run_solver, SolverConfig};
use logos_core::engine::compile;
use logos_core::query::Query;
use logos_core::smtlib::{emit_query, EmitOptions};
use logos_core::{Category, Status};

fn script(id: &str, query: impl Fn(&logos_core::TypedProgram) -> Query) -> String {
    let tp = compile(parse_program(&source(&case(id))).unwrap()).unwrap();
    emit_query(&query(&tp), EmitOptions::default()).text
}

#[test]
fn empty_script_is_sat() {
    let out = run_solver("(check-sat)\n", &SolverConfig::default()).unwrap();
    assert_eq!(out.status, Status::Sat);
}

#[test]
fn pigeonhole_is_unsat() {
    let s = script("unsat01_pigeonhole", |tp| Query::verification(tp, 0));
    let out = run_solver(&s, &SolverConfig::default()).unwrap();
    assert_eq!(out.status, Status::Unsat);
    assert_eq!(out.model_text, None);
}

#[test]
fn contradiction_script_is_unsat() {
    let s = script("unsat04_cnf", |tp| Query::verification(tp, 0));
    assert!(s.contains("(assert (and A (not A)))"), "{}", s);
    assert_eq!(run_solver(&s, &SolverConfig::default()).unwrap().status, Status::Unsat);
}

#[test]
fn impossible_optimization_is_unsat() {
    let s = script("unsat09_impossible_optimization", Query::optimization);
    assert!(s.contains("(assert (> x 0))") && s.contains("(assert (< x 0))"), "{}", s);
    assert_eq!(run_solver(&s, &SolverConfig::default()).unwrap().status, Status::Unsat);
}

#[test]
fn sat_reply_carries_a_model() {
    let s = script("sat01_arithmetic", |tp| Query::verification(tp, 0));
    let out = run_solver(&s, &SolverConfig::default()).unwrap();
    assert_eq!(out.status, Status::Sat);
    assert!(out.model_text.unwrap().contains('x'));
}

#[test]
fn every_corpus_script_is_accepted_by_the_solver() {
    for c in common::labels() {
        let tp = compile(parse_program(&source(&c)).unwrap()).unwrap();
        let mut queries = vec![Query::base(&tp)];
        queries.extend((0..tp.verifications.len()).map(|i| Query::verification(&tp, i)));
        if tp.optimization.is_some() {
            queries.push(Query::optimization(&tp));
        }
        for q in &queries {
            let out = run_solver(&emit_query(q, EmitOptions::default()).text, &SolverConfig::default())
                .unwrap_or_else(|d| panic!("{}: {}", c.id, d));
            // (get-model) after unsat is the only complaint allowed
            let errors = out.raw.lines().filter(|l| l.contains("(error") && !l.contains("model is not available"));
            assert_eq!(errors.count(), 0, "{}: {}", c.id, out.raw);
        }
    }
}

#[test]
fn missing_solver_is_a_solver_failure() {
    let cfg = SolverConfig { command: "/nonexistent/solver".into(), ..SolverConfig::default() };
    let d = run_solver("(check-sat)\n", &cfg).unwrap_err();
    assert_eq!(d.category, Category::SolverFailure);
    assert!(d.hint.is_some());
}

#[test]
fn crashing_solver_is_a_solver_failure() {
    let cfg = SolverConfig {
        command: "sh".into(),
        args: vec!["-c".into(), "echo boom >&2; exit 3".into()],
        ..SolverConfig::default()
    };
    let d = run_solver("(check-sat)\n", &cfg).unwrap_err();
    assert_eq!(d.category, Category::SolverFailure);
    assert!(d.message.contains("boom"), "{}", d.message);
}

#[test]
fn slow_solver_times_out() {
    let cfg = SolverConfig {
        command: "sleep".into(),
        args: vec!["10".into()],
        timeout: Duration::from_millis(200),
        ..SolverConfig::default()
    };
    let started = std::time::Instant::now();
    let d = run_solver("(check-sat)\n", &cfg).unwrap_err();
    assert_eq!(d.category, Category::Timeout);
    assert!(started.elapsed() < Duration::from_secs(5));
}
