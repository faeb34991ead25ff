mod common;

use std::collections::BTreeSet;
use std::fs;

use common::{case, corpus_dir, labels, settings, source};
use logos::corpus::{load_labels, run_corpus, run_json, CorpusCase};
use logos::{parse_program, BackendChoice, Settings};
use logos_core::engine::{compile, differential_check, Agreement, Rewriting};
use logos_core::metrics::Expected;
use logos_core::query::Query;
use logos_core::verdict::Status;
use logos_core::{canonicalize, parse_expression, Category};

#[test]
fn every_program_file_has_exactly_one_label() {
    let cases = labels();
    let ids: BTreeSet<&str> = cases.iter().map(|c| c.id.as_str()).collect();
    assert_eq!(ids.len(), cases.len());
    assert_eq!(cases.len(), 24);
    let mut files: Vec<String> = fs::read_dir(corpus_dir())
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".json") && n != "labels.json")
        .collect();
    files.sort();
    let mut labeled: Vec<String> = cases.iter().map(|c| c.path.clone()).collect();
    labeled.sort();
    assert_eq!(files, labeled);
}

#[test]
fn every_program_compiles_cleanly() {
    for c in labels() {
        let program = parse_program(&source(&c)).unwrap_or_else(|d| panic!("{}: {:?}", c.id, d));
        if let Err(d) = compile(program) {
            panic!("{} does not compile: {:?}", c.id, d);
        }
    }
}

#[test]
fn parsing_is_deterministic() {
    for c in labels() {
        let text = source(&c);
        assert_eq!(parse_program(&text).unwrap(), parse_program(&text).unwrap(), "{}", c.id);
    }
}

#[test]
fn printed_corpus_expressions_reparse_identically() {
    let mut seen = 0;
    for c in labels() {
        let program = parse_program(&source(&c)).unwrap();
        for e in program.expressions() {
            let term = e.parsed.as_ref().unwrap_or_else(|err| panic!("{} {}: {:?}", c.id, e.path, err));
            let printed = term.to_string();
            assert_eq!(&parse_expression(&printed).unwrap(), term, "{} {}: {}", c.id, e.path, printed);
            seen += 1;
        }
    }
    assert!(seen > 100, "only {} expressions", seen);
}

#[test]
fn canonical_form_is_a_fixpoint() {
    for c in labels() {
        let once = canonicalize(parse_program(&source(&c)).unwrap()).unwrap();
        assert_eq!(canonicalize(once.clone()).unwrap(), once, "{}", c.id);
    }
}

#[test]
fn knowledgebase_alias_is_read() {
    let program = parse_program(&source(&case("hse2_pallet"))).unwrap();
    assert!(!program.knowledge_base.is_empty());
}

#[test]
fn inconsistent_base_makes_every_goal_unsat() {
    let mut inconsistent = 0;
    for c in labels() {
        let report = settings(&c, BackendChoice::Enum).run_source(&source(&c));
        let Some(v) = report.verification else { continue };
        if v.base_consistent == Some(false) {
            inconsistent += 1;
            assert!(v.verifications.iter().all(|n| n.verdict.status == Status::Unsat), "{}", c.id);
        }
        if let [only] = v.verifications.as_slice() {
            let expected = match only.verdict.status {
                Status::Sat => Some(true),
                Status::Unsat => Some(false),
                Status::Unknown => None,
            };
            assert_eq!(v.answer(), expected, "{}", c.id);
        }
    }
    // the three HSE programs contradict their own rules
    assert!(inconsistent >= 3);
}

#[test]
fn traces_reproduce_their_answers() {
    for backend in [BackendChoice::Enum, BackendChoice::Smt] {
        let s = Settings { backend, ..Settings::default() };
        let one = s.run_source(&source(&case("trace1_sotomayor")));
        assert_eq!(one.answer(), Some(false));
        assert_eq!(one.verification.as_ref().unwrap().base_consistent, Some(true));
        let two = s.run_source(&source(&case("trace2_cherokee")));
        assert_eq!(two.answer(), Some(true));
    }
}

#[test]
fn enum_runs_are_deterministic() {
    for c in labels() {
        let s = settings(&c, BackendChoice::Enum);
        let text = source(&c);
        assert_eq!(s.run_source(&text), s.run_source(&text), "{}", c.id);
    }
}

#[test]
fn shipped_corpus_matches_every_label() {
    let cases = labels();
    for backend in [BackendChoice::Enum, BackendChoice::Smt] {
        let s = Settings { backend, ..Settings::default() };
        let run = run_corpus(&corpus_dir(), &cases, &s, 4).unwrap();
        let misses: Vec<String> =
            run.cases.iter().filter(|c| !c.matched).map(|c| format!("{} {}", c.id, c.observed)).collect();
        assert!(misses.is_empty(), "{:?}: {:?}", backend, misses);
        assert!(run.skipped.is_empty());
        assert_eq!((run.summary.total, run.summary.compiled, run.summary.matched), (24, 24, 24));
        assert_eq!(run.summary.accuracy, Some(logos_core::num::int(1)));
    }
}

#[test]
fn job_count_does_not_change_results() {
    let cases = labels();
    let s = Settings { backend: BackendChoice::Enum, ..Settings::default() };
    let one = run_json(&run_corpus(&corpus_dir(), &cases, &s, 1).unwrap());
    let many = run_json(&run_corpus(&corpus_dir(), &cases, &s, 8).unwrap());
    assert_eq!(one, many);
}

#[test]
fn empty_corpus_reports_no_rates() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_corpus(dir.path(), &[], &Settings::default(), 1).unwrap();
    assert_eq!(run.summary.total, 0);
    assert_eq!(run.summary.accuracy, None);
    assert_eq!(run.summary.compile_rate, None);
    let json = run_json(&run);
    assert!(json["summary"]["accuracy"].is_null());
    assert!(json["summary"]["f1"].is_null());
}

#[test]
fn bad_cases_are_skipped_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(corpus_dir().join("sat01_arithmetic.json"), dir.path().join("a.json")).unwrap();
    fs::copy(corpus_dir().join("sat01_arithmetic.json"), dir.path().join("stray.json")).unwrap();
    let labels_path = dir.path().join("labels.json");
    fs::write(
        &labels_path,
        r#"[
          {"id": "a", "path": "a.json", "expected": "SAT"},
          {"id": "a", "path": "a.json", "expected": "SAT"},
          {"id": "gone", "path": "missing.json", "expected": "SAT"},
          {"id": "odd", "path": "a.json", "expected": "MAYBE"}
        ]"#,
    )
    .unwrap();
    let cases: Vec<CorpusCase> = load_labels(&labels_path).unwrap();
    let s = Settings { backend: BackendChoice::Enum, ..Settings::default() };
    let run = run_corpus(dir.path(), &cases, &s, 2).unwrap();
    assert_eq!(run.summary.total, 1);
    assert_eq!(run.summary.matched, 1);
    let paths: Vec<&str> = run.skipped.iter().map(|d| d.span.as_ref().map_or("", |s| s.path.as_str())).collect();
    assert!(paths.contains(&"/1/id"), "{:?}", paths);
    assert!(paths.contains(&"/2/path"), "{:?}", paths);
    assert!(paths.contains(&"/3/expected"), "{:?}", paths);
    assert!(run.skipped.iter().any(|d| d.message.contains("stray.json")));
    assert!(run.skipped.iter().all(|d| d.category == Category::SchemaViolation));
}

#[test]
fn malformed_labels_file_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("labels.json");
    fs::write(&path, r#"[{"id": "a", "path": "a.json", "expected": "SAT", "extra": 1}]"#).unwrap();
    assert!(load_labels(&path).is_err());
}

#[test]
fn expected_labels_round_trip() {
    for c in labels() {
        let e = Expected::parse(&c.expected).unwrap();
        assert_eq!(e.to_string(), c.expected);
    }
}

#[test]
fn pigeonhole_and_cherokee_agree_across_backends() {
    for id in ["unsat01_pigeonhole", "trace2_cherokee"] {
        let c = case(id);
        let s = settings(&c, BackendChoice::Smt);
        let tp = compile(parse_program(&source(&c)).unwrap()).unwrap();
        let report = differential_check(&tp, &s.smt(), &s.enumerator());
        assert!(report.comparisons.iter().all(|x| x.outcome == Agreement::Agree), "{}: {:?}", id, report);
        assert!(!report.closure_sensitive(), "{}", id);
    }
}

#[test]
fn dropping_rules_on_one_side_is_detected() {
    let c = case("hse1_ladder");
    let s = settings(&c, BackendChoice::Smt);
    let tp = compile(parse_program(&source(&c)).unwrap()).unwrap();
    let smt = s.smt();
    let broken = Rewriting {
        inner: &smt,
        rewrite: Box::new(|q: &Query| {
            let mut q = q.clone();
            q.program.rules.clear();
            q
        }),
    };
    let report = differential_check(&tp, &broken, &s.enumerator());
    let defects: Vec<&str> = report.defects().map(|d| d.query.as_str()).collect();
    assert!(defects.contains(&"base"), "{:?}", report);
}
