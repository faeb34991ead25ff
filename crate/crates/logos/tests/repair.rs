mod common;

use std::net::TcpListener;
use std::time::Duration;

use common::{apply_hint, misspelled_trace, reply, StubServer};
use logos::repair::{repair_loop, HttpReviser, ReviseError, DEFAULT_MAX_ATTEMPTS};
use logos::{BackendChoice, Settings};
use logos_core::{Category, Status};

fn run(source: &str) -> logos_core::verdict::Report {
    Settings { backend: BackendChoice::Enum, ..Settings::default() }.run_source(source)
}

fn reviser(server: &StubServer) -> HttpReviser {
    HttpReviser::new(server.url.clone(), Duration::from_secs(10))
}

#[test]
fn hint_applying_reviser_fixes_on_the_second_attempt() {
    let server = StubServer::start(apply_hint);
    let out = repair_loop(&misspelled_trace(), Some(&reviser(&server)), DEFAULT_MAX_ATTEMPTS, &run);
    assert!(out.reviser_error.is_none(), "{:?}", out.reviser_error);
    assert_eq!(out.report.attempts_used, 2);
    assert_eq!(out.trace.len(), 2);
    assert_eq!(out.trace[0].diagnostics[0].category, Category::UndefinedSymbol);
    assert!(out.trace[1].diagnostics.is_empty());
    assert_eq!(out.report.answer(), Some(false));
    assert_eq!(server.attempts(), [1]);
    let seen = server.requests.lock().unwrap();
    assert_eq!(seen[0]["diagnostics"][0]["category"], "UndefinedSymbol");
    assert_eq!(seen[0]["diagnostics"][0]["path"], "/verifications/0/constraint");
}

#[test]
fn unchanged_source_fails_after_three_attempts() {
    let server = StubServer::start(|req| reply(req["program"].as_str().unwrap()));
    let out = repair_loop(&misspelled_trace(), Some(&reviser(&server)), DEFAULT_MAX_ATTEMPTS, &run);
    assert_eq!(out.attempts_used(), 3);
    assert_eq!(out.report.attempts_used, 3);
    assert!(out.report.has_source_errors());
    assert_eq!(server.attempts(), [1, 2]);
}

#[test]
fn clean_program_never_calls_the_reviser() {
    let server = StubServer::start(apply_hint);
    let text = common::source(&common::case("trace2_cherokee"));
    let out = repair_loop(&text, Some(&reviser(&server)), DEFAULT_MAX_ATTEMPTS, &run);
    assert_eq!(out.attempts_used(), 1);
    assert_eq!(out.report.verification.unwrap().verifications[0].verdict.status, Status::Sat);
    assert!(server.attempts().is_empty());
}

#[test]
fn error_status_stops_the_loop() {
    let server = StubServer::start(|_| (503, "{}".into()));
    let out = repair_loop(&misspelled_trace(), Some(&reviser(&server)), DEFAULT_MAX_ATTEMPTS, &run);
    assert!(matches!(out.reviser_error, Some(ReviseError::Status(503))), "{:?}", out.reviser_error);
    assert_eq!(out.attempts_used(), 1);
}

#[test]
fn malformed_reply_is_reported() {
    let server = StubServer::start(|_| (200, r#"{"text": "nope"}"#.into()));
    let out = repair_loop(&misspelled_trace(), Some(&reviser(&server)), DEFAULT_MAX_ATTEMPTS, &run);
    assert!(matches!(out.reviser_error, Some(ReviseError::BadResponse(_))), "{:?}", out.reviser_error);
}

#[test]
fn unreachable_reviser_is_reported() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let r = HttpReviser::new(format!("http://127.0.0.1:{}/revise", port), Duration::from_secs(2));
    let out = repair_loop(&misspelled_trace(), Some(&r), DEFAULT_MAX_ATTEMPTS, &run);
    assert!(matches!(out.reviser_error, Some(ReviseError::Unreachable(_))), "{:?}", out.reviser_error);
    assert_eq!(out.attempts_used(), 1);
}
