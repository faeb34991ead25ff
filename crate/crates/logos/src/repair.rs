//! The bounded repair loop: run a program, and while the source has
//! diagnostics, ask an external reviser for a replacement document.

use std::time::Duration;

use logos_core::verdict::Report;
use logos_core::Diagnostic;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::report::diagnostics_json;

pub const DEFAULT_MAX_ATTEMPTS: u32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviserRequest {
    pub program: String,
    pub diagnostics: Value,
    pub attempt: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviserResponse {
    pub program: String,
}

#[derive(Debug, Error)]
pub enum ReviseError {
    #[error("reviser unreachable: {0}")]
    Unreachable(String),
    #[error("reviser answered with status {0}")]
    Status(u16),
    #[error("reviser sent an unreadable response: {0}")]
    BadResponse(String),
}

/// Produces a revised program from a failed attempt.
pub trait Reviser {
    fn revise(&self, request: &ReviserRequest) -> Result<ReviserResponse, ReviseError>;
}

/// A reviser reached over HTTP: POST the request as JSON, expect 200 with
/// `{"program": ...}`.
pub struct HttpReviser {
    url: String,
    agent: ureq::Agent,
}

impl HttpReviser {
    pub fn new(url: impl Into<String>, timeout: Duration) -> Self {
        let agent =
            ureq::Agent::config_builder().timeout_global(Some(timeout)).http_status_as_error(false).build().into();
        HttpReviser { url: url.into(), agent }
    }
}

impl Reviser for HttpReviser {
    fn revise(&self, request: &ReviserRequest) -> Result<ReviserResponse, ReviseError> {
        let mut response =
            self.agent.post(&self.url).send_json(request).map_err(|e| ReviseError::Unreachable(e.to_string()))?;
        let status = response.status().as_u16();
        if status != 200 {
            return Err(ReviseError::Status(status));
        }
        response.body_mut().read_json::<ReviserResponse>().map_err(|e| ReviseError::BadResponse(e.to_string()))
    }
}

/// One pass through the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Attempt {
    pub source: String,
    pub diagnostics: Vec<Diagnostic>,
    pub report: Report,
}

#[derive(Debug)]
pub struct RepairOutcome {
    /// The last attempt's report, with `attempts_used` filled in.
    pub report: Report,
    pub trace: Vec<Attempt>,
    /// Why the loop stopped early, if the reviser failed.
    pub reviser_error: Option<ReviseError>,
}

impl RepairOutcome {
    pub fn attempts_used(&self) -> u32 {
        self.trace.len() as u32
    }
}

/// Runs `source` through `run`; on source diagnostics, sends them to the
/// reviser and retries, for at most `max_attempts` passes in total. Without
/// a reviser there is exactly one pass.
pub fn repair_loop(
    source: &str,
    reviser: Option<&dyn Reviser>,
    max_attempts: u32,
    run: &dyn Fn(&str) -> Report,
) -> RepairOutcome {
    let max_attempts = max_attempts.max(1);
    let mut trace = Vec::new();
    let mut current = source.to_string();
    let mut reviser_error = None;
    loop {
        let report = run(&current);
        let failed = report.has_source_errors();
        let diagnostics = report.diagnostics.clone();
        trace.push(Attempt { source: current.clone(), diagnostics: diagnostics.clone(), report });
        let attempt = trace.len() as u32;
        if !failed || attempt >= max_attempts {
            break;
        }
        let Some(reviser) = reviser else { break };
        let request = ReviserRequest { program: current.clone(), diagnostics: diagnostics_json(&diagnostics), attempt };
        match reviser.revise(&request) {
            Ok(r) => current = r.program,
            Err(e) => {
                reviser_error = Some(e);
                break;
            }
        }
    }
    let mut report = trace.last().expect("at least one attempt").report.clone();
    report.attempts_used = trace.len() as u32;
    RepairOutcome { report, trace, reviser_error }
}

#[cfg(test)]
mod tests {
    use super::*;
    use logos_core::{Category, Diagnostic};
    use std::cell::RefCell;

    fn fake_run(source: &str) -> Report {
        if source.contains("bad") {
            Report::from_diagnostics(vec![Diagnostic::new(Category::UndefinedSymbol, "bad")])
        } else {
            Report { attempts_used: 1, ..Report::default() }
        }
    }

    struct Scripted {
        replies: RefCell<Vec<String>>,
        seen: RefCell<Vec<u32>>,
    }

    impl Reviser for Scripted {
        fn revise(&self, request: &ReviserRequest) -> Result<ReviserResponse, ReviseError> {
            self.seen.borrow_mut().push(request.attempt);
            let program = self.replies.borrow_mut().remove(0);
            Ok(ReviserResponse { program })
        }
    }

    fn scripted(replies: &[&str]) -> Scripted {
        Scripted { replies: RefCell::new(replies.iter().map(|s| s.to_string()).collect()), seen: RefCell::new(vec![]) }
    }

    #[test]
    fn clean_program_takes_one_attempt_and_no_call() {
        let r = scripted(&[]);
        let out = repair_loop("good", Some(&r), 3, &fake_run);
        assert_eq!(out.attempts_used(), 1);
        assert!(r.seen.borrow().is_empty());
    }

    #[test]
    fn fixed_on_second_attempt() {
        let r = scripted(&["good"]);
        let out = repair_loop("bad", Some(&r), 3, &fake_run);
        assert_eq!(out.report.attempts_used, 2);
        assert_eq!(out.trace.len(), 2);
        assert_eq!(*r.seen.borrow(), [1]);
    }

    #[test]
    fn always_broken_stops_at_the_budget() {
        let r = scripted(&["bad", "bad", "bad"]);
        let out = repair_loop("bad", Some(&r), 3, &fake_run);
        assert_eq!(out.attempts_used(), 3);
        assert!(out.report.has_source_errors());
        assert_eq!(*r.seen.borrow(), [1, 2]);
    }

    #[test]
    fn no_reviser_means_one_attempt() {
        let out = repair_loop("bad", None, 3, &fake_run);
        assert_eq!(out.attempts_used(), 1);
    }
}
