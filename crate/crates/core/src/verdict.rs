//! Verdicts and reports.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::diagnostic::Diagnostic;
use crate::model::Direction;
use crate::num::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Sat,
    Unsat,
    Unknown,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Sat => "SAT",
            Status::Unsat => "UNSAT",
            Status::Unknown => "UNKNOWN",
        }
    }

    /// SAT maps to true and UNSAT to false; UNKNOWN has no answer.
    pub fn answer(self) -> Option<bool> {
        match self {
            Status::Sat => Some(true),
            Status::Unsat => Some(false),
            Status::Unknown => None,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A model rendered as `symbol = value` lines, e.g. `x = 3` or
/// `assigned_to(taskA) = worker2`.
pub type Assignment = Vec<(String, String)>;

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub status: Status,
    pub model: Option<Assignment>,
    pub backend: String,
    pub diagnostics: Vec<Diagnostic>,
}

impl Verdict {
    pub fn new(status: Status, backend: impl Into<String>) -> Self {
        Verdict { status, model: None, backend: backend.into(), diagnostics: Vec::new() }
    }

    pub fn unknown(backend: impl Into<String>, diagnostic: Diagnostic) -> Self {
        Verdict { diagnostics: alloc::vec![diagnostic], ..Verdict::new(Status::Unknown, backend) }
    }

    pub fn answer(&self) -> Option<bool> {
        self.status.answer()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedVerdict {
    pub name: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    /// Satisfiability of knowledge base and rules alone; `None` if unknown.
    pub base_consistent: Option<bool>,
    pub base: Verdict,
    pub verifications: Vec<NamedVerdict>,
}

impl VerificationReport {
    /// Present only for a single verification with a known status.
    pub fn answer(&self) -> Option<bool> {
        match self.verifications.as_slice() {
            [only] => only.verdict.answer(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptStatus {
    Optimal,
    Infeasible,
    Unknown,
}

impl OptStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            OptStatus::Optimal => "OPTIMAL",
            OptStatus::Infeasible => "INFEASIBLE",
            OptStatus::Unknown => "UNKNOWN",
        }
    }
}

impl fmt::Display for OptStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveValue {
    pub direction: Direction,
    pub expression: String,
    pub value: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationReport {
    pub status: OptStatus,
    pub objectives: Vec<ObjectiveValue>,
    pub model: Option<Assignment>,
    pub backend: String,
    pub diagnostics: Vec<Diagnostic>,
}

/// Everything one run of a program's actions produced.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub verification: Option<VerificationReport>,
    pub optimization: Option<OptimizationReport>,
    pub attempts_used: u32,
    /// Source diagnostics that stopped the pipeline, or run-level problems.
    pub diagnostics: Vec<Diagnostic>,
}

impl Report {
    pub fn from_diagnostics(diagnostics: Vec<Diagnostic>) -> Self {
        Report { diagnostics, attempts_used: 1, ..Report::default() }
    }

    pub fn answer(&self) -> Option<bool> {
        self.verification.as_ref().and_then(|v| v.answer())
    }

    /// True when a source stage rejected the program.
    pub fn has_source_errors(&self) -> bool {
        self.diagnostics.iter().any(|d| d.category.is_source_error())
    }
}
