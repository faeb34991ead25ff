//! Labeled-corpus metrics with exact rational rates.
//!
//! The positive class is "answer true" (SAT). Rates whose denominator is
//! zero are absent rather than NaN.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;

use crate::num::{self, Rational};
use crate::verdict::{OptStatus, Report, Status};

/// Expected outcome of a corpus case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expected {
    Sat,
    Unsat,
    True,
    False,
    Optimal(Rational),
    Infeasible,
    CompileError,
}

impl Expected {
    /// Reads `SAT`, `UNSAT`, `True`, `False`, `OPTIMAL(80)`, `INFEASIBLE`
    /// or `COMPILE_ERROR`.
    pub fn parse(label: &str) -> Option<Expected> {
        Some(match label.trim() {
            "SAT" => Expected::Sat,
            "UNSAT" => Expected::Unsat,
            "True" => Expected::True,
            "False" => Expected::False,
            "INFEASIBLE" => Expected::Infeasible,
            "COMPILE_ERROR" => Expected::CompileError,
            other => {
                let inner = other.strip_prefix("OPTIMAL(")?.strip_suffix(')')?.trim();
                let negative = inner.starts_with('-');
                let v = num::parse_decimal(inner.trim_start_matches('-'))?;
                Expected::Optimal(if negative { -v } else { v })
            }
        })
    }

    /// The boolean label, for cases that have one.
    pub fn answer(&self) -> Option<bool> {
        match self {
            Expected::Sat | Expected::True => Some(true),
            Expected::Unsat | Expected::False => Some(false),
            _ => None,
        }
    }
}

impl fmt::Display for Expected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expected::Sat => f.write_str("SAT"),
            Expected::Unsat => f.write_str("UNSAT"),
            Expected::True => f.write_str("True"),
            Expected::False => f.write_str("False"),
            Expected::Optimal(v) => write!(f, "OPTIMAL({})", label_number(v)),
            Expected::Infeasible => f.write_str("INFEASIBLE"),
            Expected::CompileError => f.write_str("COMPILE_ERROR"),
        }
    }
}

/// What a run produced, reduced to what the labels can talk about.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Observed {
    CompileError,
    /// Per-verification statuses.
    Verified(Vec<Status>),
    Optimized(OptStatus, Option<Rational>),
    /// Compiled, but produced neither verdicts nor an optimum.
    Nothing,
}

impl Observed {
    pub fn from_report(report: &Report) -> Observed {
        if report.has_source_errors() {
            return Observed::CompileError;
        }
        if let Some(o) = &report.optimization {
            let value = o.objectives.first().and_then(|v| v.value.clone());
            return Observed::Optimized(o.status, value);
        }
        match &report.verification {
            Some(v) => Observed::Verified(v.verifications.iter().map(|n| n.verdict.status).collect()),
            None => Observed::Nothing,
        }
    }

    /// True if every goal is SAT, false if some goal is UNSAT.
    pub fn answer(&self) -> Option<bool> {
        match self {
            Observed::Verified(s) if s.contains(&Status::Unsat) => Some(false),
            Observed::Verified(s) if !s.is_empty() && s.iter().all(|x| *x == Status::Sat) => Some(true),
            _ => None,
        }
    }

    pub fn compiled(&self) -> bool {
        *self != Observed::CompileError
    }
}

impl fmt::Display for Observed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observed::CompileError => f.write_str("COMPILE_ERROR"),
            Observed::Verified(s) => {
                let parts: Vec<&str> = s.iter().map(|x| x.as_str()).collect();
                f.write_str(&parts.join(","))
            }
            Observed::Optimized(OptStatus::Optimal, Some(v)) => write!(f, "OPTIMAL({})", label_number(v)),
            Observed::Optimized(s, _) => f.write_str(s.as_str()),
            Observed::Nothing => f.write_str("NONE"),
        }
    }
}

/// Does the observation match the label? Multi-goal programs labeled
/// SAT/UNSAT must have that status on every goal.
pub fn matches(expected: &Expected, observed: &Observed) -> bool {
    match (expected, observed) {
        (Expected::CompileError, Observed::CompileError) => true,
        (Expected::Sat | Expected::True, Observed::Verified(s)) => !s.is_empty() && s.iter().all(|x| *x == Status::Sat),
        (Expected::Unsat | Expected::False, Observed::Verified(s)) => {
            !s.is_empty() && s.iter().all(|x| *x == Status::Unsat)
        }
        (Expected::Optimal(v), Observed::Optimized(OptStatus::Optimal, Some(w))) => v == w,
        (Expected::Infeasible, Observed::Optimized(OptStatus::Infeasible, _)) => true,
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseResult {
    pub id: String,
    pub expected: Expected,
    pub observed: Observed,
    pub matched: bool,
    pub attempts_used: u32,
    pub diagnostics: usize,
}

impl CaseResult {
    pub fn new(
        id: impl Into<String>,
        expected: Expected,
        observed: Observed,
        attempts_used: u32,
        diagnostics: usize,
    ) -> Self {
        let matched = matches(&expected, &observed);
        CaseResult { id: id.into(), expected, observed, matched, attempts_used, diagnostics }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MetricsSummary {
    pub total: usize,
    pub compiled: usize,
    pub matched: usize,
    pub compile_rate: Option<Rational>,
    pub confusion: Confusion,
    pub accuracy: Option<Rational>,
    pub precision: Option<Rational>,
    pub recall: Option<Rational>,
    pub f1: Option<Rational>,
    pub specificity: Option<Rational>,
    pub fpr: Option<Rational>,
    /// Compiled cases by the attempt that produced them.
    pub attempts: BTreeMap<u32, usize>,
}

fn ratio(n: usize, d: usize) -> Option<Rational> {
    (d != 0).then(|| Rational::new((n as i64).into(), (d as i64).into()))
}

/// Aggregates case results. Only cases with a boolean label and a boolean
/// prediction enter the confusion matrix.
pub fn summarize(cases: &[CaseResult]) -> MetricsSummary {
    let mut c = Confusion::default();
    let mut attempts = BTreeMap::new();
    for case in cases {
        if case.observed.compiled() {
            *attempts.entry(case.attempts_used).or_insert(0) += 1;
        }
        match (case.expected.answer(), case.observed.answer()) {
            (Some(true), Some(true)) => c.tp += 1,
            (Some(false), Some(true)) => c.fp += 1,
            (Some(false), Some(false)) => c.tn += 1,
            (Some(true), Some(false)) => c.fn_ += 1,
            _ => {}
        }
    }
    let compiled = cases.iter().filter(|x| x.observed.compiled()).count();
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = match (&precision, &recall) {
        (Some(p), Some(r)) if (p + r).is_zero() => Some(Rational::zero()),
        (Some(p), Some(r)) => Some(num::int(2) * p * r / (p + r)),
        _ => None,
    };
    MetricsSummary {
        total: cases.len(),
        compiled,
        matched: cases.iter().filter(|x| x.matched).count(),
        compile_rate: ratio(compiled, cases.len()),
        confusion: c,
        accuracy: ratio(c.tp + c.tn, c.total()),
        precision,
        recall,
        f1,
        specificity: ratio(c.tn, c.tn + c.fp),
        fpr: ratio(c.fp, c.fp + c.tn),
        attempts,
    }
}

/// `80`, `-2.5`, or `1/3` when the decimal expansion does not terminate.
fn label_number(v: &Rational) -> String {
    if v.is_integer() {
        num::to_plain_string(v)
    } else {
        num::to_decimal_string(v)
    }
}
