//! Labeled corpora: loading, running in parallel and summarizing.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use logos_core::metrics::{summarize, CaseResult, Expected, MetricsSummary, Observed};
use logos_core::{Category, Diagnostic, SourceSpan};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::report::rational_json;
use crate::settings::Settings;

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusCase {
    pub id: String,
    /// Relative to the corpus directory.
    pub path: String,
    pub expected: String,
    #[serde(default)]
    pub overrides: Option<Overrides>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub int_window: Option<(i64, i64)>,
    pub enum_budget: Option<u64>,
    pub timeout_ms: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, base: &Settings) -> Settings {
        let mut s = base.clone();
        if let Some(w) = self.int_window {
            s.finite.int_window = w;
        }
        if let Some(b) = self.enum_budget {
            s.finite.budget = b;
        }
        if let Some(t) = self.timeout_ms {
            s.solver.timeout = std::time::Duration::from_millis(t);
        }
        s
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed labels file {path}: {source}")]
    Labels { path: PathBuf, source: serde_json::Error },
}

pub fn load_labels(path: &Path) -> Result<Vec<CorpusCase>, CorpusError> {
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|source| CorpusError::Labels { path: path.to_path_buf(), source })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusRun {
    /// Sorted by case id.
    pub cases: Vec<CaseResult>,
    /// Cases that could not be run, and program files without a label.
    pub skipped: Vec<Diagnostic>,
    pub summary: MetricsSummary,
}

fn skip(path: &str, message: String) -> Diagnostic {
    Diagnostic::at(Category::SchemaViolation, message, SourceSpan::node(path))
}

/// Runs every labeled case under `dir` on up to `jobs` threads.
pub fn run_corpus(
    dir: &Path,
    labels: &[CorpusCase],
    settings: &Settings,
    jobs: usize,
) -> Result<CorpusRun, CorpusError> {
    let mut skipped = Vec::new();
    let mut runnable = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, case) in labels.iter().enumerate() {
        let at = format!("/{}", i);
        let Some(expected) = Expected::parse(&case.expected) else {
            skipped.push(skip(
                &format!("{}/expected", at),
                format!("case `{}` has an unknown label `{}`", case.id, case.expected),
            ));
            continue;
        };
        if !seen.insert(case.id.clone()) {
            skipped.push(skip(&format!("{}/id", at), format!("case id `{}` appears more than once", case.id)));
            continue;
        }
        let file = dir.join(&case.path);
        match fs::read_to_string(&file) {
            Ok(source) => runnable.push((case, expected, source)),
            Err(e) => skipped.push(skip(
                &format!("{}/path", at),
                format!("case `{}`: cannot read {}: {}", case.id, file.display(), e),
            )),
        }
    }
    let labeled: BTreeSet<PathBuf> = labels.iter().map(|c| dir.join(&c.path)).collect();
    let entries = fs::read_dir(dir).map_err(|source| CorpusError::Io { path: dir.to_path_buf(), source })?;
    let mut unlabeled: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json") && !labeled.contains(p))
        .filter(|p| !p.file_name().is_some_and(|n| n == "labels.json"))
        .collect();
    unlabeled.sort();
    for p in unlabeled {
        skipped.push(Diagnostic::new(Category::SchemaViolation, format!("{} has no label; skipped", p.display())));
    }

    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().expect("thread pool");
    let mut cases: Vec<CaseResult> = pool.install(|| {
        runnable
            .par_iter()
            .map(|(case, expected, source)| {
                let settings = case.overrides.as_ref().map(|o| o.apply(settings)).unwrap_or_else(|| settings.clone());
                let report = settings.run_source(source);
                let observed = Observed::from_report(&report);
                let diagnostics = report.diagnostics.len();
                CaseResult::new(case.id.clone(), expected.clone(), observed, report.attempts_used, diagnostics)
            })
            .collect()
    });
    cases.sort_by(|a, b| a.id.cmp(&b.id));
    let summary = summarize(&cases);
    Ok(CorpusRun { cases, skipped, summary })
}

fn rate(r: &Option<logos_core::num::Rational>) -> Value {
    r.as_ref().map(rational_json).unwrap_or(Value::Null)
}

pub fn summary_json(m: &MetricsSummary) -> Value {
    let attempts: Map<String, Value> = m.attempts.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
    json!({
        "total": m.total,
        "compiled": m.compiled,
        "matched": m.matched,
        "compile_rate": rate(&m.compile_rate),
        "confusion": {"tp": m.confusion.tp, "fp": m.confusion.fp, "tn": m.confusion.tn, "fn": m.confusion.fn_},
        "accuracy": rate(&m.accuracy),
        "precision": rate(&m.precision),
        "recall": rate(&m.recall),
        "f1": rate(&m.f1),
        "specificity": rate(&m.specificity),
        "fpr": rate(&m.fpr),
        "attempts": attempts,
    })
}

/// Summary plus per-case rows; no timings, so identical runs serialize
/// identically.
pub fn run_json(run: &CorpusRun) -> Value {
    let cases: Vec<Value> = run
        .cases
        .iter()
        .map(|c| {
            json!({
                "id": c.id,
                "expected": c.expected.to_string(),
                "observed": c.observed.to_string(),
                "matched": c.matched,
                "attempts_used": c.attempts_used,
                "diagnostics": c.diagnostics,
            })
        })
        .collect();
    json!({
        "summary": summary_json(&run.summary),
        "cases": cases,
        "skipped": crate::report::diagnostics_json(&run.skipped),
    })
}

pub fn run_text(run: &CorpusRun) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    for c in &run.cases {
        let mark = if c.matched { "ok  " } else { "FAIL" };
        let _ = writeln!(out, "{} {:<40} expected {:<14} observed {}", mark, c.id, c.expected.to_string(), c.observed);
    }
    for d in &run.skipped {
        let _ = writeln!(out, "skipped: {}", d);
    }
    let m = &run.summary;
    let show = |r: &Option<logos_core::num::Rational>| match r {
        Some(v) => logos_core::num::to_plain_string(v),
        None => "n/a".into(),
    };
    let _ = writeln!(out, "total {} compiled {} matched {}", m.total, m.compiled, m.matched);
    let c = m.confusion;
    let _ = writeln!(out, "TP {} FP {} TN {} FN {}", c.tp, c.fp, c.tn, c.fn_);
    let _ = writeln!(
        out,
        "accuracy {} precision {} recall {} f1 {} specificity {} fpr {}",
        show(&m.accuracy),
        show(&m.precision),
        show(&m.recall),
        show(&m.f1),
        show(&m.specificity),
        show(&m.fpr)
    );
    out
}
