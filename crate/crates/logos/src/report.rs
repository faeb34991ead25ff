//! JSON and text renderings of diagnostics and reports.

use std::fmt::Write as _;

use logos_core::num::{self, Rational};
use logos_core::verdict::{Assignment, OptimizationReport, Report, VerificationReport};
use logos_core::{Category, Diagnostic, SourceSpan};
use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};

/// `{category, message, path, span: [start, end], hint}`; `span` and
/// `hint` are null when absent.
pub fn diagnostic_json(d: &Diagnostic) -> Value {
    json!({
        "category": d.category.as_str(),
        "message": d.message,
        "path": d.path(),
        "span": d.span.as_ref().map(|s| json!([s.start, s.end])),
        "hint": d.hint,
    })
}

pub fn diagnostics_json(ds: &[Diagnostic]) -> Value {
    Value::Array(ds.iter().map(diagnostic_json).collect())
}

/// Reads a diagnostic back; `None` if the value has the wrong shape.
pub fn diagnostic_from_json(v: &Value) -> Option<Diagnostic> {
    let category = Category::parse(v.get("category")?.as_str()?)?;
    let message = v.get("message")?.as_str()?;
    let mut d = Diagnostic::new(category, message);
    let path = v.get("path").and_then(Value::as_str).unwrap_or("");
    if let Some(span) = v.get("span").and_then(Value::as_array) {
        let start = span.first()?.as_u64()? as usize;
        let end = span.get(1)?.as_u64()? as usize;
        d.span = Some(SourceSpan::new(path, start, end));
    }
    if let Some(h) = v.get("hint").and_then(Value::as_str) {
        d = d.with_hint(h);
    }
    Some(d)
}

/// An exact rational plus its floating-point approximation.
pub fn rational_json(r: &Rational) -> Value {
    json!({ "exact": num::to_plain_string(r), "value": r.to_f64() })
}

fn model_json(model: &Assignment) -> Value {
    let mut m = Map::new();
    for (k, v) in model {
        m.insert(k.clone(), Value::String(v.clone()));
    }
    Value::Object(m)
}

fn verification_json(v: &VerificationReport) -> Vec<Value> {
    v.verifications
        .iter()
        .map(|n| {
            let mut o = Map::new();
            o.insert("name".into(), json!(n.name));
            o.insert("status".into(), json!(n.verdict.status.as_str()));
            o.insert("answer".into(), json!(n.verdict.answer()));
            o.insert("backend".into(), json!(n.verdict.backend));
            if let Some(m) = &n.verdict.model {
                o.insert("model".into(), model_json(m));
            }
            if !n.verdict.diagnostics.is_empty() {
                o.insert("diagnostics".into(), diagnostics_json(&n.verdict.diagnostics));
            }
            Value::Object(o)
        })
        .collect()
}

fn optimization_json(o: &OptimizationReport) -> Value {
    let objectives: Vec<Value> = o
        .objectives
        .iter()
        .map(|ob| {
            json!({
                "type": ob.direction.keyword(),
                "expression": ob.expression,
                "value": ob.value.as_ref().map(rational_json),
            })
        })
        .collect();
    let mut m = Map::new();
    m.insert("status".into(), json!(o.status.as_str()));
    m.insert("objectives".into(), Value::Array(objectives));
    if let Some(model) = &o.model {
        m.insert("model".into(), model_json(model));
    }
    m.insert("backend".into(), json!(o.backend));
    m.insert("diagnostics".into(), diagnostics_json(&o.diagnostics));
    Value::Object(m)
}

/// `{base_consistent, answer, verifications, optimization?, attempts_used,
/// diagnostics}`.
pub fn report_json(r: &Report) -> Value {
    let mut m = Map::new();
    let v = r.verification.as_ref();
    m.insert("base_consistent".into(), json!(v.and_then(|v| v.base_consistent)));
    m.insert("answer".into(), json!(r.answer()));
    m.insert("verifications".into(), Value::Array(v.map(verification_json).unwrap_or_default()));
    if let Some(o) = &r.optimization {
        m.insert("optimization".into(), optimization_json(o));
    }
    m.insert("attempts_used".into(), json!(r.attempts_used));
    let mut diagnostics = r.diagnostics.clone();
    if let Some(v) = v {
        diagnostics.extend(v.base.diagnostics.iter().cloned());
    }
    m.insert("diagnostics".into(), diagnostics_json(&diagnostics));
    Value::Object(m)
}

fn answer_word(b: bool) -> &'static str {
    if b {
        "True"
    } else {
        "False"
    }
}

fn model_lines(out: &mut String, model: &Assignment) {
    for (k, v) in model {
        let _ = writeln!(out, "  {} = {}", k, v);
    }
}

/// Human-readable report. A single verification prints as `UNSAT (False)`.
pub fn report_text(r: &Report) -> String {
    let mut out = String::new();
    for d in &r.diagnostics {
        let _ = writeln!(out, "error: {}", d);
    }
    if let Some(v) = &r.verification {
        let single = v.verifications.len() == 1;
        for n in &v.verifications {
            let status = n.verdict.status;
            match (single, status.answer()) {
                (true, Some(a)) => {
                    let _ = writeln!(out, "{} ({})", status, answer_word(a));
                }
                (true, None) => {
                    let _ = writeln!(out, "{}", status);
                }
                (false, _) => {
                    let _ = writeln!(out, "{}: {}", n.name, status);
                }
            }
            if let Some(m) = &n.verdict.model {
                model_lines(&mut out, m);
            }
            for d in &n.verdict.diagnostics {
                let _ = writeln!(out, "  note: {}", d);
            }
        }
        match v.base_consistent {
            Some(false) => out.push_str("note: the knowledge base and rules are inconsistent\n"),
            None => out.push_str("note: consistency of the knowledge base and rules is unknown\n"),
            Some(true) => {}
        }
    }
    if let Some(o) = &r.optimization {
        let _ = writeln!(out, "{}", o.status);
        for ob in &o.objectives {
            if let Some(value) = &ob.value {
                let _ =
                    writeln!(out, "  {} {} = {}", ob.direction.keyword(), ob.expression, num::to_plain_string(value));
            }
        }
        if let Some(m) = &o.model {
            model_lines(&mut out, m);
        }
        for d in &o.diagnostics {
            let _ = writeln!(out, "  note: {}", d);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use logos_core::verdict::{NamedVerdict, Status, Verdict};

    fn single(status: Status) -> Report {
        let v = VerificationReport {
            base_consistent: Some(true),
            base: Verdict::new(Status::Sat, "enum"),
            verifications: vec![NamedVerdict { name: "goal".into(), verdict: Verdict::new(status, "enum") }],
        };
        Report { verification: Some(v), attempts_used: 1, ..Report::default() }
    }

    #[test]
    fn single_verification_text_is_the_answer_line() {
        assert_eq!(report_text(&single(Status::Unsat)), "UNSAT (False)\n");
        assert_eq!(report_text(&single(Status::Sat)), "SAT (True)\n");
    }

    #[test]
    fn report_json_shape() {
        let j = report_json(&single(Status::Unsat));
        assert_eq!(j["base_consistent"], json!(true));
        assert_eq!(j["answer"], json!(false));
        assert_eq!(j["verifications"][0]["status"], json!("UNSAT"));
        assert_eq!(j["verifications"][0]["answer"], json!(false));
        assert!(j.get("optimization").is_none());
        assert_eq!(j["attempts_used"], json!(1));
    }

    #[test]
    fn diagnostics_round_trip() {
        let d = Diagnostic::at(
            Category::UndefinedSymbol,
            "unknown `Wear`",
            SourceSpan::new("/rules/0/implies/consequent", 0, 4),
        )
        .with_hint("did you mean `Wearing`?");
        let j = diagnostic_json(&d);
        assert_eq!(j["span"], json!([0, 4]));
        assert_eq!(diagnostic_from_json(&j), Some(d));
        let bare = Diagnostic::new(Category::Timeout, "slow");
        assert_eq!(diagnostic_json(&bare)["span"], Value::Null);
        assert_eq!(diagnostic_from_json(&diagnostic_json(&bare)), Some(bare));
    }

    #[test]
    fn rationals_are_exact() {
        let v = Rational::new(3.into(), 4.into());
        assert_eq!(rational_json(&v), json!({"exact": "3/4", "value": 0.75}));
    }
}
