//! The SMT-LIB scripts a program's actions send to the solver, as one text.

use logos_core::model::Action;
use logos_core::query::Query;
use logos_core::smtlib::{emit_query, EmitOptions};
use logos_core::TypedProgram;

/// One script per query, each headed by a `;` comment naming it: the base
/// when there is nothing else to check, every verification, then the
/// optimization.
pub fn emit_scripts(tp: &TypedProgram, opts: EmitOptions) -> String {
    let mut queries: Vec<(String, Query)> = Vec::new();
    if tp.actions.contains(&Action::VerifyConditions) {
        for (i, v) in tp.verifications.iter().enumerate() {
            queries.push((format!("verification: {}", v.name), Query::verification(tp, i)));
        }
    }
    if tp.actions.contains(&Action::Optimize) && tp.optimization.is_some() {
        queries.push(("optimization".into(), Query::optimization(tp)));
    }
    if queries.is_empty() {
        queries.push(("base".into(), Query::base(tp)));
    }
    let mut out = String::new();
    for (label, q) in &queries {
        out.push_str("; ");
        out.push_str(label);
        out.push('\n');
        out.push_str(&emit_query(q, opts).text);
    }
    out
}
