//! Backend-agnostic orchestration: verification, optimization, action
//! dispatch and differential comparison of two backends.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::diagnostic::{Category, Diagnostic};
use crate::finite::{self, FiniteConfig, FiniteModel};
use crate::model::{canonicalize, Action, Program};
use crate::num::Rational;
use crate::query::Query;
use crate::semantics::{eval, EvalError, Interpretation, Universe, Value};
use crate::smtlib::{self, EmitOptions, ObjectiveResult, SmtModel};
use crate::term::Quantifier;
use crate::typecheck::check_program;
use crate::typed::{ConstantOrigin, Sort, TypedKind, TypedProgram, TypedTerm};
use crate::verdict::{
    Assignment, NamedVerdict, ObjectiveValue, OptStatus, OptimizationReport, Report, Status, Verdict,
    VerificationReport,
};

/// A model produced by some backend.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    Finite(FiniteModel),
    Smt(SmtModel),
}

impl Witness {
    pub fn render(&self, tp: &TypedProgram) -> Assignment {
        match self {
            Witness::Finite(m) => m.render(tp),
            Witness::Smt(m) => m.render(tp),
        }
    }

    fn interp(&self) -> &dyn Interpretation {
        match self {
            Witness::Finite(m) => m,
            Witness::Smt(m) => m,
        }
    }
}

impl Interpretation for Witness {
    fn universe(&self, sort: Sort) -> Universe {
        self.interp().universe(sort)
    }

    fn constant(&self, id: usize) -> Option<Value> {
        self.interp().constant(id)
    }

    fn apply(&self, function: usize, args: &[Value]) -> Option<Value> {
        self.interp().apply(function, args)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub status: Status,
    pub witness: Option<Witness>,
    pub diagnostics: Vec<Diagnostic>,
}

impl CheckOutcome {
    pub fn unknown(diagnostic: Diagnostic) -> Self {
        CheckOutcome { status: Status::Unknown, witness: None, diagnostics: vec![diagnostic] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptOutcome {
    pub status: OptStatus,
    /// One value per objective when optimal.
    pub values: Vec<Rational>,
    pub witness: Option<Witness>,
    pub diagnostics: Vec<Diagnostic>,
    /// The backend cannot optimize at all (e.g. the solver rejected the
    /// optimization commands); another backend may take over.
    pub rejected: bool,
}

impl OptOutcome {
    fn unknown(diagnostic: Diagnostic) -> Self {
        OptOutcome {
            status: OptStatus::Unknown,
            values: Vec::new(),
            witness: None,
            diagnostics: vec![diagnostic],
            rejected: false,
        }
    }
}

/// Decides queries. Implementations must be deterministic for a fixed
/// configuration.
pub trait Backend: Sync {
    fn name(&self) -> &str;
    fn check(&self, q: &Query) -> CheckOutcome;
    fn optimize(&self, q: &Query) -> OptOutcome;
}

/// The finite-domain enumerator as a backend.
#[derive(Debug, Clone, Copy, Default)]
pub struct EnumBackend {
    pub config: FiniteConfig,
}

impl Backend for EnumBackend {
    fn name(&self) -> &str {
        "enum"
    }

    fn check(&self, q: &Query) -> CheckOutcome {
        let r = finite::enumerate_check(q, self.config);
        CheckOutcome { status: r.status, witness: r.model.map(Witness::Finite), diagnostics: r.diagnostics }
    }

    fn optimize(&self, q: &Query) -> OptOutcome {
        let r = finite::enumerate_optimize(q, self.config);
        OptOutcome {
            status: r.status,
            values: r.values,
            witness: r.model.map(Witness::Finite),
            diagnostics: r.diagnostics,
            rejected: false,
        }
    }
}

/// Runs one SMT-LIB script to completion and returns standard output.
pub trait SolverRunner: Sync {
    fn run(&self, script: &str) -> Result<String, Diagnostic>;
}

/// An external SMT solver as a backend.
pub struct SmtBackend<R> {
    pub runner: R,
    pub produce_models: bool,
}

impl<R: SolverRunner> SmtBackend<R> {
    pub fn new(runner: R) -> Self {
        SmtBackend { runner, produce_models: true }
    }

    fn reply(&self, script: &smtlib::Script) -> Result<smtlib::SolverReply, Diagnostic> {
        let stdout = self.runner.run(&script.text)?;
        smtlib::parse_output(&stdout)
            .map_err(|e| Diagnostic::new(Category::SolverFailure, format!("unreadable solver output: {}", e)))
    }

    fn witness(
        &self,
        q: &Query,
        script: &smtlib::Script,
        model: Option<&smtlib::SExpr>,
    ) -> Result<Option<Witness>, Diagnostic> {
        match model {
            Some(m) => SmtModel::new(&q.program, &script.symbols, m)
                .map(|m| Some(Witness::Smt(m)))
                .map_err(|e| Diagnostic::new(Category::SolverFailure, format!("unreadable model: {}", e))),
            None => Ok(None),
        }
    }
}

impl<R: SolverRunner> Backend for SmtBackend<R> {
    fn name(&self) -> &str {
        "smt"
    }

    fn check(&self, q: &Query) -> CheckOutcome {
        let script = smtlib::emit_query(q, EmitOptions { produce_models: self.produce_models });
        let reply = match self.reply(&script) {
            Ok(r) => r,
            Err(d) => return CheckOutcome::unknown(d),
        };
        if !reply.errors.is_empty() {
            return CheckOutcome::unknown(Diagnostic::new(
                Category::SolverFailure,
                format!("solver reported: {}", reply.errors.join("; ")),
            ));
        }
        let mut out = CheckOutcome { status: reply.status, witness: None, diagnostics: Vec::new() };
        if reply.status == Status::Sat {
            match self.witness(q, &script, reply.model.as_ref()) {
                Ok(w) => out.witness = w,
                Err(d) => out.diagnostics.push(d),
            }
        }
        out
    }

    fn optimize(&self, q: &Query) -> OptOutcome {
        let script = smtlib::emit_optimize(&q.program, EmitOptions { produce_models: self.produce_models });
        let reply = match self.reply(&script) {
            Ok(r) => r,
            Err(d) => {
                // A solver that chokes on the optimization commands.
                let rejected = d.category == Category::SolverFailure;
                return OptOutcome { rejected, ..OptOutcome::unknown(d) };
            }
        };
        if !reply.errors.is_empty() {
            let d = Diagnostic::new(
                Category::UnsupportedConstruct,
                format!("solver rejected the optimization script: {}", reply.errors.join("; ")),
            );
            return OptOutcome { rejected: true, ..OptOutcome::unknown(d) };
        }
        match reply.status {
            Status::Unsat => OptOutcome {
                status: OptStatus::Infeasible,
                values: Vec::new(),
                witness: None,
                diagnostics: Vec::new(),
                rejected: false,
            },
            Status::Unknown => OptOutcome::unknown(Diagnostic::new(Category::SolverFailure, "solver returned unknown")),
            Status::Sat => {
                let Some(block) = reply.objectives.as_ref() else {
                    let d = Diagnostic::new(Category::UnsupportedConstruct, "solver printed no objective values");
                    return OptOutcome { rejected: true, ..OptOutcome::unknown(d) };
                };
                let results = match smtlib::parse_objectives(block) {
                    Ok(r) => r,
                    Err(e) => return OptOutcome::unknown(Diagnostic::new(Category::SolverFailure, e)),
                };
                let mut values = Vec::new();
                for r in results {
                    match r {
                        ObjectiveResult::Value(v) => values.push(v),
                        ObjectiveResult::Unbounded(text) => {
                            return OptOutcome::unknown(Diagnostic::new(
                                Category::UnsupportedConstruct,
                                format!("objective has no finite optimum ({})", text),
                            ))
                        }
                    }
                }
                let mut out = OptOutcome {
                    status: OptStatus::Optimal,
                    values,
                    witness: None,
                    diagnostics: Vec::new(),
                    rejected: false,
                };
                match self.witness(q, &script, reply.model.as_ref()) {
                    Ok(w) => out.witness = w,
                    Err(d) => out.diagnostics.push(d),
                }
                out
            }
        }
    }
}

/// Runs two backends and reconciles them: agreement gives that status, an
/// UNKNOWN defers to the other, a conflict is UNKNOWN with a diagnostic
/// (unless domain closure explains it, in which case the solver wins).
pub struct Both<'a> {
    pub smt: &'a dyn Backend,
    pub finite: &'a dyn Backend,
}

impl Backend for Both<'_> {
    fn name(&self) -> &str {
        "both"
    }

    fn check(&self, q: &Query) -> CheckOutcome {
        let a = self.smt.check(q);
        let b = self.finite.check(q);
        match (a.status, b.status) {
            (x, y) if x == y => {
                let mut out = a;
                if out.witness.is_none() {
                    out.witness = b.witness;
                }
                out
            }
            (Status::Unknown, _) => b,
            (_, Status::Unknown) => a,
            (Status::Sat, Status::Unsat) if closure_sensitive(q) => a,
            (x, y) => CheckOutcome::unknown(Diagnostic::new(
                Category::SolverFailure,
                format!("backends disagree: {} says {}, {} says {}", self.smt.name(), x, self.finite.name(), y),
            )),
        }
    }

    fn optimize(&self, q: &Query) -> OptOutcome {
        let a = self.smt.optimize(q);
        let b = self.finite.optimize(q);
        match (a.status, b.status) {
            (OptStatus::Unknown, _) => b,
            (_, OptStatus::Unknown) => a,
            (x, y) if x == y && a.values == b.values => a,
            _ => OptOutcome::unknown(Diagnostic::new(
                Category::SolverFailure,
                format!(
                    "backends disagree: {} says {} {:?}, {} says {} {:?}",
                    self.smt.name(),
                    a.status,
                    a.values.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                    self.finite.name(),
                    b.status,
                    b.values.iter().map(|v| v.to_string()).collect::<Vec<_>>()
                ),
            )),
        }
    }
}

/// Result of re-evaluating one conjunct of a query under a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validation {
    Holds,
    Fails,
    /// Quantifies over an infinite sort, or the model leaves it undetermined.
    Unchecked(String),
}

/// Re-evaluates every conjunct of `q` under `model`, in assertion order.
pub fn validate_model(q: &Query, model: &dyn Interpretation) -> Vec<(String, Validation)> {
    q.assertions()
        .into_iter()
        .map(|a| {
            let mut env = Vec::new();
            let v = match eval(model, &a.term, &mut env) {
                Ok(Some(Value::Bool(true))) => Validation::Holds,
                Ok(Some(_)) => Validation::Fails,
                Ok(None) => Validation::Unchecked(String::from("undetermined under the model")),
                Err(EvalError::Unbounded(_)) => Validation::Unchecked(String::from("quantifies over an infinite sort")),
                Err(EvalError::Undetermined(s)) => Validation::Unchecked(s),
            };
            (a.path.clone(), v)
        })
        .collect()
}

/// True when domain closure may make the finite backend report UNSAT for a
/// query that has (larger) models: an existential over a declared sort in
/// effect, a witness or decision constant of a declared sort, or a function
/// returning a declared sort.
pub fn closure_sensitive(q: &Query) -> bool {
    let tp = &q.program;
    let declared = |s: Sort| matches!(s, Sort::Declared(_));
    if tp.constants.iter().any(|c| c.origin != ConstantOrigin::Declared && declared(c.sort)) {
        return true;
    }
    let mut terms: Vec<&TypedTerm> = q.assertions().into_iter().map(|a| &a.term).collect();
    terms.extend(q.objectives().iter().map(|o| &o.term));
    let mut sensitive = false;
    for t in &terms {
        t.walk(&mut |n| {
            if let TypedKind::Apply(f, _) = &n.kind {
                if declared(tp.functions[*f].range) {
                    sensitive = true;
                }
            }
        });
    }
    sensitive || terms.iter().any(|t| existential_over_declared(t, true))
}

fn existential_over_declared(t: &TypedTerm, positive: bool) -> bool {
    match &t.kind {
        TypedKind::Quant(q, vars, body) => {
            let effective = match (q, positive) {
                (Quantifier::Exists, true) | (Quantifier::ForAll, false) => Quantifier::Exists,
                _ => Quantifier::ForAll,
            };
            (effective == Quantifier::Exists && vars.iter().any(|(_, s)| matches!(s, Sort::Declared(_))))
                || existential_over_declared(body, positive)
        }
        TypedKind::Not(x) => existential_over_declared(x, !positive),
        TypedKind::Implies(a, b) => existential_over_declared(a, !positive) || existential_over_declared(b, positive),
        TypedKind::And(xs) | TypedKind::Or(xs) => xs.iter().any(|x| existential_over_declared(x, positive)),
        // Both polarities occur under equivalence-like positions.
        _ => t.children().into_iter().any(|c| {
            c.sort == Sort::Bool && (existential_over_declared(c, true) || existential_over_declared(c, false))
        }),
    }
}

fn verdict_of(q: &Query, backend: &dyn Backend) -> Verdict {
    let out = backend.check(q);
    let mut v =
        Verdict { status: out.status, model: None, backend: backend.name().to_string(), diagnostics: out.diagnostics };
    if let (Status::Sat, Some(w)) = (out.status, &out.witness) {
        let failed: Vec<String> =
            validate_model(q, w).into_iter().filter(|(_, r)| *r == Validation::Fails).map(|(p, _)| p).collect();
        if failed.is_empty() {
            v.model = Some(w.render(&q.program));
        } else {
            v.status = Status::Unknown;
            v.diagnostics.push(Diagnostic::new(
                Category::SolverFailure,
                format!("returned model violates {}", failed.join(", ")),
            ));
        }
    }
    v
}

/// Checks the base, then each verification goal against the base.
pub fn verify_program(tp: &TypedProgram, backend: &dyn Backend) -> VerificationReport {
    let base = verdict_of(&Query::base(tp), backend);
    let verifications = (0..tp.verifications.len())
        .map(|i| NamedVerdict {
            name: tp.verifications[i].name.clone(),
            verdict: verdict_of(&Query::verification(tp, i), backend),
        })
        .collect();
    VerificationReport { base_consistent: base.answer(), base, verifications }
}

/// Optimizes with `backend`, handing over to `fallback` when the backend
/// cannot optimize at all.
pub fn optimize_program(
    tp: &TypedProgram,
    backend: &dyn Backend,
    fallback: Option<&dyn Backend>,
) -> OptimizationReport {
    let q = Query::optimization(tp);
    let mut used = backend;
    let mut out = backend.optimize(&q);
    if out.rejected {
        if let Some(f) = fallback {
            let mut notes = core::mem::take(&mut out.diagnostics);
            out = f.optimize(&q);
            used = f;
            notes.append(&mut out.diagnostics);
            out.diagnostics = notes;
        }
    }
    let objectives = q
        .objectives()
        .iter()
        .enumerate()
        .map(|(i, o)| ObjectiveValue {
            direction: o.direction,
            expression: tp.display(&o.term).to_string(),
            value: out.values.get(i).cloned(),
        })
        .collect();
    OptimizationReport {
        status: out.status,
        objectives,
        model: out.witness.as_ref().map(|w| w.render(&q.program)),
        backend: used.name().to_string(),
        diagnostics: out.diagnostics,
    }
}

/// Backends used by [`run_program`].
pub struct Backends<'a> {
    pub verify: &'a dyn Backend,
    pub optimize: &'a dyn Backend,
    pub fallback: Option<&'a dyn Backend>,
}

/// Front end result: the typed program or every diagnostic.
pub fn compile(program: Program) -> Result<TypedProgram, Vec<Diagnostic>> {
    let canonical = canonicalize(program)?;
    check_program(&canonical)
}

/// Canonicalize, type-check, then run the listed actions in order.
pub fn run_program(program: Program, backends: &Backends<'_>) -> Report {
    let tp = match compile(program) {
        Ok(tp) => tp,
        Err(diags) => return Report::from_diagnostics(diags),
    };
    run_typed(&tp, backends)
}

pub fn run_typed(tp: &TypedProgram, backends: &Backends<'_>) -> Report {
    if tp.actions.is_empty() {
        return Report::from_diagnostics(vec![Diagnostic::new(Category::NoActions, "the program lists no actions")]);
    }
    let mut report = Report { attempts_used: 1, ..Report::default() };
    for action in &tp.actions {
        match action {
            Action::VerifyConditions => report.verification = Some(verify_program(tp, backends.verify)),
            Action::Optimize => report.optimization = Some(optimize_program(tp, backends.optimize, backends.fallback)),
        }
    }
    report
}

/// One compared query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comparison {
    /// `base`, the verification name, or `optimization`.
    pub query: String,
    pub left: String,
    pub right: String,
    pub closure_sensitive: bool,
    pub outcome: Agreement,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Agreement {
    Agree,
    /// At least one side is UNKNOWN.
    Inconclusive,
    /// A conflict that domain closure can explain.
    Skipped,
    Disagree,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AgreementReport {
    pub comparisons: Vec<Comparison>,
}

impl AgreementReport {
    pub fn defects(&self) -> impl Iterator<Item = &Comparison> {
        self.comparisons.iter().filter(|c| c.outcome == Agreement::Disagree)
    }

    pub fn closure_sensitive(&self) -> bool {
        self.comparisons.iter().any(|c| c.closure_sensitive)
    }
}

fn compare_status(q: &Query, name: String, a: Status, b: Status) -> Comparison {
    let sensitive = closure_sensitive(q);
    let outcome = match (a, b) {
        (Status::Unknown, _) | (_, Status::Unknown) => Agreement::Inconclusive,
        (x, y) if x == y => Agreement::Agree,
        // Only the finite side can lose models to closure.
        (Status::Sat, Status::Unsat) if sensitive => Agreement::Skipped,
        _ => Agreement::Disagree,
    };
    Comparison { query: name, left: a.to_string(), right: b.to_string(), closure_sensitive: sensitive, outcome }
}

/// Runs both backends on the base, every verification and the
/// optimization (if any); `finite` is the side subject to domain closure.
pub fn differential_check(tp: &TypedProgram, smt: &dyn Backend, finite: &dyn Backend) -> AgreementReport {
    let mut comparisons = Vec::new();
    let base = Query::base(tp);
    comparisons.push(compare_status(&base, "base".into(), smt.check(&base).status, finite.check(&base).status));
    for (i, v) in tp.verifications.iter().enumerate() {
        let q = Query::verification(tp, i);
        comparisons.push(compare_status(&q, v.name.clone(), smt.check(&q).status, finite.check(&q).status));
    }
    if tp.optimization.as_ref().is_some_and(|o| !o.objectives.is_empty()) {
        let q = Query::optimization(tp);
        let (a, b) = (smt.optimize(&q), finite.optimize(&q));
        let sensitive = closure_sensitive(&q);
        let outcome = match (a.status, b.status) {
            (OptStatus::Unknown, _) | (_, OptStatus::Unknown) => Agreement::Inconclusive,
            (x, y) if x == y && a.values == b.values => Agreement::Agree,
            _ if sensitive => Agreement::Skipped,
            _ => Agreement::Disagree,
        };
        let show = |o: &OptOutcome| {
            let vals: Vec<String> = o.values.iter().map(|v| v.to_string()).collect();
            if vals.is_empty() {
                o.status.to_string()
            } else {
                format!("{} {}", o.status, vals.join(","))
            }
        };
        comparisons.push(Comparison {
            query: "optimization".into(),
            left: show(&a),
            right: show(&b),
            closure_sensitive: sensitive,
            outcome,
        });
    }
    AgreementReport { comparisons }
}

/// A backend decorator that rewrites each query before delegating, for
/// mutation testing of the comparison machinery.
pub struct Rewriting<'a> {
    pub inner: &'a dyn Backend,
    pub rewrite: Box<dyn Fn(&Query) -> Query + Sync + 'a>,
}

impl Backend for Rewriting<'_> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn check(&self, q: &Query) -> CheckOutcome {
        self.inner.check(&(self.rewrite)(q))
    }

    fn optimize(&self, q: &Query) -> OptOutcome {
        self.inner.optimize(&(self.rewrite)(q))
    }
}
