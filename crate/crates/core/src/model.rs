//! Program data model, as read from a DSL document, and canonicalization.
//!
//! Every declaration remembers the JSON pointer it came from so later stages
//! can point diagnostics at the exact node.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::diagnostic::{Category, Diagnostic, SourceSpan};
use crate::parser::{parse_expression, ExprError};
use crate::term::Term;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SortKind {
    DeclareSort,
    BoolSort,
    IntSort,
    RealSort,
    EnumSort,
    BitVecSort(u32),
}

impl SortKind {
    /// Accepts the keyword with or without the `Sort` suffix.
    pub fn from_keyword(word: &str) -> Option<SortKind> {
        let base = word.strip_suffix("Sort").unwrap_or(word);
        match base {
            "Declare" => Some(SortKind::DeclareSort),
            "Bool" => Some(SortKind::BoolSort),
            "Int" => Some(SortKind::IntSort),
            "Real" => Some(SortKind::RealSort),
            "Enum" => Some(SortKind::EnumSort),
            _ => None,
        }
    }

    pub fn keyword(self) -> String {
        match self {
            SortKind::DeclareSort => "DeclareSort".to_string(),
            SortKind::BoolSort => "BoolSort".to_string(),
            SortKind::IntSort => "IntSort".to_string(),
            SortKind::RealSort => "RealSort".to_string(),
            SortKind::EnumSort => "EnumSort".to_string(),
            SortKind::BitVecSort(w) => format!("BitVecSort({})", w),
        }
    }
}

/// Parses `BitVec(8)` / `BitVecSort(8)` style references.
pub fn parse_bitvec_ref(text: &str) -> Option<u32> {
    let rest = text.strip_prefix("BitVecSort(").or_else(|| text.strip_prefix("BitVec("))?;
    let digits = rest.strip_suffix(')')?;
    digits.trim().parse().ok()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SortDecl {
    pub name: String,
    pub kind: SortKind,
    pub values: Vec<String>,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDecl {
    pub name: String,
    pub domain: Vec<String>,
    pub range: String,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantGroup {
    pub group: String,
    pub sort: String,
    pub members: Vec<String>,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableDecl {
    pub name: String,
    pub sort: String,
    pub path: String,
}

/// An expression string, where it came from, and its parse.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceExpr {
    pub path: String,
    pub text: String,
    pub parsed: Result<Term, ExprError>,
}

impl SourceExpr {
    pub fn parse(path: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        let parsed = parse_expression(&text);
        SourceExpr { path: path.into(), text, parsed }
    }

    /// The syntax error, if any, as a diagnostic.
    pub fn syntax_diagnostic(&self) -> Option<Diagnostic> {
        self.parsed.as_ref().err().map(|e| {
            let mut d = Diagnostic::at(
                Category::ExpressionSyntax,
                format!("{} in `{}`", e.message, self.text),
                SourceSpan::new(self.path.clone(), e.span.start, e.span.end),
            );
            if !e.expected.is_empty() {
                d = d.with_hint(format!("expected one of: {}", e.expected.join(", ")));
            }
            d
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeEntry {
    pub assertion: SourceExpr,
    pub value: Option<bool>,
    pub variables: Option<Vec<VariableDecl>>,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Implies { antecedent: SourceExpr, consequent: SourceExpr },
    Constraint(SourceExpr),
}

impl Body {
    pub fn exprs(&self) -> Vec<&SourceExpr> {
        match self {
            Body::Implies { antecedent, consequent } => alloc::vec![antecedent, consequent],
            Body::Constraint(c) => alloc::vec![c],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinderKind {
    ForAll,
    Exists,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Binder {
    pub kind: BinderKind,
    pub vars: Vec<VariableDecl>,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub name: String,
    pub binder: Option<Binder>,
    pub body: Body,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub name: String,
    pub binder: Option<Binder>,
    pub body: Body,
    pub path: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

impl Direction {
    pub fn keyword(self) -> &'static str {
        match self {
            Direction::Minimize => "minimize",
            Direction::Maximize => "maximize",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub direction: Direction,
    pub expression: SourceExpr,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationSpec {
    pub constraints: Vec<SourceExpr>,
    pub objectives: Vec<Objective>,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionName {
    pub name: String,
    pub path: String,
}

pub const VERIFY_CONDITIONS: &str = "verify_conditions";
pub const OPTIMIZE: &str = "optimize";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    VerifyConditions,
    Optimize,
}

impl Action {
    pub fn from_name(name: &str) -> Option<Action> {
        match name {
            VERIFY_CONDITIONS | "verify" => Some(Action::VerifyConditions),
            OPTIMIZE => Some(Action::Optimize),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::VerifyConditions => VERIFY_CONDITIONS,
            Action::Optimize => OPTIMIZE,
        }
    }
}

/// A complete DSL document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Program {
    pub sorts: Vec<SortDecl>,
    pub functions: Vec<FunctionDecl>,
    pub constants: Vec<ConstantGroup>,
    pub variables: Vec<VariableDecl>,
    pub knowledge_base: Vec<KnowledgeEntry>,
    pub rules: Vec<Rule>,
    pub verifications: Vec<Verification>,
    pub optimization: Option<OptimizationSpec>,
    pub actions: Vec<ActionName>,
}

impl Program {
    /// Every expression in document order.
    pub fn expressions(&self) -> Vec<&SourceExpr> {
        let mut out = Vec::new();
        for kb in &self.knowledge_base {
            out.push(&kb.assertion);
        }
        for r in &self.rules {
            out.extend(r.body.exprs());
        }
        for v in &self.verifications {
            out.extend(v.body.exprs());
        }
        if let Some(opt) = &self.optimization {
            out.extend(opt.constraints.iter());
            out.extend(opt.objectives.iter().map(|o| &o.expression));
        }
        out
    }

    fn sort_refs_mut(&mut self) -> Vec<&mut String> {
        let mut out: Vec<&mut String> = Vec::new();
        for f in &mut self.functions {
            out.extend(f.domain.iter_mut());
            out.push(&mut f.range);
        }
        for g in &mut self.constants {
            out.push(&mut g.sort);
        }
        for v in &mut self.variables {
            out.push(&mut v.sort);
        }
        for kb in &mut self.knowledge_base {
            if let Some(vars) = &mut kb.variables {
                out.extend(vars.iter_mut().map(|v| &mut v.sort));
            }
        }
        for r in &mut self.rules {
            if let Some(b) = &mut r.binder {
                out.extend(b.vars.iter_mut().map(|v| &mut v.sort));
            }
        }
        for v in &mut self.verifications {
            if let Some(b) = &mut v.binder {
                out.extend(b.vars.iter_mut().map(|v| &mut v.sort));
            }
        }
        out
    }
}

/// Builtin sort keyword a plain name stands for, when not shadowed by a
/// user sort that means something else.
fn builtin_keyword(name: &str) -> Option<&'static str> {
    match name {
        "Bool" => Some("BoolSort"),
        "Int" => Some("IntSort"),
        "Real" => Some("RealSort"),
        _ => None,
    }
}

/// Unifies action and sort-keyword aliases. Idempotent.
pub fn canonicalize(raw: Program) -> Result<Program, Vec<Diagnostic>> {
    let mut program = raw;
    let mut diagnostics = Vec::new();
    for action in &mut program.actions {
        match Action::from_name(&action.name) {
            Some(a) => action.name = a.name().to_string(),
            None => diagnostics.push(
                Diagnostic::at(
                    Category::UnknownAction,
                    format!("unknown action `{}`", action.name),
                    SourceSpan::node(action.path.clone()),
                )
                .with_hint("accepted actions: verify_conditions (alias verify), optimize"),
            ),
        }
    }
    if !diagnostics.is_empty() {
        return Err(diagnostics);
    }

    // "Int" -> "IntSort" unless a user sort named "Int" means something else.
    let shadowed: Vec<(String, SortKind)> = program.sorts.iter().map(|s| (s.name.clone(), s.kind)).collect();
    for reference in program.sort_refs_mut() {
        if let Some(keyword) = builtin_keyword(reference) {
            let conflicting = shadowed
                .iter()
                .any(|(name, kind)| name == reference.as_str() && SortKind::from_keyword(keyword) != Some(*kind));
            if !conflicting {
                *reference = keyword.to_string();
            }
        } else if let Some(width) = parse_bitvec_ref(reference) {
            *reference = SortKind::BitVecSort(width).keyword();
        }
    }
    Ok(program)
}
