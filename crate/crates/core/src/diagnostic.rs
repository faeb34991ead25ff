//! Structured diagnostics consumed by the repair loop.

use alloc::string::{String, ToString};
use core::cmp::Ordering;
use core::fmt;

/// Fixed vocabulary of diagnostic categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    JsonSyntax,
    SchemaViolation,
    ExpressionSyntax,
    UnknownSort,
    UndefinedSymbol,
    ArityMismatch,
    SortMismatch,
    UnboundVariable,
    DuplicateName,
    UnknownAction,
    UnsupportedConstruct,
    SolverFailure,
    Timeout,
    NotFiniteDomain,
    Infeasible,
    NoActions,
}

impl Category {
    pub const ALL: [Category; 16] = [
        Category::JsonSyntax,
        Category::SchemaViolation,
        Category::ExpressionSyntax,
        Category::UnknownSort,
        Category::UndefinedSymbol,
        Category::ArityMismatch,
        Category::SortMismatch,
        Category::UnboundVariable,
        Category::DuplicateName,
        Category::UnknownAction,
        Category::UnsupportedConstruct,
        Category::SolverFailure,
        Category::Timeout,
        Category::NotFiniteDomain,
        Category::Infeasible,
        Category::NoActions,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::JsonSyntax => "JsonSyntax",
            Category::SchemaViolation => "SchemaViolation",
            Category::ExpressionSyntax => "ExpressionSyntax",
            Category::UnknownSort => "UnknownSort",
            Category::UndefinedSymbol => "UndefinedSymbol",
            Category::ArityMismatch => "ArityMismatch",
            Category::SortMismatch => "SortMismatch",
            Category::UnboundVariable => "UnboundVariable",
            Category::DuplicateName => "DuplicateName",
            Category::UnknownAction => "UnknownAction",
            Category::UnsupportedConstruct => "UnsupportedConstruct",
            Category::SolverFailure => "SolverFailure",
            Category::Timeout => "Timeout",
            Category::NotFiniteDomain => "NotFiniteDomain",
            Category::Infeasible => "Infeasible",
            Category::NoActions => "NoActions",
        }
    }

    pub fn parse(name: &str) -> Option<Category> {
        Category::ALL.into_iter().find(|c| c.as_str() == name)
    }

    /// Categories describing a defect in the program source, as opposed to
    /// backend or infrastructure trouble.
    pub fn is_source_error(self) -> bool {
        matches!(
            self,
            Category::JsonSyntax
                | Category::SchemaViolation
                | Category::ExpressionSyntax
                | Category::UnknownSort
                | Category::UndefinedSymbol
                | Category::ArityMismatch
                | Category::SortMismatch
                | Category::UnboundVariable
                | Category::DuplicateName
                | Category::UnknownAction
                | Category::NoActions
        )
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Location of a diagnostic: a JSON pointer into the input document plus a
/// character range inside the expression string found there.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    pub path: String,
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    pub fn new(path: impl Into<String>, start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        SourceSpan { path: path.into(), start, end }
    }

    /// A span covering a whole JSON node.
    pub fn node(path: impl Into<String>) -> Self {
        SourceSpan::new(path, 0, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Diagnostic {
    pub category: Category,
    pub message: String,
    pub span: Option<SourceSpan>,
    pub hint: Option<String>,
}

impl Diagnostic {
    pub fn new(category: Category, message: impl Into<String>) -> Self {
        Diagnostic { category, message: message.into(), span: None, hint: None }
    }

    pub fn at(category: Category, message: impl Into<String>, span: SourceSpan) -> Self {
        Diagnostic { category, message: message.into(), span: Some(span), hint: None }
    }

    pub fn with_hint(mut self, hint: impl Into<String>) -> Self {
        self.hint = Some(hint.into());
        self
    }

    pub fn path(&self) -> &str {
        self.span.as_ref().map(|s| s.path.as_str()).unwrap_or("")
    }

    pub fn offset(&self) -> usize {
        self.span.as_ref().map(|s| s.start).unwrap_or(0)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.category)?;
        if let Some(span) = &self.span {
            write!(f, " at {}[{}..{}]", span.path, span.start, span.end)?;
        }
        write!(f, ": {}", self.message)?;
        if let Some(hint) = &self.hint {
            write!(f, " (hint: {})", hint)?;
        }
        Ok(())
    }
}

/// Compares JSON pointers segment by segment, numerically where both
/// segments are array indices, so `/rules/2` sorts before `/rules/10`.
pub fn compare_paths(a: &str, b: &str) -> Ordering {
    let mut left = a.split('/');
    let mut right = b.split('/');
    loop {
        match (left.next(), right.next()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(x), Some(y)) => {
                let ord = match (x.parse::<u64>(), y.parse::<u64>()) {
                    (Ok(m), Ok(n)) => m.cmp(&n),
                    _ => x.cmp(y),
                };
                if ord != Ordering::Equal {
                    return ord;
                }
            }
        }
    }
}

/// Stable sort by (path, offset).
pub fn sort_diagnostics(diagnostics: &mut [Diagnostic]) {
    diagnostics.sort_by(|a, b| compare_paths(a.path(), b.path()).then_with(|| a.offset().cmp(&b.offset())));
}

/// Escapes one JSON pointer reference token.
pub fn pointer_token(token: &str) -> String {
    token.replace('~', "~0").replace('/', "~1")
}

/// Appends a reference token to a JSON pointer.
pub fn child_path(parent: &str, token: impl fmt::Display) -> String {
    let mut out = String::from(parent);
    out.push('/');
    out.push_str(&pointer_token(&token.to_string()));
    out
}
