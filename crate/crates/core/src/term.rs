//! Surface (untyped) expression trees.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::num::{self, Rational};

/// Character range inside the expression string a node was parsed from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn join(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

/// A name together with where it was written.
#[derive(Debug, Clone, Eq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

impl PartialEq for Ident {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Neq => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn is_order(self) -> bool {
        matches!(self, CmpOp::Lt | CmpOp::Le | CmpOp::Gt | CmpOp::Ge)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    ForAll,
    Exists,
}

impl Quantifier {
    pub fn keyword(self) -> &'static str {
        match self {
            Quantifier::ForAll => "ForAll",
            Quantifier::Exists => "Exists",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TermKind {
    Bool(bool),
    /// Integer numeral.
    Int(Rational),
    /// Decimal numeral such as `2.45`, kept exact.
    Decimal(Rational),
    Symbol(String),
    Apply(Ident, Vec<Term>),
    Cmp(CmpOp, Box<Term>, Box<Term>),
    Arith(ArithOp, Box<Term>, Box<Term>),
    Neg(Box<Term>),
    And(Vec<Term>),
    Or(Vec<Term>),
    Not(Box<Term>),
    Implies(Box<Term>, Box<Term>),
    Distinct(Vec<Term>),
    Quant(Quantifier, Vec<Ident>, Box<Term>),
}

/// Surface expression node. Equality ignores spans, so a reparsed
/// pretty-print compares equal to the original.
#[derive(Debug, Clone)]
pub struct Term {
    pub kind: TermKind,
    pub span: Span,
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Term {
    pub fn new(kind: TermKind, span: Span) -> Self {
        Term { kind, span }
    }

    fn precedence(&self) -> u8 {
        match &self.kind {
            TermKind::Cmp(..) => 1,
            TermKind::Arith(ArithOp::Add | ArithOp::Sub, ..) => 2,
            TermKind::Arith(ArithOp::Mul, ..) => 3,
            TermKind::Neg(_) => 4,
            _ => 5,
        }
    }

    /// Visits every node in pre-order.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Term)) {
        f(self);
        match &self.kind {
            TermKind::Bool(_) | TermKind::Int(_) | TermKind::Decimal(_) | TermKind::Symbol(_) => {}
            TermKind::Apply(_, args) | TermKind::And(args) | TermKind::Or(args) | TermKind::Distinct(args) => {
                args.iter().for_each(|a| a.walk(f))
            }
            TermKind::Cmp(_, l, r) | TermKind::Arith(_, l, r) | TermKind::Implies(l, r) => {
                l.walk(f);
                r.walk(f);
            }
            TermKind::Neg(t) | TermKind::Not(t) | TermKind::Quant(_, _, t) => t.walk(f),
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, head: &str, args: &[Term]) -> fmt::Result {
    write!(f, "{}(", head)?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{}", a)?;
    }
    f.write_str(")")
}

fn write_operand(f: &mut fmt::Formatter<'_>, t: &Term, min_prec: u8) -> fmt::Result {
    if t.precedence() < min_prec {
        write!(f, "({})", t)
    } else {
        write!(f, "{}", t)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            TermKind::Bool(b) => f.write_str(if *b { "True" } else { "False" }),
            TermKind::Int(v) => write!(f, "{}", v.numer()),
            TermKind::Decimal(v) => f.write_str(&num::to_decimal_string(v)),
            TermKind::Symbol(s) => f.write_str(s),
            TermKind::Apply(name, args) => write_list(f, &name.name, args),
            TermKind::Cmp(op, l, r) => {
                // non-associative: both operands must bind tighter
                write_operand(f, l, 2)?;
                write!(f, " {} ", op.symbol())?;
                write_operand(f, r, 2)
            }
            TermKind::Arith(op, l, r) => {
                let prec = self.precedence();
                write_operand(f, l, prec)?;
                write!(f, " {} ", op.symbol())?;
                write_operand(f, r, prec + 1)
            }
            TermKind::Neg(t) => {
                f.write_str("-")?;
                write_operand(f, t, 4)
            }
            TermKind::And(args) => write_list(f, "And", args),
            TermKind::Or(args) => write_list(f, "Or", args),
            TermKind::Distinct(args) => write_list(f, "Distinct", args),
            TermKind::Not(t) => write!(f, "Not({})", t),
            TermKind::Implies(l, r) => write!(f, "Implies({}, {})", l, r),
            TermKind::Quant(q, vars, body) => {
                write!(f, "{}([", q.keyword())?;
                for (i, v) in vars.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    f.write_str(&v.name)?;
                }
                write!(f, "], {})", body)
            }
        }
    }
}
