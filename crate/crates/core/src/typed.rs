//! Typed terms and programs produced by the type checker.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::model::{Action, Direction, SortKind};
use crate::num::{self, Rational};
use crate::term::{ArithOp, CmpOp, Quantifier};

/// A resolved sort. Builtin aliases (a user sort of kind `IntSort`) resolve
/// to the builtin; `Declared` and `Enum` index [`TypedProgram::sorts`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Bool,
    Int,
    Real,
    BitVec(u32),
    Declared(usize),
    Enum(usize),
}

impl Sort {
    pub fn is_numeric(self) -> bool {
        matches!(self, Sort::Int | Sort::Real)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SortInfo {
    pub name: String,
    pub kind: SortKind,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSig {
    pub name: String,
    pub domain: Vec<Sort>,
    pub range: Sort,
    /// Sort references as written (after canonicalization), for emission.
    pub domain_refs: Vec<String>,
    pub range_ref: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantOrigin {
    /// Member of a `constants` group.
    Declared,
    /// Free decision variable of the optimization block.
    Decision,
    /// Witness for an outermost existential of a query.
    Skolem,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantSym {
    pub name: String,
    pub sort: Sort,
    pub sort_ref: String,
    pub origin: ConstantOrigin,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TypedKind {
    Bool(bool),
    Num(Rational),
    /// Quantifier-bound variable.
    Var(String),
    /// Index into [`TypedProgram::constants`].
    Const(usize),
    EnumValue {
        sort: usize,
        index: usize,
    },
    /// Index into [`TypedProgram::functions`]; nullary functions have no args.
    Apply(usize, Vec<TypedTerm>),
    /// Int-to-Real widening.
    ToReal(Box<TypedTerm>),
    Cmp(CmpOp, Box<TypedTerm>, Box<TypedTerm>),
    Arith(ArithOp, Box<TypedTerm>, Box<TypedTerm>),
    Neg(Box<TypedTerm>),
    And(Vec<TypedTerm>),
    Or(Vec<TypedTerm>),
    Not(Box<TypedTerm>),
    Implies(Box<TypedTerm>, Box<TypedTerm>),
    Distinct(Vec<TypedTerm>),
    Quant(Quantifier, Vec<(String, Sort)>, Box<TypedTerm>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypedTerm {
    pub kind: TypedKind,
    pub sort: Sort,
}

impl TypedTerm {
    pub fn new(kind: TypedKind, sort: Sort) -> Self {
        TypedTerm { kind, sort }
    }

    pub fn bool(b: bool) -> Self {
        TypedTerm::new(TypedKind::Bool(b), Sort::Bool)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(t: TypedTerm) -> Self {
        TypedTerm::new(TypedKind::Not(Box::new(t)), Sort::Bool)
    }

    pub fn and(ts: Vec<TypedTerm>) -> Self {
        TypedTerm::new(TypedKind::And(ts), Sort::Bool)
    }

    pub fn or(ts: Vec<TypedTerm>) -> Self {
        TypedTerm::new(TypedKind::Or(ts), Sort::Bool)
    }

    pub fn implies(a: TypedTerm, b: TypedTerm) -> Self {
        TypedTerm::new(TypedKind::Implies(Box::new(a), Box::new(b)), Sort::Bool)
    }

    pub fn quant(q: Quantifier, vars: Vec<(String, Sort)>, body: TypedTerm) -> Self {
        if vars.is_empty() {
            return body;
        }
        TypedTerm::new(TypedKind::Quant(q, vars, Box::new(body)), Sort::Bool)
    }

    pub fn children(&self) -> Vec<&TypedTerm> {
        match &self.kind {
            TypedKind::Bool(_)
            | TypedKind::Num(_)
            | TypedKind::Var(_)
            | TypedKind::Const(_)
            | TypedKind::EnumValue { .. } => Vec::new(),
            TypedKind::Apply(_, args) | TypedKind::And(args) | TypedKind::Or(args) | TypedKind::Distinct(args) => {
                args.iter().collect()
            }
            TypedKind::Cmp(_, l, r) | TypedKind::Arith(_, l, r) | TypedKind::Implies(l, r) => {
                alloc::vec![&**l, &**r]
            }
            TypedKind::ToReal(t) | TypedKind::Neg(t) | TypedKind::Not(t) | TypedKind::Quant(_, _, t) => {
                alloc::vec![&**t]
            }
        }
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a TypedTerm)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    pub fn has_quantifier(&self) -> bool {
        let mut found = false;
        self.walk(&mut |t| {
            if matches!(t.kind, TypedKind::Quant(..)) {
                found = true;
            }
        });
        found
    }

    /// Free occurrences of quantifier-bound variable names.
    pub fn free_vars(&self) -> Vec<String> {
        fn go(t: &TypedTerm, bound: &mut Vec<String>, out: &mut Vec<String>) {
            match &t.kind {
                TypedKind::Var(v) => {
                    if !bound.contains(v) && !out.contains(v) {
                        out.push(v.clone());
                    }
                }
                TypedKind::Quant(_, vars, body) => {
                    let n = bound.len();
                    bound.extend(vars.iter().map(|(v, _)| v.clone()));
                    go(body, bound, out);
                    bound.truncate(n);
                }
                _ => {
                    for c in t.children() {
                        go(c, bound, out);
                    }
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Replaces free occurrences of `name` by `with`. `with` must be closed.
    pub fn substitute(&self, name: &str, with: &TypedTerm) -> TypedTerm {
        let kind = match &self.kind {
            TypedKind::Var(v) if v == name => return with.clone(),
            TypedKind::Quant(q, vars, body) => {
                if vars.iter().any(|(v, _)| v == name) {
                    return self.clone();
                }
                TypedKind::Quant(*q, vars.clone(), Box::new(body.substitute(name, with)))
            }
            _ => return self.map_children(&mut |c| c.substitute(name, with)),
        };
        TypedTerm::new(kind, self.sort)
    }

    /// Rebuilds the node with `f` applied to each direct child.
    pub fn map_children(&self, f: &mut dyn FnMut(&TypedTerm) -> TypedTerm) -> TypedTerm {
        let bx = |t: &TypedTerm, f: &mut dyn FnMut(&TypedTerm) -> TypedTerm| Box::new(f(t));
        let kind = match &self.kind {
            TypedKind::Bool(_)
            | TypedKind::Num(_)
            | TypedKind::Var(_)
            | TypedKind::Const(_)
            | TypedKind::EnumValue { .. } => self.kind.clone(),
            TypedKind::Apply(fid, args) => TypedKind::Apply(*fid, args.iter().map(&mut *f).collect()),
            TypedKind::And(args) => TypedKind::And(args.iter().map(&mut *f).collect()),
            TypedKind::Or(args) => TypedKind::Or(args.iter().map(&mut *f).collect()),
            TypedKind::Distinct(args) => TypedKind::Distinct(args.iter().map(&mut *f).collect()),
            TypedKind::Cmp(op, l, r) => TypedKind::Cmp(*op, bx(l, f), bx(r, f)),
            TypedKind::Arith(op, l, r) => TypedKind::Arith(*op, bx(l, f), bx(r, f)),
            TypedKind::Implies(l, r) => TypedKind::Implies(bx(l, f), bx(r, f)),
            TypedKind::ToReal(t) => TypedKind::ToReal(bx(t, f)),
            TypedKind::Neg(t) => TypedKind::Neg(bx(t, f)),
            TypedKind::Not(t) => TypedKind::Not(bx(t, f)),
            TypedKind::Quant(q, vars, body) => TypedKind::Quant(*q, vars.clone(), bx(body, f)),
        };
        TypedTerm::new(kind, self.sort)
    }
}

/// A named, typed Bool formula with its source location.
#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub name: String,
    pub path: String,
    pub term: TypedTerm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypedObjective {
    pub direction: Direction,
    pub path: String,
    pub term: TypedTerm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypedOptimization {
    pub constraints: Vec<Assertion>,
    pub objectives: Vec<TypedObjective>,
}

/// A fully typed program: every assertion is a closed Bool term.
#[derive(Debug, Clone, PartialEq)]
pub struct TypedProgram {
    pub sorts: Vec<SortInfo>,
    pub functions: Vec<FunctionSig>,
    pub constants: Vec<ConstantSym>,
    pub knowledge_base: Vec<Assertion>,
    pub rules: Vec<Assertion>,
    pub verifications: Vec<Assertion>,
    pub optimization: Option<TypedOptimization>,
    pub actions: Vec<Action>,
}

impl TypedProgram {
    pub fn sort_name(&self, sort: Sort) -> String {
        match sort {
            Sort::Bool => "Bool".into(),
            Sort::Int => "Int".into(),
            Sort::Real => "Real".into(),
            Sort::BitVec(w) => alloc::format!("BitVec({})", w),
            Sort::Declared(i) | Sort::Enum(i) => self.sorts[i].name.clone(),
        }
    }

    /// Applies `f` to every assertion term: KB, rules, verifications and
    /// optimization constraints (objectives are numeric and left alone).
    pub fn map_assertions(&self, f: &dyn Fn(&TypedTerm) -> TypedTerm) -> TypedProgram {
        let map = |xs: &Vec<Assertion>| -> Vec<Assertion> {
            xs.iter().map(|a| Assertion { term: f(&a.term), ..a.clone() }).collect()
        };
        TypedProgram {
            knowledge_base: map(&self.knowledge_base),
            rules: map(&self.rules),
            verifications: map(&self.verifications),
            optimization: self
                .optimization
                .as_ref()
                .map(|o| TypedOptimization { constraints: map(&o.constraints), objectives: o.objectives.clone() }),
            ..self.clone()
        }
    }

    /// Renders a term in DSL-like syntax.
    pub fn display<'a>(&'a self, term: &'a TypedTerm) -> TermDisplay<'a> {
        TermDisplay { program: self, term }
    }
}

pub struct TermDisplay<'a> {
    program: &'a TypedProgram,
    term: &'a TypedTerm,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.program;
        fn list(f: &mut fmt::Formatter<'_>, p: &TypedProgram, head: &str, args: &[TypedTerm]) -> fmt::Result {
            write!(f, "{}(", head)?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{}", p.display(a))?;
            }
            f.write_str(")")
        }
        match &self.term.kind {
            TypedKind::Bool(b) => f.write_str(if *b { "True" } else { "False" }),
            TypedKind::Num(v) => {
                if self.term.sort == Sort::Real {
                    f.write_str(&num::to_decimal_string(v))
                } else {
                    f.write_str(&num::to_plain_string(v))
                }
            }
            TypedKind::Var(v) => f.write_str(v),
            TypedKind::Const(c) => f.write_str(&p.constants[*c].name),
            TypedKind::EnumValue { sort, index } => f.write_str(&p.sorts[*sort].values[*index]),
            TypedKind::Apply(fid, args) => list(f, p, &p.functions[*fid].name, args),
            TypedKind::ToReal(t) => write!(f, "ToReal({})", p.display(t)),
            TypedKind::Cmp(op, l, r) => write!(f, "({} {} {})", p.display(l), op.symbol(), p.display(r)),
            TypedKind::Arith(op, l, r) => write!(f, "({} {} {})", p.display(l), op.symbol(), p.display(r)),
            TypedKind::Neg(t) => write!(f, "-({})", p.display(t)),
            TypedKind::And(args) => list(f, p, "And", args),
            TypedKind::Or(args) => list(f, p, "Or", args),
            TypedKind::Distinct(args) => list(f, p, "Distinct", args),
            TypedKind::Not(t) => write!(f, "Not({})", p.display(t)),
            TypedKind::Implies(l, r) => write!(f, "Implies({}, {})", p.display(l), p.display(r)),
            TypedKind::Quant(q, vars, body) => {
                write!(f, "{}([", q.keyword())?;
                for (i, (v, _)) in vars.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    f.write_str(v)?;
                }
                write!(f, "], {})", p.display(body))
            }
        }
    }
}
