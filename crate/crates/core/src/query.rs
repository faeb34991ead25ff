//! Satisfiability queries handed to a backend.
//!
//! A query is the typed program together with which of its formulas are
//! conjoined: the base (knowledge base and rules), the base plus one
//! verification goal, or the base plus the optimization constraints and
//! objectives. The outermost existential prefix of a goal is replaced by
//! fresh witness constants, so a satisfying model names the witnesses.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::term::Quantifier;
use crate::typed::{Assertion, ConstantOrigin, ConstantSym, Sort, TypedKind, TypedObjective, TypedProgram, TypedTerm};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryKind {
    Base,
    Verification(usize),
    Optimization,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub kind: QueryKind,
    /// The program, extended with witness constants for the goal.
    pub program: TypedProgram,
    pub goal: Option<Assertion>,
}

fn sort_ref(tp: &TypedProgram, sort: Sort) -> String {
    match sort {
        Sort::Bool => "BoolSort".into(),
        Sort::Int => "IntSort".into(),
        Sort::Real => "RealSort".into(),
        Sort::BitVec(w) => format!("BitVecSort({})", w),
        Sort::Declared(i) | Sort::Enum(i) => tp.sorts[i].name.clone(),
    }
}

/// Replaces the outermost existential prefix of `term` by fresh constants
/// appended to `tp.constants`.
pub fn skolemize(tp: &mut TypedProgram, term: &TypedTerm) -> TypedTerm {
    let mut taken: BTreeSet<String> = BTreeSet::new();
    taken.extend(tp.constants.iter().map(|c| c.name.clone()));
    taken.extend(tp.functions.iter().map(|f| f.name.clone()));
    for s in &tp.sorts {
        taken.insert(s.name.clone());
        taken.extend(s.values.iter().cloned());
    }
    let mut cur = term.clone();
    while let TypedKind::Quant(Quantifier::Exists, vars, body) = &cur.kind {
        let mut body = (**body).clone();
        for (v, s) in vars {
            let mut name = v.clone();
            let mut k = 1;
            while taken.contains(&name) {
                name = format!("{}_{}", v, k);
                k += 1;
            }
            taken.insert(name.clone());
            let id = tp.constants.len();
            tp.constants.push(ConstantSym {
                name,
                sort: *s,
                sort_ref: sort_ref(tp, *s),
                origin: ConstantOrigin::Skolem,
            });
            body = body.substitute(v, &TypedTerm::new(TypedKind::Const(id), *s));
        }
        cur = body;
    }
    cur
}

impl Query {
    pub fn base(tp: &TypedProgram) -> Query {
        Query { kind: QueryKind::Base, program: tp.clone(), goal: None }
    }

    pub fn verification(tp: &TypedProgram, index: usize) -> Query {
        let mut program = tp.clone();
        let v = &tp.verifications[index];
        let term = skolemize(&mut program, &v.term);
        Query { kind: QueryKind::Verification(index), program, goal: Some(Assertion { term, ..v.clone() }) }
    }

    pub fn optimization(tp: &TypedProgram) -> Query {
        Query { kind: QueryKind::Optimization, program: tp.clone(), goal: None }
    }

    /// Every conjunct of the query, in emission order.
    pub fn assertions(&self) -> Vec<&Assertion> {
        let p = &self.program;
        let mut out: Vec<&Assertion> = p.knowledge_base.iter().chain(p.rules.iter()).collect();
        if self.kind == QueryKind::Optimization {
            if let Some(opt) = &p.optimization {
                out.extend(opt.constraints.iter());
            }
        }
        out.extend(self.goal.iter());
        out
    }

    pub fn objectives(&self) -> &[TypedObjective] {
        match (&self.kind, &self.program.optimization) {
            (QueryKind::Optimization, Some(opt)) => &opt.objectives,
            _ => &[],
        }
    }
}
