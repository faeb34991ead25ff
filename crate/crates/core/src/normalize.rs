//! Logic-preserving rewrites on typed terms: simplification and prenex form.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::num::Rational;
use crate::term::{ArithOp, CmpOp, Quantifier};
use crate::typed::{Sort, TypedKind, TypedTerm};

fn as_bool(t: &TypedTerm) -> Option<bool> {
    match t.kind {
        TypedKind::Bool(b) => Some(b),
        _ => None,
    }
}

fn as_num(t: &TypedTerm) -> Option<&Rational> {
    match &t.kind {
        TypedKind::Num(v) => Some(v),
        _ => None,
    }
}

/// A literal whose identity is decided syntactically.
fn literal_key(t: &TypedTerm) -> Option<TypedKind> {
    match &t.kind {
        TypedKind::Bool(_) | TypedKind::Num(_) | TypedKind::EnumValue { .. } => Some(t.kind.clone()),
        _ => None,
    }
}

pub fn compare(op: CmpOp, l: &Rational, r: &Rational) -> bool {
    match op {
        CmpOp::Eq => l == r,
        CmpOp::Neq => l != r,
        CmpOp::Lt => l < r,
        CmpOp::Le => l <= r,
        CmpOp::Gt => l > r,
        CmpOp::Ge => l >= r,
    }
}

pub fn arith(op: ArithOp, l: &Rational, r: &Rational) -> Rational {
    match op {
        ArithOp::Add => l + r,
        ArithOp::Sub => l - r,
        ArithOp::Mul => l * r,
    }
}

fn step(t: &TypedTerm) -> TypedTerm {
    let t = t.map_children(&mut |c| step(c));
    match t.kind {
        TypedKind::Not(inner) => match inner.kind {
            TypedKind::Not(x) => *x,
            TypedKind::Bool(b) => TypedTerm::bool(!b),
            kind => TypedTerm::not(TypedTerm::new(kind, inner.sort)),
        },
        TypedKind::And(args) => junction(args, true),
        TypedKind::Or(args) => junction(args, false),
        TypedKind::Implies(a, b) => match (as_bool(&a), as_bool(&b)) {
            (Some(true), _) => *b,
            (Some(false), _) | (_, Some(true)) => TypedTerm::bool(true),
            (_, Some(false)) => TypedTerm::not(*a),
            _ => TypedTerm::implies(*a, *b),
        },
        TypedKind::Cmp(op, l, r) => {
            if let (Some(x), Some(y)) = (as_num(&l), as_num(&r)) {
                return TypedTerm::bool(compare(op, x, y));
            }
            if matches!(op, CmpOp::Eq | CmpOp::Neq) {
                if let (Some(x), Some(y)) = (literal_key(&l), literal_key(&r)) {
                    return TypedTerm::bool((x == y) == (op == CmpOp::Eq));
                }
            }
            TypedTerm::new(TypedKind::Cmp(op, l, r), Sort::Bool)
        }
        TypedKind::Arith(op, l, r) => {
            if let (Some(x), Some(y)) = (as_num(&l), as_num(&r)) {
                return TypedTerm::new(TypedKind::Num(arith(op, x, y)), t.sort);
            }
            TypedTerm::new(TypedKind::Arith(op, l, r), t.sort)
        }
        TypedKind::Neg(x) => match x.kind {
            TypedKind::Num(v) => TypedTerm::new(TypedKind::Num(-v), t.sort),
            kind => TypedTerm::new(TypedKind::Neg(Box::new(TypedTerm::new(kind, x.sort))), t.sort),
        },
        TypedKind::ToReal(x) => match x.kind {
            TypedKind::Num(v) => TypedTerm::new(TypedKind::Num(v), Sort::Real),
            kind => TypedTerm::new(TypedKind::ToReal(Box::new(TypedTerm::new(kind, x.sort))), Sort::Real),
        },
        TypedKind::Distinct(args) => {
            let keys: Option<Vec<TypedKind>> = args.iter().map(literal_key).collect();
            match keys {
                Some(keys) => {
                    let all_distinct = keys.iter().enumerate().all(|(i, k)| !keys[..i].contains(k));
                    TypedTerm::bool(all_distinct)
                }
                None => TypedTerm::new(TypedKind::Distinct(args), Sort::Bool),
            }
        }
        TypedKind::Quant(q, vars, body) => match body.kind {
            // Universes are never empty.
            TypedKind::Bool(b) => TypedTerm::bool(b),
            kind => TypedTerm::quant(q, vars, TypedTerm::new(kind, body.sort)),
        },
        kind => TypedTerm::new(kind, t.sort),
    }
}

/// Flattens and folds an And (`conj`) or Or node.
fn junction(args: Vec<TypedTerm>, conj: bool) -> TypedTerm {
    let mut out = Vec::new();
    for a in args {
        let nested = match a.kind {
            TypedKind::And(xs) if conj => xs,
            TypedKind::Or(xs) if !conj => xs,
            kind => alloc::vec![TypedTerm::new(kind, a.sort)],
        };
        for x in nested {
            match as_bool(&x) {
                Some(b) if b == conj => {}
                Some(_) => return TypedTerm::bool(!conj),
                None => out.push(x),
            }
        }
    }
    match out.len() {
        0 => TypedTerm::bool(conj),
        1 => out.pop().unwrap(),
        _ if conj => TypedTerm::and(out),
        _ => TypedTerm::or(out),
    }
}

/// Rewrites to a fixpoint: double negation, flattening, identity and
/// annihilator elimination, and folding of ground numeric subterms.
pub fn simplify(term: &TypedTerm) -> TypedTerm {
    let mut cur = term.clone();
    loop {
        let next = step(&cur);
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

fn flip(q: Quantifier) -> Quantifier {
    match q {
        Quantifier::ForAll => Quantifier::Exists,
        Quantifier::Exists => Quantifier::ForAll,
    }
}

fn collect_names(t: &TypedTerm, out: &mut BTreeSet<String>) {
    t.walk(&mut |n| match &n.kind {
        TypedKind::Var(v) => {
            out.insert(v.clone());
        }
        TypedKind::Quant(_, vars, _) => out.extend(vars.iter().map(|(v, _)| v.clone())),
        _ => {}
    });
}

struct Prenexer {
    used: BTreeSet<String>,
    prefix: Vec<(Quantifier, String, Sort)>,
    env: Vec<(String, String)>,
}

impl Prenexer {
    fn fresh(&mut self, base: &str) -> String {
        let mut name = String::from(base);
        loop {
            name.push('\'');
            if !self.used.contains(&name) {
                self.used.insert(name.clone());
                return name;
            }
        }
    }

    fn rename(&self, t: &TypedTerm) -> TypedTerm {
        match &t.kind {
            TypedKind::Var(v) => match self.env.iter().rev().find(|(old, _)| old == v) {
                Some((_, new)) => TypedTerm::new(TypedKind::Var(new.clone()), t.sort),
                None => t.clone(),
            },
            _ => t.map_children(&mut |c| self.rename(c)),
        }
    }

    fn pull(&mut self, t: &TypedTerm, positive: bool) -> TypedTerm {
        match &t.kind {
            TypedKind::Quant(q, vars, body) => {
                let q = if positive { *q } else { flip(*q) };
                let mark = self.env.len();
                for (v, s) in vars {
                    let new = self.fresh(v);
                    self.prefix.push((q, new.clone(), *s));
                    self.env.push((v.clone(), new));
                }
                let m = self.pull(body, positive);
                self.env.truncate(mark);
                m
            }
            TypedKind::Not(x) => TypedTerm::not(self.pull(x, !positive)),
            TypedKind::And(xs) => TypedTerm::and(xs.iter().map(|x| self.pull(x, positive)).collect()),
            TypedKind::Or(xs) => TypedTerm::or(xs.iter().map(|x| self.pull(x, positive)).collect()),
            TypedKind::Implies(a, b) => {
                let a = self.pull(a, !positive);
                let b = self.pull(b, positive);
                TypedTerm::implies(a, b)
            }
            _ => match quantified_subformula(t) {
                // atom[Q] == (Q and atom[true]) or (not Q and atom[false])
                Some(q) => {
                    let when = |b: bool| replace(t, &q, &TypedTerm::bool(b));
                    let split = TypedTerm::or(alloc::vec![
                        TypedTerm::and(alloc::vec![q.clone(), when(true)]),
                        TypedTerm::and(alloc::vec![TypedTerm::not(q.clone()), when(false)]),
                    ]);
                    self.pull(&split, positive)
                }
                None => self.rename(t),
            },
        }
    }
}

/// First Bool-sorted proper subterm of an atom that contains a quantifier.
fn quantified_subformula(atom: &TypedTerm) -> Option<TypedTerm> {
    let mut found = None;
    for c in atom.children() {
        c.walk(&mut |n| {
            if found.is_none() && n.sort == Sort::Bool && n.has_quantifier() {
                found = Some(n.clone());
            }
        });
        if found.is_some() {
            break;
        }
    }
    found
}

fn replace(t: &TypedTerm, from: &TypedTerm, to: &TypedTerm) -> TypedTerm {
    if t == from {
        return to.clone();
    }
    t.map_children(&mut |c| replace(c, from, to))
}

/// Moves every quantifier into one outer prefix over a quantifier-free
/// matrix. The existing outer prefix keeps its names; quantifiers pulled out
/// from under a connective get fresh primed names (`p'`, `p''`, ...).
pub fn to_prenex(term: &TypedTerm) -> TypedTerm {
    let mut used = BTreeSet::new();
    collect_names(term, &mut used);
    let mut p = Prenexer { used, prefix: Vec::new(), env: Vec::new() };
    let mut cur = term;
    while let TypedKind::Quant(q, vars, body) = &cur.kind {
        for (v, s) in vars {
            // a nested binder shadowing an outer one gets a fresh name
            if p.prefix.iter().any(|(_, n, _)| n == v) {
                let new = p.fresh(v);
                p.env.push((v.clone(), new.clone()));
                p.prefix.push((*q, new, *s));
            } else {
                p.prefix.push((*q, v.clone(), *s));
            }
        }
        cur = body;
    }
    let mut matrix = p.pull(cur, true);

    let mut groups: Vec<(Quantifier, Vec<(String, Sort)>)> = Vec::new();
    for (q, v, s) in p.prefix {
        match groups.last_mut() {
            Some((gq, vars)) if *gq == q => vars.push((v, s)),
            _ => groups.push((q, alloc::vec![(v, s)])),
        }
    }
    for (q, vars) in groups.into_iter().rev() {
        matrix = TypedTerm::quant(q, vars, matrix);
    }
    matrix
}

/// True when no quantifier occurs below a connective or atom.
pub fn is_prenex(term: &TypedTerm) -> bool {
    let mut cur = term;
    while let TypedKind::Quant(_, _, body) = &cur.kind {
        cur = body;
    }
    !cur.has_quantifier()
}

/// Bound-variable names in binding order, with repeats.
pub fn bound_names(term: &TypedTerm) -> Vec<String> {
    let mut out = Vec::new();
    term.walk(&mut |n| {
        if let TypedKind::Quant(_, vars, _) = &n.kind {
            out.extend(vars.iter().map(|(v, _)| v.clone()));
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num;
    use alloc::string::ToString;
    use alloc::vec;

    fn pred(f: usize, v: &str) -> TypedTerm {
        TypedTerm::new(
            TypedKind::Apply(f, vec![TypedTerm::new(TypedKind::Var(v.to_string()), Sort::Declared(0))]),
            Sort::Bool,
        )
    }

    fn real(s: &str) -> TypedTerm {
        TypedTerm::new(TypedKind::Num(num::parse_decimal(s).unwrap()), Sort::Real)
    }

    fn boolc(i: usize) -> TypedTerm {
        TypedTerm::new(TypedKind::Const(i), Sort::Bool)
    }

    #[test]
    fn double_negation_removed() {
        let w = pred(0, "p");
        assert_eq!(simplify(&TypedTerm::not(TypedTerm::not(w.clone()))), w);
    }

    #[test]
    fn and_identity_and_annihilator() {
        let a = boolc(0);
        assert_eq!(simplify(&TypedTerm::and(vec![a.clone(), TypedTerm::bool(true)])), a);
        assert_eq!(simplify(&TypedTerm::and(vec![a.clone(), TypedTerm::bool(false)])), TypedTerm::bool(false));
        assert_eq!(simplify(&TypedTerm::or(vec![a, TypedTerm::bool(true)])), TypedTerm::bool(true));
    }

    #[test]
    fn ground_comparison_folds() {
        let t = TypedTerm::new(TypedKind::Cmp(CmpOp::Ge, Box::new(real("2.45")), Box::new(real("5.5"))), Sort::Bool);
        assert_eq!(simplify(&t), TypedTerm::bool(false));
    }

    #[test]
    fn nested_and_flattens() {
        let t = TypedTerm::and(vec![boolc(0), TypedTerm::and(vec![boolc(1), boolc(2)])]);
        assert_eq!(simplify(&t), TypedTerm::and(vec![boolc(0), boolc(1), boolc(2)]));
    }

    #[test]
    fn prenex_pulls_through_and_with_fresh_name() {
        let forall = TypedTerm::quant(Quantifier::ForAll, vec![("p".into(), Sort::Declared(0))], pred(0, "p"));
        let t = TypedTerm::and(vec![forall, boolc(0)]);
        let expected = TypedTerm::quant(
            Quantifier::ForAll,
            vec![("p'".into(), Sort::Declared(0))],
            TypedTerm::and(vec![pred(0, "p'"), boolc(0)]),
        );
        assert_eq!(to_prenex(&t), expected);
    }

    #[test]
    fn prenex_leaves_prenex_terms_alone() {
        let t = TypedTerm::quant(
            Quantifier::ForAll,
            vec![("g".into(), Sort::Declared(0))],
            TypedTerm::implies(pred(0, "g"), pred(1, "g")),
        );
        assert_eq!(to_prenex(&t), t);
        let qf = TypedTerm::and(vec![boolc(0), TypedTerm::not(boolc(1))]);
        assert_eq!(to_prenex(&qf), qf);
    }

    #[test]
    fn prenex_flips_under_negation_and_antecedent() {
        let ex = TypedTerm::quant(Quantifier::Exists, vec![("x".into(), Sort::Declared(0))], pred(0, "x"));
        let t = TypedTerm::implies(ex, boolc(0));
        let out = to_prenex(&t);
        match &out.kind {
            TypedKind::Quant(Quantifier::ForAll, vars, body) => {
                assert_eq!(vars[0].0, "x'");
                assert!(!body.has_quantifier());
            }
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn prenex_renames_sibling_clashes_apart() {
        let a = TypedTerm::quant(Quantifier::ForAll, vec![("p".into(), Sort::Declared(0))], pred(0, "p"));
        let b = TypedTerm::quant(Quantifier::Exists, vec![("p".into(), Sort::Declared(0))], pred(1, "p"));
        let out = to_prenex(&TypedTerm::or(vec![a, b]));
        assert!(is_prenex(&out));
        let names = bound_names(&out);
        assert_eq!(names, ["p'", "p''"]);
    }

    #[test]
    fn quantifier_inside_equality_is_split() {
        let q = TypedTerm::quant(Quantifier::ForAll, vec![("p".into(), Sort::Declared(0))], pred(0, "p"));
        let t = TypedTerm::new(TypedKind::Cmp(CmpOp::Eq, Box::new(q), Box::new(boolc(0))), Sort::Bool);
        let out = to_prenex(&t);
        assert!(is_prenex(&out));
        assert_eq!(bound_names(&out).len(), 2);
    }
}
