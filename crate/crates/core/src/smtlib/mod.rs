//! SMT-LIB2 emission and solver output parsing.
//!
//! Emission is a pure function of the query: identical input gives a
//! byte-identical script. Every program symbol is mapped to an SMT symbol
//! once, up front; names that collide with SMT-LIB reserved words or theory
//! symbols get a numeric suffix, and names that are not simple symbols are
//! `|quoted|`.

mod output;
mod sexpr;

pub use output::{parse_objectives, parse_output, ObjectiveResult, SmtModel, SolverReply};
pub use sexpr::{parse_sexprs, SExpr};

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::model::{Direction, SortKind};
use crate::num::{self, Rational};
use crate::query::{Query, QueryKind};
use crate::term::{ArithOp, CmpOp, Quantifier};
use crate::typed::{ConstantOrigin, Sort, TypedKind, TypedProgram, TypedTerm};

/// Words that may not be used as user symbols.
const RESERVED: &[&str] = &[
    "!",
    "_",
    "as",
    "let",
    "exists",
    "forall",
    "match",
    "par",
    "NUMERAL",
    "DECIMAL",
    "STRING",
    "BINARY",
    "HEXADECIMAL",
    "assert",
    "check-sat",
    "check-sat-assuming",
    "declare-const",
    "declare-datatype",
    "declare-datatypes",
    "declare-fun",
    "declare-sort",
    "define-fun",
    "define-fun-rec",
    "define-funs-rec",
    "define-sort",
    "echo",
    "exit",
    "get-assertions",
    "get-assignment",
    "get-info",
    "get-model",
    "get-option",
    "get-proof",
    "get-unsat-assumptions",
    "get-unsat-core",
    "get-value",
    "pop",
    "push",
    "reset",
    "reset-assertions",
    "set-info",
    "set-logic",
    "set-option",
    "minimize",
    "maximize",
    "get-objectives",
    "true",
    "false",
    "not",
    "and",
    "or",
    "xor",
    "=>",
    "=",
    "distinct",
    "ite",
    "+",
    "-",
    "*",
    "/",
    "div",
    "mod",
    "abs",
    "<",
    "<=",
    ">",
    ">=",
    "to_real",
    "to_int",
    "is_int",
    "Bool",
    "Int",
    "Real",
    "Array",
    "select",
    "store",
    "const",
    "BitVec",
    "concat",
    "extract",
    "bvadd",
    "bvsub",
    "bvmul",
    "bvneg",
    "bvand",
    "bvor",
    "bvnot",
    "bvult",
    "bvule",
    "bvugt",
    "bvuge",
    "bvslt",
    "bvsle",
    "bvsgt",
    "bvsge",
    "String",
    "RegLan",
    "Seq",
    "Set",
    "lambda",
    "root-obj",
    "pi",
    "euler",
    "exp",
    "sin",
    "cos",
    "sqrt",
];

fn is_simple_symbol(s: &str) -> bool {
    const EXTRA: &str = "~!@$%^&*_-+=<>.?/";
    let mut chars = s.chars();
    match chars.next() {
        None => false,
        Some(c) if c.is_ascii_digit() => false,
        Some(_) => s.chars().all(|c| c.is_ascii_alphanumeric() || EXTRA.contains(c)),
    }
}

/// The symbol as it must appear in a script.
fn quoted(s: &str) -> String {
    if is_simple_symbol(s) && !s.starts_with('@') && !s.starts_with('.') {
        s.to_string()
    } else {
        let clean: String = s.chars().filter(|c| *c != '|' && *c != '\\').collect();
        format!("|{}|", clean)
    }
}

/// SMT names for every program symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolMap {
    /// Per entry of `TypedProgram::sorts`; builtin aliases map to the builtin.
    pub sorts: Vec<String>,
    /// Enum constructors, per sort (empty for non-enum sorts).
    pub values: Vec<Vec<String>>,
    pub functions: Vec<String>,
    pub constants: Vec<String>,
}

impl SymbolMap {
    pub fn new(tp: &TypedProgram) -> SymbolMap {
        // A suffixed name must not collide with any original name.
        let mut originals: BTreeSet<String> = BTreeSet::new();
        for s in &tp.sorts {
            originals.insert(s.name.clone());
            originals.extend(s.values.iter().cloned());
        }
        originals.extend(tp.functions.iter().map(|f| f.name.clone()));
        originals.extend(tp.constants.iter().map(|c| c.name.clone()));
        let mut assigned: BTreeSet<String> = BTreeSet::new();
        let reserved = |n: &str| RESERVED.contains(&n) || n.contains("!val!");
        let mut fresh = |name: &str| {
            let mut candidate = name.to_string();
            let mut k = 1;
            while reserved(&candidate)
                || assigned.contains(&candidate)
                || (candidate != name && originals.contains(&candidate))
            {
                candidate = format!("{}_{}", name, k);
                k += 1;
            }
            assigned.insert(candidate.clone());
            quoted(&candidate)
        };
        let mut sorts = Vec::new();
        let mut values = Vec::new();
        for s in &tp.sorts {
            let smt = match s.kind {
                SortKind::DeclareSort | SortKind::EnumSort => fresh(&s.name),
                _ => builtin_alias_target(s.kind),
            };
            sorts.push(smt);
            values.push(s.values.iter().map(|v| fresh(v)).collect());
        }
        let functions = tp.functions.iter().map(|f| fresh(&f.name)).collect();
        let constants = tp.constants.iter().map(|c| fresh(&c.name)).collect();
        SymbolMap { sorts, values, functions, constants }
    }

    pub fn sort(&self, sort: Sort) -> String {
        match sort {
            Sort::Bool => "Bool".into(),
            Sort::Int => "Int".into(),
            Sort::Real => "Real".into(),
            Sort::BitVec(w) => format!("(_ BitVec {})", w),
            Sort::Declared(i) | Sort::Enum(i) => self.sorts[i].clone(),
        }
    }

    /// Every symbol in use at the top level of a script.
    fn globals(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = BTreeSet::new();
        out.extend(self.sorts.iter().cloned());
        out.extend(self.values.iter().flatten().cloned());
        out.extend(self.functions.iter().cloned());
        out.extend(self.constants.iter().cloned());
        out
    }
}

fn builtin_alias_target(kind: SortKind) -> String {
    match kind {
        SortKind::BoolSort => "Bool".into(),
        SortKind::IntSort => "Int".into(),
        SortKind::RealSort => "Real".into(),
        SortKind::BitVecSort(w) => format!("(_ BitVec {})", w),
        SortKind::DeclareSort | SortKind::EnumSort => unreachable!("not an alias"),
    }
}

/// An emitted script and the names it uses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Script {
    pub text: String,
    pub symbols: SymbolMap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmitOptions {
    pub produce_models: bool,
}

impl Default for EmitOptions {
    fn default() -> Self {
        EmitOptions { produce_models: true }
    }
}

fn int_literal(v: &Rational) -> String {
    if *v < num::int(0) {
        format!("(- {})", num::to_plain_string(&-v))
    } else {
        num::to_plain_string(v)
    }
}

fn real_literal(v: &Rational) -> String {
    let mag = if *v < num::int(0) { -v.clone() } else { v.clone() };
    let body =
        if mag.is_integer() { format!("{}.0", mag.numer()) } else { format!("(/ {} {})", mag.numer(), mag.denom()) };
    if *v < num::int(0) {
        format!("(- {})", body)
    } else {
        body
    }
}

struct Emitter<'a> {
    symbols: &'a SymbolMap,
    globals: BTreeSet<String>,
    /// Bound variables in scope: (program name, script name).
    bound: Vec<(String, String)>,
}

impl Emitter<'_> {
    fn bind(&mut self, name: &str) -> String {
        let mut candidate = name.to_string();
        let mut k = 1;
        while RESERVED.contains(&candidate.as_str())
            || self.globals.contains(&quoted(&candidate))
            || self.bound.iter().any(|(_, s)| *s == quoted(&candidate))
        {
            candidate = format!("{}_{}", name, k);
            k += 1;
        }
        let smt = quoted(&candidate);
        self.bound.push((name.to_string(), smt.clone()));
        smt
    }

    fn term(&mut self, t: &TypedTerm, out: &mut String) {
        match &t.kind {
            TypedKind::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            TypedKind::Num(v) => out.push_str(&match t.sort {
                Sort::Real => real_literal(v),
                _ => int_literal(v),
            }),
            TypedKind::Var(name) => {
                let smt = self.bound.iter().rev().find(|(n, _)| n == name).map(|(_, s)| s.clone());
                out.push_str(&smt.unwrap_or_else(|| quoted(name)));
            }
            TypedKind::Const(id) => out.push_str(&self.symbols.constants[*id]),
            TypedKind::EnumValue { sort, index } => out.push_str(&self.symbols.values[*sort][*index]),
            TypedKind::Apply(f, args) => {
                if args.is_empty() {
                    out.push_str(&self.symbols.functions[*f]);
                } else {
                    out.push('(');
                    out.push_str(&self.symbols.functions[*f]);
                    for a in args {
                        out.push(' ');
                        self.term(a, out);
                    }
                    out.push(')');
                }
            }
            TypedKind::ToReal(x) => self.app("to_real", &[x], out),
            TypedKind::Cmp(CmpOp::Neq, l, r) => {
                out.push_str("(not ");
                self.app("=", &[l, r], out);
                out.push(')');
            }
            TypedKind::Cmp(op, l, r) => {
                let head = match op {
                    CmpOp::Eq => "=",
                    CmpOp::Lt => "<",
                    CmpOp::Le => "<=",
                    CmpOp::Gt => ">",
                    CmpOp::Ge => ">=",
                    CmpOp::Neq => unreachable!(),
                };
                self.app(head, &[l, r], out);
            }
            TypedKind::Arith(op, l, r) => {
                let head = match op {
                    ArithOp::Add => "+",
                    ArithOp::Sub => "-",
                    ArithOp::Mul => "*",
                };
                self.app(head, &[l, r], out);
            }
            TypedKind::Neg(x) => self.app("-", &[x], out),
            TypedKind::Not(x) => self.app("not", &[x], out),
            TypedKind::And(xs) => self.app("and", &xs.iter().collect::<Vec<_>>(), out),
            TypedKind::Or(xs) => self.app("or", &xs.iter().collect::<Vec<_>>(), out),
            TypedKind::Implies(a, b) => self.app("=>", &[a, b], out),
            TypedKind::Distinct(xs) => self.app("distinct", &xs.iter().collect::<Vec<_>>(), out),
            TypedKind::Quant(q, vars, body) => {
                out.push_str(match q {
                    Quantifier::ForAll => "(forall (",
                    Quantifier::Exists => "(exists (",
                });
                let mark = self.bound.len();
                for (i, (v, s)) in vars.iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    let smt = self.bind(v);
                    let _ = write!(out, "({} {})", smt, self.symbols.sort(*s));
                }
                out.push_str(") ");
                self.term(body, out);
                out.push(')');
                self.bound.truncate(mark);
            }
        }
    }

    fn app(&mut self, head: &str, args: &[&TypedTerm], out: &mut String) {
        out.push('(');
        out.push_str(head);
        for a in args {
            out.push(' ');
            self.term(a, out);
        }
        out.push(')');
    }
}

/// Renders one term with the program's symbol names.
pub fn term_to_smt(symbols: &SymbolMap, t: &TypedTerm) -> String {
    let mut e = Emitter { symbols, globals: symbols.globals(), bound: Vec::new() };
    let mut out = String::new();
    e.term(t, &mut out);
    out
}

fn preamble(tp: &TypedProgram, symbols: &SymbolMap, opts: EmitOptions, out: &mut String) {
    if opts.produce_models {
        out.push_str("(set-option :produce-models true)\n");
    }
    out.push_str("(set-logic ALL)\n");
    for (i, s) in tp.sorts.iter().enumerate() {
        let name = &symbols.sorts[i];
        match s.kind {
            SortKind::DeclareSort => {
                let _ = writeln!(out, "(declare-sort {} 0)", name);
            }
            SortKind::EnumSort => {
                let ctors: Vec<String> = symbols.values[i].iter().map(|v| format!("({})", v)).collect();
                let _ = writeln!(out, "(declare-datatypes (({} 0)) (({})))", name, ctors.join(" "));
            }
            kind => {
                let alias = quoted(&s.name);
                let target = builtin_alias_target(kind);
                if alias != target && !RESERVED.contains(&s.name.as_str()) {
                    let _ = writeln!(out, "(define-sort {} () {})", alias, target);
                }
            }
        }
    }
    for (i, f) in tp.functions.iter().enumerate() {
        let domain: Vec<String> = f.domain.iter().map(|d| symbols.sort(*d)).collect();
        let _ =
            writeln!(out, "(declare-fun {} ({}) {})", symbols.functions[i], domain.join(" "), symbols.sort(f.range));
    }
    for (i, c) in tp.constants.iter().enumerate() {
        let _ = writeln!(out, "(declare-fun {} () {})", symbols.constants[i], symbols.sort(c.sort));
    }
}

fn assert_line(symbols: &SymbolMap, t: &TypedTerm, out: &mut String) {
    out.push_str("(assert ");
    out.push_str(&term_to_smt(symbols, t));
    out.push_str(")\n");
}

/// Script checking knowledge base, rules and (optionally) a goal.
pub fn emit_smtlib(tp: &TypedProgram, goal: Option<&TypedTerm>, opts: EmitOptions) -> Script {
    let symbols = SymbolMap::new(tp);
    let mut out = String::new();
    preamble(tp, &symbols, opts, &mut out);
    for a in tp.knowledge_base.iter().chain(&tp.rules) {
        assert_line(&symbols, &a.term, &mut out);
    }
    if let Some(g) = goal {
        assert_line(&symbols, g, &mut out);
    }
    out.push_str("(check-sat)\n");
    if opts.produce_models {
        out.push_str("(get-model)\n");
    }
    Script { text: out, symbols }
}

/// `forall x: S. x = c1 or ... or x = cn` for each declared sort with named
/// constants `c1..cn`.
pub fn domain_closure(tp: &TypedProgram) -> Vec<TypedTerm> {
    let mut out = Vec::new();
    for (i, s) in tp.sorts.iter().enumerate() {
        if s.kind != SortKind::DeclareSort {
            continue;
        }
        let sort = Sort::Declared(i);
        let x = TypedTerm::new(TypedKind::Var("x".into()), sort);
        let cases: Vec<TypedTerm> = tp
            .constants
            .iter()
            .enumerate()
            .filter(|(_, c)| c.sort == sort && c.origin == ConstantOrigin::Declared)
            .map(|(id, _)| {
                let c = TypedTerm::new(TypedKind::Const(id), sort);
                TypedTerm::new(TypedKind::Cmp(CmpOp::Eq, Box::new(x.clone()), Box::new(c)), Sort::Bool)
            })
            .collect();
        if !cases.is_empty() {
            out.push(TypedTerm::quant(Quantifier::ForAll, vec![("x".into(), sort)], TypedTerm::or(cases)));
        }
    }
    out
}

/// Script optimizing the objectives subject to the whole base and the
/// optimization constraints. Objective order is the lexicographic priority.
/// Declared sorts are closed over their named constants, so optima range
/// over the same universe the enumerator searches.
pub fn emit_optimize(tp: &TypedProgram, opts: EmitOptions) -> Script {
    let symbols = SymbolMap::new(tp);
    let mut out = String::new();
    preamble(tp, &symbols, opts, &mut out);
    for axiom in domain_closure(tp) {
        assert_line(&symbols, &axiom, &mut out);
    }
    for a in tp.knowledge_base.iter().chain(&tp.rules) {
        assert_line(&symbols, &a.term, &mut out);
    }
    if let Some(opt) = &tp.optimization {
        for c in &opt.constraints {
            assert_line(&symbols, &c.term, &mut out);
        }
        for o in &opt.objectives {
            let head = match o.direction {
                Direction::Minimize => "minimize",
                Direction::Maximize => "maximize",
            };
            let _ = writeln!(out, "({} {})", head, term_to_smt(&symbols, &o.term));
        }
    }
    out.push_str("(check-sat)\n(get-objectives)\n");
    if opts.produce_models {
        out.push_str("(get-model)\n");
    }
    Script { text: out, symbols }
}

/// The script a backend sends for `q`.
pub fn emit_query(q: &Query, opts: EmitOptions) -> Script {
    match q.kind {
        QueryKind::Optimization => emit_optimize(&q.program, opts),
        _ => emit_smtlib(&q.program, q.goal.as_ref().map(|g| &g.term), opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::Builder;
    use crate::model::SortKind;
    use alloc::vec;

    #[test]
    fn contradiction_is_one_assert() {
        let tp = Builder::new()
            .sort("Bool", SortKind::BoolSort)
            .consts("Bool", &["A", "B"])
            .verify("v", &[], "And(A, Not(A))")
            .typed();
        let q = Query::verification(&tp, 0);
        let s = emit_query(&q, EmitOptions { produce_models: false });
        assert_eq!(
            s.text,
            "(set-logic ALL)\n(declare-fun A () Bool)\n(declare-fun B () Bool)\n(assert (and A (not A)))\n(check-sat)\n"
        );
    }

    #[test]
    fn decimals_are_exact_rationals() {
        let tp = Builder::new()
            .sort("Person", SortKind::DeclareSort)
            .sort("Real", SortKind::RealSort)
            .func("jump_height", &["Person"], "Real")
            .consts("Person", &["js"])
            .fact("jump_height(js) == 2.45")
            .fact("jump_height(js) > -1")
            .typed();
        let s = emit_smtlib(&tp, None, EmitOptions::default());
        assert!(s.text.contains("(declare-sort Person 0)\n"));
        assert!(!s.text.contains("define-sort"));
        assert!(s.text.contains("(declare-fun jump_height (Person) Real)"));
        assert!(s.text.contains("(assert (= (jump_height js) (/ 49 20)))"));
        assert!(s.text.contains("(assert (> (jump_height js) (- 1.0)))"), "{}", s.text);
    }

    #[test]
    fn reserved_and_odd_names_are_made_legal() {
        let tp = Builder::new()
            .sort("Thing", SortKind::DeclareSort)
            .func("select", &["Thing"], "BoolSort")
            .consts("Thing", &["and", "and_1"])
            .fact("select(and)")
            .typed();
        let s = emit_smtlib(&tp, None, EmitOptions::default());
        assert_eq!(s.symbols.functions, vec!["select_1".to_string()]);
        assert_eq!(s.symbols.constants, vec!["and_2".to_string(), "and_1".to_string()]);
        assert!(s.text.contains("(assert (select_1 and_2))"));
    }

    #[test]
    fn bound_variables_avoid_globals() {
        let tp = Builder::new()
            .enum_sort("Node", &["n1", "n2"])
            .func("c", &["Node", "Node"], "BoolSort")
            .rule(&[("n1", "Node")], "c(n1, n2)")
            .typed();
        let s = emit_smtlib(&tp, None, EmitOptions::default());
        assert!(s.text.contains("(declare-datatypes ((Node 0)) (((n1) (n2))))"));
        assert!(s.text.contains("(assert (forall ((n1_1 Node)) (c n1_1 n2)))"), "{}", s.text);
    }

    #[test]
    fn optimize_script_lists_objectives_in_order() {
        let tp = Builder::new()
            .sort("Int", SortKind::IntSort)
            .consts("Int", &["x", "y"])
            .optimize(&["x > 0"], &[(Direction::Maximize, "x + y"), (Direction::Minimize, "y")])
            .typed();
        let s = emit_optimize(&tp, EmitOptions { produce_models: false });
        assert!(s
            .text
            .ends_with("(assert (> x 0))\n(maximize (+ x y))\n(minimize y)\n(check-sat)\n(get-objectives)\n"));
    }

    #[test]
    fn emission_is_deterministic() {
        let build = || {
            Builder::new()
                .enum_sort("Color", &["red", "green"])
                .func("f", &["Color"], "IntSort")
                .fact("f(red) != f(green)")
                .typed()
        };
        assert_eq!(
            emit_smtlib(&build(), None, EmitOptions::default()),
            emit_smtlib(&build(), None, EmitOptions::default())
        );
    }
}
