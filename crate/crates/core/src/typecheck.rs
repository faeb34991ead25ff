//! Symbol table construction, sort resolution and type checking.
//!
//! A bare identifier resolves to the innermost quantifier-bound variable,
//! then to a constant (group members and enum values), then to a nullary
//! function. Top-level `variables` only supply sorts for names that a
//! quantifier binds; a declared variable used unbound is an error.
//! Integer terms widen to Real where a Real is required; nothing narrows.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::diagnostic::{child_path, sort_diagnostics, Category, Diagnostic, SourceSpan};
use crate::model::{parse_bitvec_ref, Action, BinderKind, Body, Program, SortKind, SourceExpr, VariableDecl};
use crate::parser::{is_identifier, is_reserved};
use crate::term::{Quantifier, Term, TermKind};
use crate::typed::{
    Assertion, ConstantOrigin, ConstantSym, FunctionSig, Sort, SortInfo, TypedKind, TypedObjective, TypedOptimization,
    TypedProgram, TypedTerm,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstRef {
    Const(usize),
    EnumValue { sort: usize, index: usize },
}

/// Identifier-to-definition mappings plus a stack of quantifier scopes.
#[derive(Debug, Clone, Default)]
pub struct SymbolTable {
    sorts: BTreeMap<String, Sort>,
    sort_infos: Vec<SortInfo>,
    functions: BTreeMap<String, usize>,
    signatures: Vec<FunctionSig>,
    constants: BTreeMap<String, ConstRef>,
    constant_syms: Vec<ConstantSym>,
    /// Sorts of top-level declared variables.
    variables: BTreeMap<String, (Sort, String)>,
    /// Entry-local variable declarations (KB `variables` field).
    local_templates: Vec<BTreeMap<String, (Sort, String)>>,
    scopes: Vec<Vec<(String, Sort)>>,
    /// When set, unresolved bare identifiers become decision variables.
    decisions_enabled: bool,
}

fn builtin_sort(name: &str) -> Option<Sort> {
    match name {
        "BoolSort" | "Bool" => Some(Sort::Bool),
        "IntSort" | "Int" => Some(Sort::Int),
        "RealSort" | "Real" => Some(Sort::Real),
        _ => parse_bitvec_ref(name).filter(|w| *w >= 1).map(Sort::BitVec),
    }
}

const BUILTIN_KEYWORDS: [&str; 3] = ["BoolSort", "IntSort", "RealSort"];

impl SymbolTable {
    pub fn resolve_sort(&self, name: &str) -> Option<Sort> {
        self.sorts.get(name).copied().or_else(|| builtin_sort(name))
    }

    pub fn sort_infos(&self) -> &[SortInfo] {
        &self.sort_infos
    }

    pub fn function(&self, name: &str) -> Option<&FunctionSig> {
        self.functions.get(name).map(|&i| &self.signatures[i])
    }

    pub fn constant(&self, name: &str) -> Option<ConstRef> {
        self.constants.get(name).copied()
    }

    pub fn constant_sort(&self, name: &str) -> Option<Sort> {
        self.constant(name).map(|c| self.const_ref_sort(c))
    }

    fn const_ref_sort(&self, c: ConstRef) -> Sort {
        match c {
            ConstRef::Const(i) => self.constant_syms[i].sort,
            ConstRef::EnumValue { sort, .. } => Sort::Enum(sort),
        }
    }

    pub fn scope_depth(&self) -> usize {
        self.scopes.len()
    }

    pub fn push_scope(&mut self, vars: Vec<(String, Sort)>) {
        self.scopes.push(vars);
    }

    pub fn pop_scope(&mut self) {
        self.scopes.pop();
    }

    pub fn lookup_variable(&self, name: &str) -> Option<Sort> {
        self.scopes.iter().rev().find_map(|frame| frame.iter().rev().find(|(n, _)| n == name).map(|(_, s)| *s))
    }

    fn template_sort(&self, name: &str) -> Option<(Sort, String)> {
        self.local_templates
            .iter()
            .rev()
            .find_map(|m| m.get(name).cloned())
            .or_else(|| self.variables.get(name).cloned())
    }

    pub fn sort_name(&self, sort: Sort) -> String {
        match sort {
            Sort::Bool => "Bool".into(),
            Sort::Int => "Int".into(),
            Sort::Real => "Real".into(),
            Sort::BitVec(w) => format!("BitVec({})", w),
            Sort::Declared(i) | Sort::Enum(i) => self.sort_infos[i].name.clone(),
        }
    }

    fn known_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = Vec::new();
        names.extend(self.constants.keys().map(|s| s.as_str()));
        names.extend(self.functions.keys().map(|s| s.as_str()));
        for frame in &self.scopes {
            names.extend(frame.iter().map(|(n, _)| n.as_str()));
        }
        names
    }

    fn suggest(&self, name: &str) -> Option<String> {
        let limit = core::cmp::max(2, name.chars().count() / 3);
        self.known_names()
            .into_iter()
            .map(|cand| (edit_distance(name, cand), cand))
            .filter(|(d, _)| *d <= limit)
            .min()
            .map(|(_, c)| c.to_string())
    }
}

fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for i in 1..=a.len() {
        let mut cur = vec![i; b.len() + 1];
        for j in 1..=b.len() {
            let cost = if a[i - 1].eq_ignore_ascii_case(&b[j - 1]) { 0 } else { 1 };
            cur[j] = (prev[j] + 1).min(cur[j - 1] + 1).min(prev[j - 1] + cost);
        }
        prev = cur;
    }
    prev[b.len()]
}

/// Hint text attached to `UndefinedSymbol` when a close match exists.
pub fn did_you_mean(candidate: &str) -> String {
    format!("did you mean `{}`?", candidate)
}

/// Registers sorts, enum values, functions, constants and top-level
/// variables.
pub fn build_symbol_table(program: &Program) -> Result<SymbolTable, Vec<Diagnostic>> {
    let (table, diags) = build_table(program);
    if diags.is_empty() {
        Ok(table)
    } else {
        Err(diags)
    }
}

fn build_table(program: &Program) -> (SymbolTable, Vec<Diagnostic>) {
    let mut t = SymbolTable::default();
    let mut diags = Vec::new();
    let node = |path: &str| SourceSpan::node(path.to_string());

    for (i, s) in program.sorts.iter().enumerate() {
        let name_path = child_path(&s.path, "name");
        if t.sorts.contains_key(&s.name) {
            diags.push(Diagnostic::at(
                Category::DuplicateName,
                format!("sort `{}` is declared more than once", s.name),
                node(&name_path),
            ));
        } else if BUILTIN_KEYWORDS.contains(&s.name.as_str()) || parse_bitvec_ref(&s.name).is_some() {
            diags.push(Diagnostic::at(
                Category::DuplicateName,
                format!("sort name `{}` clashes with a builtin sort keyword", s.name),
                node(&name_path),
            ));
        }
        let resolved = match s.kind {
            SortKind::DeclareSort => Sort::Declared(i),
            SortKind::EnumSort => Sort::Enum(i),
            SortKind::BoolSort => Sort::Bool,
            SortKind::IntSort => Sort::Int,
            SortKind::RealSort => Sort::Real,
            SortKind::BitVecSort(w) => {
                if w == 0 {
                    diags.push(Diagnostic::at(
                        Category::SchemaViolation,
                        format!("bit-vector sort `{}` needs a positive width", s.name),
                        node(&s.path),
                    ));
                }
                Sort::BitVec(w.max(1))
            }
        };
        if s.kind == SortKind::EnumSort {
            if s.values.is_empty() {
                diags.push(Diagnostic::at(
                    Category::SchemaViolation,
                    format!("enumerated sort `{}` needs at least one value", s.name),
                    node(&child_path(&s.path, "values")),
                ));
            }
        } else if !s.values.is_empty() {
            diags.push(Diagnostic::at(
                Category::SchemaViolation,
                format!("only EnumSort takes `values`, but `{}` is {}", s.name, s.kind.keyword()),
                node(&child_path(&s.path, "values")),
            ));
        }
        t.sorts.entry(s.name.clone()).or_insert(resolved);
        t.sort_infos.push(SortInfo { name: s.name.clone(), kind: s.kind, values: s.values.clone() });
    }

    let check_name = |diags: &mut Vec<Diagnostic>, name: &str, path: &str| -> bool {
        if !is_identifier(name) {
            diags.push(Diagnostic::at(
                Category::SchemaViolation,
                format!("`{}` is not a valid identifier", name),
                node(path),
            ));
            return false;
        }
        if is_reserved(name) {
            diags.push(Diagnostic::at(Category::DuplicateName, format!("`{}` is a reserved name", name), node(path)));
            return false;
        }
        true
    };

    for (i, s) in program.sorts.iter().enumerate() {
        if s.kind != SortKind::EnumSort {
            continue;
        }
        for (k, v) in s.values.iter().enumerate() {
            let path = child_path(&child_path(&s.path, "values"), k);
            if !check_name(&mut diags, v, &path) {
                continue;
            }
            if t.constants.contains_key(v) {
                diags.push(Diagnostic::at(
                    Category::DuplicateName,
                    format!("`{}` is declared more than once", v),
                    node(&path),
                ));
                continue;
            }
            t.constants.insert(v.clone(), ConstRef::EnumValue { sort: i, index: k });
        }
    }

    for f in &program.functions {
        let name_path = child_path(&f.path, "name");
        let mut domain = Vec::new();
        let mut ok = true;
        for (k, d) in f.domain.iter().enumerate() {
            match t.resolve_sort(d) {
                Some(s) => domain.push(s),
                None => {
                    ok = false;
                    diags.push(Diagnostic::at(
                        Category::UnknownSort,
                        format!("unknown sort `{}` in domain of `{}`", d, f.name),
                        node(&child_path(&child_path(&f.path, "domain"), k)),
                    ));
                }
            }
        }
        let range = t.resolve_sort(&f.range);
        if range.is_none() {
            ok = false;
            diags.push(Diagnostic::at(
                Category::UnknownSort,
                format!("unknown sort `{}` as range of `{}`", f.range, f.name),
                node(&child_path(&f.path, "range")),
            ));
        }
        if !check_name(&mut diags, &f.name, &name_path) {
            continue;
        }
        if t.functions.contains_key(&f.name) || t.constants.contains_key(&f.name) {
            diags.push(Diagnostic::at(
                Category::DuplicateName,
                format!("`{}` is declared more than once", f.name),
                node(&name_path),
            ));
            continue;
        }
        if ok {
            t.functions.insert(f.name.clone(), t.signatures.len());
            t.signatures.push(FunctionSig {
                name: f.name.clone(),
                domain,
                range: range.unwrap(),
                domain_refs: f.domain.clone(),
                range_ref: f.range.clone(),
            });
        }
    }

    for g in &program.constants {
        let sort = t.resolve_sort(&g.sort);
        if sort.is_none() {
            diags.push(Diagnostic::at(
                Category::UnknownSort,
                format!("unknown sort `{}` for constant group `{}`", g.sort, g.group),
                node(&child_path(&g.path, "sort")),
            ));
        }
        for (k, m) in g.members.iter().enumerate() {
            let path = child_path(&child_path(&g.path, "members"), k);
            if !check_name(&mut diags, m, &path) {
                continue;
            }
            if t.constants.contains_key(m) || t.functions.contains_key(m) {
                diags.push(Diagnostic::at(
                    Category::DuplicateName,
                    format!("`{}` is declared more than once", m),
                    node(&path),
                ));
                continue;
            }
            if let Some(sort) = sort {
                t.constants.insert(m.clone(), ConstRef::Const(t.constant_syms.len()));
                t.constant_syms.push(ConstantSym {
                    name: m.clone(),
                    sort,
                    sort_ref: g.sort.clone(),
                    origin: ConstantOrigin::Declared,
                });
            }
        }
    }

    for v in &program.variables {
        let name_path = child_path(&v.path, "name");
        if !check_name(&mut diags, &v.name, &name_path) {
            continue;
        }
        if t.constants.contains_key(&v.name) || t.functions.contains_key(&v.name) {
            diags.push(Diagnostic::at(
                Category::DuplicateName,
                format!("variable `{}` shadows a constant or function", v.name),
                node(&name_path),
            ));
            continue;
        }
        if t.variables.contains_key(&v.name) {
            diags.push(Diagnostic::at(
                Category::DuplicateName,
                format!("variable `{}` is declared more than once", v.name),
                node(&name_path),
            ));
            continue;
        }
        match t.resolve_sort(&v.sort) {
            Some(s) => {
                t.variables.insert(v.name.clone(), (s, v.sort.clone()));
            }
            None => diags.push(Diagnostic::at(
                Category::UnknownSort,
                format!("unknown sort `{}` for variable `{}`", v.sort, v.name),
                node(&child_path(&v.path, "sort")),
            )),
        }
    }
    (t, diags)
}

struct Checker<'t> {
    table: &'t mut SymbolTable,
    path: String,
    diags: Vec<Diagnostic>,
}

fn coerce(t: TypedTerm, to: Sort) -> Option<TypedTerm> {
    if t.sort == to {
        return Some(t);
    }
    if t.sort == Sort::Int && to == Sort::Real {
        return Some(match t.kind {
            TypedKind::Num(v) => TypedTerm::new(TypedKind::Num(v), Sort::Real),
            TypedKind::Neg(x) if matches!(x.kind, TypedKind::Num(_)) => {
                TypedTerm::new(TypedKind::Neg(Box::new(coerce(*x, to)?)), Sort::Real)
            }
            _ => TypedTerm::new(TypedKind::ToReal(Box::new(t)), Sort::Real),
        });
    }
    None
}

impl Checker<'_> {
    fn error(&mut self, category: Category, message: String, term: &Term) {
        self.diags.push(Diagnostic::at(
            category,
            message,
            SourceSpan::new(self.path.clone(), term.span.start, term.span.end),
        ));
    }

    fn expect_sort(&mut self, t: TypedTerm, want: Sort, src: &Term) -> Option<TypedTerm> {
        let found = t.sort;
        match coerce(t, want) {
            Some(t) => Some(t),
            None => {
                let msg = format!(
                    "expected {}, found {} in `{}`",
                    self.table.sort_name(want),
                    self.table.sort_name(found),
                    src
                );
                self.error(Category::SortMismatch, msg, src);
                None
            }
        }
    }

    fn check(&mut self, term: &Term, expected: Option<Sort>) -> Option<TypedTerm> {
        let t = self.infer(term)?;
        match expected {
            Some(want) => self.expect_sort(t, want, term),
            None => Some(t),
        }
    }

    fn bools(&mut self, args: &[Term]) -> Option<Vec<TypedTerm>> {
        let checked: Vec<Option<TypedTerm>> = args.iter().map(|a| self.check(a, Some(Sort::Bool))).collect();
        checked.into_iter().collect()
    }

    fn numeric(&mut self, t: TypedTerm, src: &Term) -> Option<TypedTerm> {
        if t.sort.is_numeric() {
            Some(t)
        } else {
            let msg = format!("expected a numeric term, found {} in `{}`", self.table.sort_name(t.sort), src);
            self.error(Category::SortMismatch, msg, src);
            None
        }
    }

    /// Brings operands to one sort, widening Int to Real when mixed.
    fn unify(&mut self, items: Vec<TypedTerm>, srcs: &[&Term], whole: &Term) -> Option<Vec<TypedTerm>> {
        if items.iter().all(|t| t.sort.is_numeric()) {
            let target = if items.iter().any(|t| t.sort == Sort::Real) { Sort::Real } else { Sort::Int };
            return Some(items.into_iter().map(|t| coerce(t, target).unwrap()).collect());
        }
        let first = items[0].sort;
        for (t, src) in items.iter().zip(srcs) {
            if t.sort != first {
                let msg = format!(
                    "operands of `{}` have different sorts: {} and {}",
                    whole,
                    self.table.sort_name(first),
                    self.table.sort_name(t.sort)
                );
                self.error(Category::SortMismatch, msg, src);
                return None;
            }
        }
        Some(items)
    }

    fn symbol(&mut self, name: &str, term: &Term) -> Option<TypedTerm> {
        if let Some(sort) = self.table.lookup_variable(name) {
            return Some(TypedTerm::new(TypedKind::Var(name.to_string()), sort));
        }
        if let Some(c) = self.table.constant(name) {
            let sort = self.table.const_ref_sort(c);
            let kind = match c {
                ConstRef::Const(i) => TypedKind::Const(i),
                ConstRef::EnumValue { sort, index } => TypedKind::EnumValue { sort, index },
            };
            return Some(TypedTerm::new(kind, sort));
        }
        if let Some(&fid) = self.table.functions.get(name) {
            let sig = &self.table.signatures[fid];
            if sig.domain.is_empty() {
                return Some(TypedTerm::new(TypedKind::Apply(fid, Vec::new()), sig.range));
            }
            let msg = format!("function `{}` expects {} argument(s) but is used bare", name, sig.domain.len());
            self.error(Category::ArityMismatch, msg, term);
            return None;
        }
        if self.table.decisions_enabled {
            let (sort, sort_ref) = self.table.template_sort(name).unwrap_or((Sort::Int, "IntSort".to_string()));
            let id = self.table.constant_syms.len();
            self.table.constants.insert(name.to_string(), ConstRef::Const(id));
            self.table.constant_syms.push(ConstantSym {
                name: name.to_string(),
                sort,
                sort_ref,
                origin: ConstantOrigin::Decision,
            });
            return Some(TypedTerm::new(TypedKind::Const(id), sort));
        }
        if self.table.template_sort(name).is_some() {
            let msg = format!("variable `{}` is used outside any quantifier that binds it", name);
            self.error(Category::UnboundVariable, msg, term);
            self.diags.last_mut().unwrap().hint = Some(format!("bind it, e.g. ForAll([{}], ...)", name));
            return None;
        }
        let msg = format!("undefined symbol `{}`", name);
        self.error(Category::UndefinedSymbol, msg, term);
        if let Some(s) = self.table.suggest(name) {
            self.diags.last_mut().unwrap().hint = Some(did_you_mean(&s));
        }
        None
    }

    fn apply(&mut self, name: &str, args: &[Term], term: &Term) -> Option<TypedTerm> {
        let Some(&fid) = self.table.functions.get(name) else {
            // Still check the arguments so their errors are reported too.
            for a in args {
                self.infer(a);
            }
            if self.table.constant(name).is_some() || self.table.lookup_variable(name).is_some() {
                let msg = format!("`{}` is not a function and cannot be applied", name);
                self.error(Category::ArityMismatch, msg, term);
            } else {
                let msg = format!("undefined function `{}`", name);
                self.error(Category::UndefinedSymbol, msg, term);
                if let Some(s) = self.table.suggest(name) {
                    self.diags.last_mut().unwrap().hint = Some(did_you_mean(&s));
                }
            }
            return None;
        };
        let domain = self.table.signatures[fid].domain.clone();
        let range = self.table.signatures[fid].range;
        if domain.len() != args.len() {
            for a in args {
                self.infer(a);
            }
            let msg = format!("`{}` expects {} argument(s), found {}", name, domain.len(), args.len());
            self.error(Category::ArityMismatch, msg, term);
            return None;
        }
        let mut typed = Vec::new();
        let mut ok = true;
        for (a, want) in args.iter().zip(domain) {
            match self.infer(a) {
                Some(t) => {
                    let found = t.sort;
                    match coerce(t, want) {
                        Some(t) => typed.push(t),
                        None => {
                            ok = false;
                            let msg = format!(
                                "argument `{}` of `{}` has sort {}, expected {}",
                                a,
                                name,
                                self.table.sort_name(found),
                                self.table.sort_name(want)
                            );
                            self.error(Category::SortMismatch, msg, a);
                        }
                    }
                }
                None => ok = false,
            }
        }
        ok.then(|| TypedTerm::new(TypedKind::Apply(fid, typed), range))
    }

    fn infer(&mut self, term: &Term) -> Option<TypedTerm> {
        match &term.kind {
            TermKind::Bool(b) => Some(TypedTerm::bool(*b)),
            TermKind::Int(v) => Some(TypedTerm::new(TypedKind::Num(v.clone()), Sort::Int)),
            TermKind::Decimal(v) => Some(TypedTerm::new(TypedKind::Num(v.clone()), Sort::Real)),
            TermKind::Symbol(name) => self.symbol(name, term),
            TermKind::Apply(name, args) => self.apply(&name.name, args, term),
            TermKind::Cmp(op, l, r) => {
                let lt = self.infer(l);
                let rt = self.infer(r);
                let (lt, rt) = (lt?, rt?);
                if op.is_order() {
                    let lt = self.numeric(lt, l);
                    let rt = self.numeric(rt, r);
                    let (lt, rt) = (lt?, rt?);
                    let mut v = self.unify(vec![lt, rt], &[l, r], term)?;
                    let rt = v.pop().unwrap();
                    let lt = v.pop().unwrap();
                    return Some(TypedTerm::new(TypedKind::Cmp(*op, Box::new(lt), Box::new(rt)), Sort::Bool));
                }
                let mut v = self.unify(vec![lt, rt], &[l, r], term)?;
                let rt = v.pop().unwrap();
                let lt = v.pop().unwrap();
                Some(TypedTerm::new(TypedKind::Cmp(*op, Box::new(lt), Box::new(rt)), Sort::Bool))
            }
            TermKind::Arith(op, l, r) => {
                let lt = self.infer(l).and_then(|t| self.numeric(t, l));
                let rt = self.infer(r).and_then(|t| self.numeric(t, r));
                let (lt, rt) = (lt?, rt?);
                let mut v = self.unify(vec![lt, rt], &[l, r], term)?;
                let rt = v.pop().unwrap();
                let lt = v.pop().unwrap();
                let sort = lt.sort;
                Some(TypedTerm::new(TypedKind::Arith(*op, Box::new(lt), Box::new(rt)), sort))
            }
            TermKind::Neg(inner) => {
                let t = self.infer(inner).and_then(|t| self.numeric(t, inner))?;
                let sort = t.sort;
                Some(TypedTerm::new(TypedKind::Neg(Box::new(t)), sort))
            }
            TermKind::And(args) => {
                let mut ts = self.bools(args)?;
                Some(if ts.len() == 1 { ts.pop().unwrap() } else { TypedTerm::and(ts) })
            }
            TermKind::Or(args) => {
                let mut ts = self.bools(args)?;
                Some(if ts.len() == 1 { ts.pop().unwrap() } else { TypedTerm::or(ts) })
            }
            TermKind::Not(inner) => Some(TypedTerm::not(self.check(inner, Some(Sort::Bool))?)),
            TermKind::Implies(l, r) => {
                let lt = self.check(l, Some(Sort::Bool));
                let rt = self.check(r, Some(Sort::Bool));
                Some(TypedTerm::implies(lt?, rt?))
            }
            TermKind::Distinct(args) => {
                let checked: Vec<Option<TypedTerm>> = args.iter().map(|a| self.infer(a)).collect();
                let ts: Vec<TypedTerm> = checked.into_iter().collect::<Option<_>>()?;
                if ts.len() == 1 {
                    return Some(TypedTerm::bool(true));
                }
                let srcs: Vec<&Term> = args.iter().collect();
                let ts = self.unify(ts, &srcs, term)?;
                Some(TypedTerm::new(TypedKind::Distinct(ts), Sort::Bool))
            }
            TermKind::Quant(q, vars, body) => {
                let mut bound: Vec<(String, Sort)> = Vec::new();
                let mut ok = true;
                for v in vars {
                    if bound.iter().any(|(n, _)| *n == v.name) {
                        ok = false;
                        self.diags.push(Diagnostic::at(
                            Category::DuplicateName,
                            format!("`{}` is bound twice by the same quantifier", v.name),
                            SourceSpan::new(self.path.clone(), v.span.start, v.span.end),
                        ));
                        continue;
                    }
                    match self.table.template_sort(&v.name) {
                        Some((s, _)) => bound.push((v.name.clone(), s)),
                        None => {
                            ok = false;
                            self.diags.push(
                                Diagnostic::at(
                                    Category::UnboundVariable,
                                    format!("no sort is declared for bound variable `{}`", v.name),
                                    SourceSpan::new(self.path.clone(), v.span.start, v.span.end),
                                )
                                .with_hint(format!(
                                    "declare it in `variables`, e.g. {{\"name\": \"{}\", \"sort\": ...}}",
                                    v.name
                                )),
                            );
                        }
                    }
                }
                self.table.push_scope(bound.clone());
                let body = self.check(body, Some(Sort::Bool));
                self.table.pop_scope();
                let body = body?;
                ok.then(|| TypedTerm::quant(*q, bound, body))
            }
        }
    }
}

/// Types one surface term. Scopes pushed while checking quantifiers are
/// always popped again, on success and on error.
pub fn check_term(
    term: &Term,
    table: &mut SymbolTable,
    expected: Option<Sort>,
    path: &str,
) -> Result<TypedTerm, Vec<Diagnostic>> {
    let depth = table.scope_depth();
    let mut checker = Checker { table, path: path.to_string(), diags: Vec::new() };
    let result = checker.check(term, expected);
    let diags = checker.diags;
    debug_assert_eq!(table.scope_depth(), depth);
    match result {
        Some(t) if diags.is_empty() => Ok(t),
        _ => Err(diags),
    }
}

struct ProgramChecker {
    table: SymbolTable,
    diags: Vec<Diagnostic>,
}

impl ProgramChecker {
    fn expr(&mut self, e: &SourceExpr, expected: Option<Sort>) -> Option<TypedTerm> {
        match &e.parsed {
            Ok(term) => match check_term(term, &mut self.table, expected, &e.path) {
                Ok(t) => Some(t),
                Err(ds) => {
                    self.diags.extend(ds);
                    None
                }
            },
            Err(_) => {
                self.diags.extend(e.syntax_diagnostic());
                None
            }
        }
    }

    fn binder_vars(&mut self, vars: &[VariableDecl]) -> Option<Vec<(String, Sort)>> {
        let mut out: Vec<(String, Sort)> = Vec::new();
        let mut ok = true;
        for v in vars {
            if out.iter().any(|(n, _)| *n == v.name) {
                ok = false;
                self.diags.push(Diagnostic::at(
                    Category::DuplicateName,
                    format!("`{}` is bound twice by the same binder", v.name),
                    SourceSpan::node(child_path(&v.path, "name")),
                ));
                continue;
            }
            if !is_identifier(&v.name) || is_reserved(&v.name) {
                ok = false;
                self.diags.push(Diagnostic::at(
                    Category::SchemaViolation,
                    format!("`{}` cannot be used as a variable name", v.name),
                    SourceSpan::node(child_path(&v.path, "name")),
                ));
                continue;
            }
            match self.table.resolve_sort(&v.sort) {
                Some(s) => out.push((v.name.clone(), s)),
                None => {
                    ok = false;
                    self.diags.push(Diagnostic::at(
                        Category::UnknownSort,
                        format!("unknown sort `{}` for variable `{}`", v.sort, v.name),
                        SourceSpan::node(child_path(&v.path, "sort")),
                    ));
                }
            }
        }
        ok.then_some(out)
    }

    /// Types a rule or verification body under its binder.
    fn body(&mut self, vars: &[(String, Sort)], body: &Body) -> Option<TypedTerm> {
        self.table.push_scope(vars.to_vec());
        let result = match body {
            Body::Implies { antecedent, consequent } => {
                let a = self.expr(antecedent, Some(Sort::Bool));
                let c = self.expr(consequent, Some(Sort::Bool));
                match (a, c) {
                    (Some(a), Some(c)) => Some(TypedTerm::implies(a, c)),
                    _ => None,
                }
            }
            Body::Constraint(c) => self.expr(c, Some(Sort::Bool)),
        };
        self.table.pop_scope();
        result
    }
}

/// Types a whole canonicalized program, collecting every diagnostic.
pub fn check_program(program: &Program) -> Result<TypedProgram, Vec<Diagnostic>> {
    let (table, diags) = build_table(program);
    let mut pc = ProgramChecker { table, diags };

    let mut knowledge_base = Vec::new();
    for kb in &program.knowledge_base {
        let mut locals = BTreeMap::new();
        if let Some(vars) = &kb.variables {
            for v in vars {
                match pc.table.resolve_sort(&v.sort) {
                    Some(s) => {
                        locals.insert(v.name.clone(), (s, v.sort.clone()));
                    }
                    None => pc.diags.push(Diagnostic::at(
                        Category::UnknownSort,
                        format!("unknown sort `{}` for variable `{}`", v.sort, v.name),
                        SourceSpan::node(child_path(&v.path, "sort")),
                    )),
                }
            }
        }
        pc.table.local_templates.push(locals);
        let typed = match &kb.assertion.parsed {
            Ok(term) => match check_term(term, &mut pc.table, None, &kb.assertion.path) {
                Ok(t) if t.sort == Sort::Bool => Some(t),
                Ok(t) => {
                    let what = if kb.value.is_some() {
                        "a `value` was given for"
                    } else {
                        "knowledge base entries must be Bool, found"
                    };
                    pc.diags.push(Diagnostic::at(
                        Category::SortMismatch,
                        format!("{} assertion `{}` of sort {}", what, kb.assertion.text, pc.table.sort_name(t.sort)),
                        SourceSpan::new(kb.assertion.path.clone(), term.span.start, term.span.end),
                    ));
                    None
                }
                Err(ds) => {
                    pc.diags.extend(ds);
                    None
                }
            },
            Err(_) => {
                pc.diags.extend(kb.assertion.syntax_diagnostic());
                None
            }
        };
        pc.table.local_templates.pop();
        if let Some(t) = typed {
            let term = if kb.value == Some(false) { TypedTerm::not(t) } else { t };
            knowledge_base.push(Assertion { name: kb.assertion.text.clone(), path: kb.path.clone(), term });
        }
    }

    let mut rules = Vec::new();
    for r in &program.rules {
        let vars = match &r.binder {
            Some(b) if b.kind == BinderKind::Exists => {
                pc.diags.push(Diagnostic::at(
                    Category::SchemaViolation,
                    format!("rule `{}` may only use a `forall` binder", r.name),
                    SourceSpan::node(b.path.clone()),
                ));
                None
            }
            Some(b) => pc.binder_vars(&b.vars),
            None => Some(Vec::new()),
        };
        let body = pc.body(vars.as_deref().unwrap_or(&[]), &r.body);
        if let (Some(vars), Some(body)) = (vars, body) {
            rules.push(Assertion {
                name: r.name.clone(),
                path: r.path.clone(),
                term: TypedTerm::quant(Quantifier::ForAll, vars, body),
            });
        }
    }

    let mut verifications = Vec::new();
    for v in &program.verifications {
        let (quant, vars) = match &v.binder {
            Some(b) => {
                if b.kind == BinderKind::Exists && matches!(v.body, Body::Implies { .. }) {
                    pc.diags.push(Diagnostic::at(
                        Category::SchemaViolation,
                        format!("verification `{}`: an `exists` binder pairs with `constraint`, not `implies`", v.name),
                        SourceSpan::node(b.path.clone()),
                    ));
                }
                let q = match b.kind {
                    BinderKind::ForAll => Quantifier::ForAll,
                    BinderKind::Exists => Quantifier::Exists,
                };
                (q, pc.binder_vars(&b.vars))
            }
            None => (Quantifier::ForAll, Some(Vec::new())),
        };
        let body = pc.body(vars.as_deref().unwrap_or(&[]), &v.body);
        if let (Some(vars), Some(body)) = (vars, body) {
            verifications.push(Assertion {
                name: v.name.clone(),
                path: v.path.clone(),
                term: TypedTerm::quant(quant, vars, body),
            });
        }
    }

    let mut optimization = None;
    if let Some(opt) = &program.optimization {
        pc.table.decisions_enabled = true;
        let mut constraints = Vec::new();
        for c in &opt.constraints {
            if let Some(t) = pc.expr(c, Some(Sort::Bool)) {
                constraints.push(Assertion { name: c.text.clone(), path: c.path.clone(), term: t });
            }
        }
        let mut objectives = Vec::new();
        for o in &opt.objectives {
            if let Some(t) = pc.expr(&o.expression, None) {
                if t.sort.is_numeric() {
                    objectives.push(TypedObjective { direction: o.direction, path: o.path.clone(), term: t });
                } else {
                    let span = o.expression.parsed.as_ref().map(|t| t.span).unwrap_or_default();
                    pc.diags.push(Diagnostic::at(
                        Category::SortMismatch,
                        format!(
                            "objective `{}` must be Int or Real, found {}",
                            o.expression.text,
                            pc.table.sort_name(t.sort)
                        ),
                        SourceSpan::new(o.expression.path.clone(), span.start, span.end),
                    ));
                }
            }
        }
        pc.table.decisions_enabled = false;
        optimization = Some(TypedOptimization { constraints, objectives });
    }

    let mut actions = Vec::new();
    for a in &program.actions {
        match Action::from_name(&a.name) {
            Some(Action::Optimize) => {
                let objectives = program.optimization.as_ref().map(|o| o.objectives.len()).unwrap_or(0);
                if program.optimization.is_none() {
                    pc.diags.push(Diagnostic::at(
                        Category::SchemaViolation,
                        "the `optimize` action needs an `optimization` section",
                        SourceSpan::node(a.path.clone()),
                    ));
                } else if objectives == 0 {
                    pc.diags.push(Diagnostic::at(
                        Category::SchemaViolation,
                        "the `optimize` action needs at least one objective",
                        SourceSpan::node("/optimization/objectives"),
                    ));
                }
                actions.push(Action::Optimize);
            }
            Some(a) => actions.push(a),
            None => pc.diags.push(Diagnostic::at(
                Category::UnknownAction,
                format!("unknown action `{}`", a.name),
                SourceSpan::node(a.path.clone()),
            )),
        }
    }

    let mut diags = pc.diags;
    if !diags.is_empty() {
        sort_diagnostics(&mut diags);
        return Err(diags);
    }
    Ok(TypedProgram {
        sorts: pc.table.sort_infos,
        functions: pc.table.signatures,
        constants: pc.table.constant_syms,
        knowledge_base,
        rules,
        verifications,
        optimization,
        actions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ConstantGroup, FunctionDecl, SortDecl};
    use crate::parser::parse_expression;
    use crate::term::CmpOp;

    fn sort(name: &str, kind: SortKind, i: usize) -> SortDecl {
        SortDecl { name: name.into(), kind, values: vec![], path: format!("/sorts/{}", i) }
    }

    fn func(name: &str, domain: &[&str], range: &str, i: usize) -> FunctionDecl {
        FunctionDecl {
            name: name.into(),
            domain: domain.iter().map(|s| s.to_string()).collect(),
            range: range.into(),
            path: format!("/functions/{}", i),
        }
    }

    fn group(name: &str, sort: &str, members: &[&str]) -> ConstantGroup {
        ConstantGroup {
            group: name.into(),
            sort: sort.into(),
            members: members.iter().map(|s| s.to_string()).collect(),
            path: format!("/constants/{}", name),
        }
    }

    fn workforce() -> Program {
        Program {
            sorts: vec![
                sort("Person", SortKind::DeclareSort, 0),
                sort("Equipment", SortKind::DeclareSort, 1),
                sort("Task", SortKind::DeclareSort, 2),
            ],
            functions: vec![func("skill_level", &["Person", "Task"], "IntSort", 0)],
            constants: vec![
                group("persons", "Person", &["alice"]),
                group("equipment", "Equipment", &["drill"]),
                group("tasks", "Task", &["welding"]),
            ],
            ..Program::default()
        }
    }

    #[test]
    fn applying_person_function_to_equipment_is_sort_mismatch() {
        let p = workforce();
        let mut table = build_symbol_table(&p).unwrap();
        let term = parse_expression("skill_level(drill, welding) > 3").unwrap();
        let errs = check_term(&term, &mut table, Some(Sort::Bool), "/x").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].category, Category::SortMismatch);
        assert_eq!(errs[0].span.as_ref().unwrap().start, 12);
        assert_eq!(table.scope_depth(), 0);
    }

    #[test]
    fn unbound_and_undefined_are_distinguished() {
        let mut p = workforce();
        p.variables.push(VariableDecl { name: "q".into(), sort: "Person".into(), path: "/variables/0".into() });
        let mut table = build_symbol_table(&p).unwrap();
        let term = parse_expression("skill_level(q, welding) > 0").unwrap();
        let errs = check_term(&term, &mut table, Some(Sort::Bool), "/x").unwrap_err();
        assert_eq!(errs[0].category, Category::UnboundVariable);

        let term = parse_expression("skill_level(alise, welding) > 0").unwrap();
        let errs = check_term(&term, &mut table, Some(Sort::Bool), "/x").unwrap_err();
        assert_eq!(errs[0].category, Category::UndefinedSymbol);
        assert_eq!(errs[0].hint.as_deref(), Some("did you mean `alice`?"));
    }

    #[test]
    fn scope_balanced_on_error_inside_quantifier() {
        let mut p = workforce();
        p.variables.push(VariableDecl { name: "p".into(), sort: "Person".into(), path: "/variables/0".into() });
        let mut table = build_symbol_table(&p).unwrap();
        let term = parse_expression("ForAll([p], skill_level(p, nope) > 1)").unwrap();
        assert!(check_term(&term, &mut table, Some(Sort::Bool), "/x").is_err());
        assert_eq!(table.scope_depth(), 0);
    }

    #[test]
    fn decimal_comparison_with_real_function() {
        let p = Program {
            sorts: vec![sort("Person", SortKind::DeclareSort, 0), sort("Real", SortKind::RealSort, 1)],
            functions: vec![func("jump_height", &["Person"], "Real", 0)],
            constants: vec![group("persons", "Person", &["javier_sotomayor"])],
            ..Program::default()
        };
        let mut table = build_symbol_table(&p).unwrap();
        let term = parse_expression("jump_height(javier_sotomayor) == 2.45").unwrap();
        let t = check_term(&term, &mut table, Some(Sort::Bool), "/x").unwrap();
        assert_eq!(t.sort, Sort::Bool);
        match t.kind {
            TypedKind::Cmp(CmpOp::Eq, l, r) => {
                assert_eq!(l.sort, Sort::Real);
                assert_eq!(r.sort, Sort::Real);
            }
            other => panic!("{:?}", other),
        }
        // integer literal widens against a Real operand
        let term = parse_expression("jump_height(javier_sotomayor) > 2").unwrap();
        let t = check_term(&term, &mut table, Some(Sort::Bool), "/x").unwrap();
        if let TypedKind::Cmp(_, _, r) = t.kind {
            assert_eq!(r.sort, Sort::Real);
            assert!(matches!(r.kind, TypedKind::Num(_)));
        }
    }

    #[test]
    fn duplicate_sorts_rejected() {
        let p = Program {
            sorts: vec![sort("Person", SortKind::DeclareSort, 0), sort("Person", SortKind::DeclareSort, 1)],
            ..Program::default()
        };
        let errs = build_symbol_table(&p).unwrap_err();
        assert_eq!(errs[0].category, Category::DuplicateName);
        assert_eq!(errs[0].path(), "/sorts/1/name");
    }

    #[test]
    fn user_sort_may_alias_builtin() {
        let p = Program {
            sorts: vec![sort("Task", SortKind::DeclareSort, 0), sort("TimeSlot", SortKind::IntSort, 1)],
            functions: vec![func("scheduled_at", &["Task"], "TimeSlot", 0)],
            ..Program::default()
        };
        let table = build_symbol_table(&p).unwrap();
        assert_eq!(table.resolve_sort("TimeSlot"), Some(Sort::Int));
        assert_eq!(table.function("scheduled_at").unwrap().range, Sort::Int);
    }

    #[test]
    fn arity_mismatch_reported() {
        let p = workforce();
        let mut table = build_symbol_table(&p).unwrap();
        let term = parse_expression("skill_level(alice) > 1").unwrap();
        let errs = check_term(&term, &mut table, Some(Sort::Bool), "/x").unwrap_err();
        assert_eq!(errs[0].category, Category::ArityMismatch);
    }

    #[test]
    fn unary_connectives_collapse() {
        let p = Program {
            sorts: vec![sort("Bool", SortKind::BoolSort, 0)],
            constants: vec![group("v", "Bool", &["A"])],
            ..Program::default()
        };
        let mut table = build_symbol_table(&p).unwrap();
        let term = parse_expression("And(A)").unwrap();
        let t = check_term(&term, &mut table, Some(Sort::Bool), "/x").unwrap();
        assert_eq!(t.kind, TypedKind::Const(0));
    }
}
