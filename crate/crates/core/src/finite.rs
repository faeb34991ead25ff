//! Exhaustive finite-domain model search, used as an oracle and as a
//! fallback optimizer.
//!
//! Constants of a declared sort are enumerated as set partitions (which of
//! them denote the same element), so a declared sort's universe consists of
//! exactly the elements its constants denote. Every other symbol in use is a
//! cell: a constant, or one entry of a function table. Cells range over
//! their sort's finite universe, the integer window for Int, or a value
//! pinned by a top-level fact such as `Voltage(circuitBreaker) == 480`.
//! The search is depth first and prunes with three-valued evaluation.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigUint;

use crate::diagnostic::{Category, Diagnostic};
use crate::model::Direction;
use crate::num::{self, Rational};
use crate::query::Query;
use crate::semantics::{builtin_universe, element_name, eval, render_value, Interpretation, Universe, Value};
use crate::term::CmpOp;
use crate::typed::{ConstantOrigin, Sort, TypedKind, TypedProgram, TypedTerm};
use crate::verdict::{Assignment, OptStatus, Status};

pub const DEFAULT_WINDOW: (i64, i64) = (-16, 16);
pub const DEFAULT_BUDGET: u64 = 10_000_000;
/// Widest bit-vector sort enumerated.
const MAX_BITVEC_WIDTH: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiniteConfig {
    pub int_window: (i64, i64),
    /// Maximum number of candidate assignments tried.
    pub budget: u64,
}

impl Default for FiniteConfig {
    fn default() -> Self {
        FiniteConfig { int_window: DEFAULT_WINDOW, budget: DEFAULT_BUDGET }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SortDomain {
    /// Named elements under domain closure.
    Universe(Vec<String>),
    Window(i64, i64),
    /// Real: only values pinned by ground facts.
    Pinned,
}

/// Per-sort search domains of a program under domain closure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainMap {
    pub sorts: Vec<(Sort, SortDomain)>,
}

impl DomainMap {
    pub fn get(&self, sort: Sort) -> Option<&SortDomain> {
        self.sorts.iter().find(|(s, _)| *s == sort).map(|(_, d)| d)
    }

    fn size(&self, sort: Sort) -> Option<BigUint> {
        match self.get(sort)? {
            SortDomain::Universe(names) => Some(BigUint::from(names.len())),
            SortDomain::Window(lo, hi) => Some(BigUint::from((hi - lo + 1) as u64)),
            SortDomain::Pinned => None,
        }
    }

    /// Number of distinct tables for a function under these domains.
    pub fn table_space(&self, tp: &TypedProgram, function: usize) -> Option<BigUint> {
        let sig = &tp.functions[function];
        let mut entries = BigUint::from(1u32);
        for d in &sig.domain {
            entries *= self.size(*d)?;
        }
        let range = self.size(sig.range)?;
        let exp: u32 = u32::try_from(&entries).ok()?;
        Some(num_traits::Pow::pow(range, exp))
    }
}

fn sorts_in_use(tp: &TypedProgram, terms: &[&TypedTerm]) -> Vec<Sort> {
    let mut out: Vec<Sort> = Vec::new();
    let add = |s: Sort, out: &mut Vec<Sort>| {
        if !out.contains(&s) {
            out.push(s);
        }
    };
    for t in terms {
        t.walk(&mut |n| {
            add(n.sort, &mut out);
            match &n.kind {
                TypedKind::Apply(f, _) => {
                    for d in &tp.functions[*f].domain {
                        add(*d, &mut out);
                    }
                }
                TypedKind::Quant(_, vars, _) => {
                    for (_, s) in vars {
                        add(*s, &mut out);
                    }
                }
                _ => {}
            }
        });
    }
    out.sort();
    out
}

/// Search domains for every sort the program's formulas use.
pub fn ground_domains(tp: &TypedProgram, int_window: (i64, i64)) -> Result<DomainMap, Diagnostic> {
    let mut terms: Vec<&TypedTerm> = Vec::new();
    terms.extend(tp.knowledge_base.iter().chain(&tp.rules).chain(&tp.verifications).map(|a| &a.term));
    if let Some(opt) = &tp.optimization {
        terms.extend(opt.constraints.iter().map(|a| &a.term));
        terms.extend(opt.objectives.iter().map(|o| &o.term));
    }
    let mut sorts = Vec::new();
    for s in sorts_in_use(tp, &terms) {
        let d = match s {
            Sort::Bool => SortDomain::Universe(vec!["False".into(), "True".into()]),
            Sort::Int => SortDomain::Window(int_window.0, int_window.1),
            Sort::Real => SortDomain::Pinned,
            Sort::Enum(i) => SortDomain::Universe(tp.sorts[i].values.clone()),
            Sort::BitVec(w) => {
                if w > MAX_BITVEC_WIDTH {
                    return Err(not_finite(format!("bit-vector sort of width {} is too wide to enumerate", w)));
                }
                SortDomain::Universe((0..(1u32 << w)).map(|k| format!("(_ bv{} {})", k, w)).collect())
            }
            Sort::Declared(i) => {
                let names: Vec<String> = tp
                    .constants
                    .iter()
                    .filter(|c| c.sort == s && c.origin == ConstantOrigin::Declared)
                    .map(|c| c.name.clone())
                    .collect();
                if names.is_empty() {
                    return Err(empty_sort(tp, i));
                }
                SortDomain::Universe(names)
            }
        };
        sorts.push((s, d));
    }
    Ok(DomainMap { sorts })
}

fn not_finite(message: String) -> Diagnostic {
    Diagnostic::new(Category::NotFiniteDomain, message)
}

fn empty_sort(tp: &TypedProgram, i: usize) -> Diagnostic {
    not_finite(format!("declared sort `{}` has no constants, so it has no finite universe", tp.sorts[i].name))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Candidate assignments tried.
    pub nodes: u64,
    /// Evaluations that decided the query (pruned or satisfied).
    pub leaves: u64,
}

/// A (total) finite structure found by the search.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteModel {
    constants: Vec<Option<Value>>,
    tables: Vec<BTreeMap<Vec<Value>, Value>>,
    universes: Vec<Option<u32>>,
    window: (i64, i64),
    builtin: Vec<(Sort, Universe)>,
}

impl Interpretation for FiniteModel {
    fn universe(&self, sort: Sort) -> Universe {
        match sort {
            Sort::Declared(i) => match self.universes[i] {
                Some(n) => Universe::Finite(n),
                None => Universe::Pending,
            },
            Sort::Int => Universe::Window(self.window.0, self.window.1),
            _ => self.builtin.iter().find(|(s, _)| *s == sort).map(|(_, u)| u.clone()).unwrap_or(Universe::Infinite),
        }
    }

    fn constant(&self, id: usize) -> Option<Value> {
        self.constants.get(id).cloned().flatten()
    }

    fn apply(&self, function: usize, args: &[Value]) -> Option<Value> {
        self.tables[function].get(args).cloned()
    }
}

impl FiniteModel {
    /// Name of a declared-sort element: the first constant denoting it.
    pub fn element_name(&self, tp: &TypedProgram, sort: usize, k: u32) -> String {
        element_name(tp, self, sort, k)
    }

    /// Constants, then function table entries, as `name = value` lines.
    pub fn render(&self, tp: &TypedProgram) -> Assignment {
        let name = |s: usize, k: u32| self.element_name(tp, s, k);
        let mut out = Vec::new();
        for (id, c) in tp.constants.iter().enumerate() {
            if let Some(v) = &self.constants[id] {
                out.push((c.name.clone(), render_value(tp, c.sort, v, &name)));
            }
        }
        for (fid, table) in self.tables.iter().enumerate() {
            let sig = &tp.functions[fid];
            for (args, v) in table {
                let rendered: Vec<String> =
                    args.iter().zip(&sig.domain).map(|(a, s)| render_value(tp, *s, a, &name)).collect();
                let lhs = if rendered.is_empty() {
                    sig.name.clone()
                } else {
                    format!("{}({})", sig.name, rendered.join(", "))
                };
                out.push((lhs, render_value(tp, sig.range, v, &name)));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub status: Status,
    pub model: Option<FiniteModel>,
    pub diagnostics: Vec<Diagnostic>,
    pub stats: SearchStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub status: OptStatus,
    pub values: Vec<Rational>,
    pub model: Option<FiniteModel>,
    pub diagnostics: Vec<Diagnostic>,
    pub stats: SearchStats,
}

#[derive(Debug, Clone, PartialEq)]
enum CellKey {
    Const(usize),
    Entry(usize, Vec<Value>),
}

#[derive(Debug, Clone)]
struct Cell {
    key: CellKey,
    candidates: Vec<Value>,
    /// Candidates are the integer window rather than pinned values.
    windowed: bool,
    /// A Real cell without a pinned value: cannot be enumerated.
    open_real: bool,
}

/// `lhs == value` entailed by a top-level conjunct.
#[derive(Debug, Clone)]
struct Pin<'a> {
    lhs: &'a TypedTerm,
    rhs: &'a TypedTerm,
}

fn is_pin_operand(t: &TypedTerm) -> bool {
    match &t.kind {
        TypedKind::Bool(_) | TypedKind::Num(_) | TypedKind::EnumValue { .. } => true,
        TypedKind::Const(_) => true,
        TypedKind::ToReal(x) => is_pin_operand(x),
        TypedKind::Neg(x) => matches!(x.kind, TypedKind::Num(_)),
        _ => false,
    }
}

fn is_pin_target(t: &TypedTerm) -> bool {
    match &t.kind {
        TypedKind::Apply(_, args) => args.iter().all(is_pin_operand),
        TypedKind::Const(_) => !matches!(t.sort, Sort::Declared(_)),
        _ => false,
    }
}

static TRUE: TypedTerm = TypedTerm { kind: TypedKind::Bool(true), sort: Sort::Bool };
static FALSE: TypedTerm = TypedTerm { kind: TypedKind::Bool(false), sort: Sort::Bool };

fn collect_pins<'a>(t: &'a TypedTerm, out: &mut Vec<Pin<'a>>) {
    match &t.kind {
        TypedKind::And(xs) => xs.iter().for_each(|x| collect_pins(x, out)),
        TypedKind::Not(x) if is_pin_target(x) => out.push(Pin { lhs: x, rhs: &FALSE }),
        TypedKind::Cmp(CmpOp::Eq, l, r) => {
            if is_pin_target(l)
                && is_pin_operand(r)
                && !matches!(r.kind, TypedKind::Const(_) if !matches!(r.sort, Sort::Declared(_) | Sort::Enum(_)))
            {
                out.push(Pin { lhs: l, rhs: r });
            } else if is_pin_target(r)
                && is_pin_operand(l)
                && !matches!(l.kind, TypedKind::Const(_) if !matches!(l.sort, Sort::Declared(_) | Sort::Enum(_)))
            {
                out.push(Pin { lhs: r, rhs: l });
            }
        }
        _ if is_pin_target(t) && t.sort == Sort::Bool => out.push(Pin { lhs: t, rhs: &TRUE }),
        _ => {}
    }
}

fn integer_literals_outside(terms: &[&TypedTerm], window: (i64, i64)) -> bool {
    let lo = num::int(window.0);
    let hi = num::int(window.1);
    let mut outside = false;
    for t in terms {
        t.walk(&mut |n| {
            if let TypedKind::Num(v) = &n.kind {
                let mag = if *v < num::int(0) { -v.clone() } else { v.clone() };
                if v < &lo || v > &hi || (mag > hi.clone() && mag > -lo.clone()) {
                    outside = true;
                }
            }
        });
    }
    outside
}

fn int_quantifier(terms: &[&TypedTerm]) -> bool {
    let mut found = false;
    for t in terms {
        t.walk(&mut |n| {
            if let TypedKind::Quant(_, vars, _) = &n.kind {
                if vars.iter().any(|(_, s)| *s == Sort::Int) {
                    found = true;
                }
            }
        });
    }
    found
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Check,
    Optimize,
}

enum Stop {
    Found,
    Budget,
}

struct Search<'a> {
    tp: &'a TypedProgram,
    formulas: Vec<&'a TypedTerm>,
    objectives: Vec<(Direction, &'a TypedTerm)>,
    pins: Vec<Pin<'a>>,
    cfg: FiniteConfig,
    mode: Mode,
    model: FiniteModel,
    used_consts: Vec<bool>,
    used_funcs: Vec<bool>,
    /// Declared-sort constants, grouped by sort in declaration order.
    partition: Vec<usize>,
    /// Highest element index used so far, per declared sort.
    top: Vec<Option<u32>>,
    cells: Vec<Cell>,
    stats: SearchStats,
    windowed: bool,
    open_real_hit: bool,
    undetermined: bool,
    errors: Vec<Diagnostic>,
    best: Option<(Vec<Rational>, FiniteModel)>,
}

impl<'a> Search<'a> {
    fn new(q: &'a Query, cfg: FiniteConfig, mode: Mode) -> Result<Search<'a>, Diagnostic> {
        let tp = &q.program;
        let formulas: Vec<&TypedTerm> = q.assertions().into_iter().map(|a| &a.term).collect();
        let objectives: Vec<(Direction, &TypedTerm)> = q.objectives().iter().map(|o| (o.direction, &o.term)).collect();
        let mut all: Vec<&TypedTerm> = formulas.clone();
        all.extend(objectives.iter().map(|(_, t)| *t));

        let mut used_consts = vec![false; tp.constants.len()];
        let mut used_funcs = vec![false; tp.functions.len()];
        for t in &all {
            t.walk(&mut |n| match &n.kind {
                TypedKind::Const(id) => used_consts[*id] = true,
                TypedKind::Apply(f, _) => used_funcs[*f] = true,
                _ => {}
            });
        }

        let mut builtin = Vec::new();
        for s in sorts_in_use(tp, &all) {
            match s {
                Sort::Declared(i) => {
                    if !tp.constants.iter().any(|c| c.sort == s && c.origin == ConstantOrigin::Declared) {
                        return Err(empty_sort(tp, i));
                    }
                }
                Sort::BitVec(w) if w > MAX_BITVEC_WIDTH => {
                    return Err(not_finite(format!("bit-vector sort of width {} is too wide to enumerate", w)))
                }
                _ => builtin.push((s, builtin_universe(tp, s))),
            }
        }

        // Domain closure: every constant of a declared sort in use takes part.
        let declared_in_use: Vec<Sort> =
            sorts_in_use(tp, &all).into_iter().filter(|s| matches!(s, Sort::Declared(_))).collect();
        let mut partition = Vec::new();
        for s in &declared_in_use {
            partition.extend(tp.constants.iter().enumerate().filter(|(_, c)| c.sort == *s).map(|(id, _)| id));
        }

        let mut pins = Vec::new();
        for f in &formulas {
            collect_pins(f, &mut pins);
        }

        let mut universes = vec![None; tp.sorts.len()];
        for (i, u) in universes.iter_mut().enumerate() {
            if !declared_in_use.contains(&Sort::Declared(i)) {
                *u = Some(1);
            }
        }

        Ok(Search {
            tp,
            formulas,
            objectives,
            pins,
            cfg,
            mode,
            model: FiniteModel {
                constants: vec![None; tp.constants.len()],
                tables: vec![BTreeMap::new(); tp.functions.len()],
                universes,
                window: cfg.int_window,
                builtin,
            },
            used_consts,
            used_funcs,
            partition,
            top: vec![None; tp.sorts.len()],
            cells: Vec::new(),
            stats: SearchStats::default(),
            windowed: false,
            open_real_hit: false,
            undetermined: false,
            errors: Vec::new(),
            best: None,
        })
    }

    fn evaluate(&mut self) -> Option<bool> {
        let mut env = Vec::new();
        let mut unknown = false;
        for f in &self.formulas {
            match eval(&self.model, f, &mut env) {
                Ok(Some(Value::Bool(false))) => return Some(false),
                Ok(Some(_)) => {}
                Ok(None) => unknown = true,
                Err(e) => {
                    if self.errors.is_empty() {
                        self.errors.push(not_finite(format!("cannot enumerate: {:?}", e)));
                    }
                    return Some(false);
                }
            }
        }
        (!unknown).then_some(true)
    }

    fn objective_values(&self) -> Option<Vec<Rational>> {
        let mut env = Vec::new();
        self.objectives
            .iter()
            .map(|(_, t)| match eval(&self.model, t, &mut env) {
                Ok(Some(Value::Num(v))) => Some(v),
                _ => None,
            })
            .collect()
    }

    fn better(&self, a: &[Rational], b: &[Rational]) -> bool {
        for ((dir, _), (x, y)) in self.objectives.iter().zip(a.iter().zip(b)) {
            let ord = x.cmp(y);
            let ord = if *dir == Direction::Maximize { ord.reverse() } else { ord };
            match ord {
                Ordering::Less => return true,
                Ordering::Greater => return false,
                Ordering::Equal => {}
            }
        }
        false
    }

    fn range_candidates(&self, sort: Sort) -> (Vec<Value>, bool, bool) {
        match sort {
            Sort::Int => {
                let (lo, hi) = self.cfg.int_window;
                ((lo..=hi).map(|i| Value::Num(num::int(i))).collect(), true, false)
            }
            Sort::Real => (Vec::new(), false, true),
            Sort::Declared(i) => ((0..self.model.universes[i].unwrap_or(1)).map(Value::Elem).collect(), false, false),
            _ => (builtin_universe(self.tp, sort).values(sort).unwrap_or_default(), false, false),
        }
    }

    fn domain_values(&self, sort: Sort) -> Result<Vec<Value>, Diagnostic> {
        match sort {
            Sort::Real => Err(not_finite(String::from("functions over Real arguments cannot be tabulated"))),
            _ => Ok(self.range_candidates(sort).0),
        }
    }

    /// Builds cells for everything but the partition, once universes are
    /// fixed. Returns false when a pin empties some cell.
    fn build_cells(&mut self) -> Result<bool, Diagnostic> {
        let mut cells = Vec::new();
        for (id, c) in self.tp.constants.iter().enumerate() {
            if self.used_consts[id] && !matches!(c.sort, Sort::Declared(_)) {
                let (candidates, windowed, open_real) = self.range_candidates(c.sort);
                cells.push(Cell { key: CellKey::Const(id), candidates, windowed, open_real });
            }
        }
        for (fid, sig) in self.tp.functions.iter().enumerate() {
            if !self.used_funcs[fid] {
                continue;
            }
            let mut domains = Vec::new();
            for d in &sig.domain {
                domains.push(self.domain_values(*d)?);
            }
            let (candidates, windowed, open_real) = self.range_candidates(sig.range);
            for args in product(&domains) {
                cells.push(Cell {
                    key: CellKey::Entry(fid, args),
                    candidates: candidates.clone(),
                    windowed,
                    open_real,
                });
            }
        }

        let mut env = Vec::new();
        for pin in &self.pins {
            let key = match &pin.lhs.kind {
                TypedKind::Const(id) => CellKey::Const(*id),
                TypedKind::Apply(f, args) => {
                    let mut vals = Vec::new();
                    for a in args {
                        match eval(&self.model, a, &mut env) {
                            Ok(Some(v)) => vals.push(v),
                            _ => break,
                        }
                    }
                    if vals.len() != args.len() {
                        continue;
                    }
                    CellKey::Entry(*f, vals)
                }
                _ => continue,
            };
            let Ok(Some(v)) = eval(&self.model, pin.rhs, &mut env) else { continue };
            if let Some(cell) = cells.iter_mut().find(|c| c.key == key) {
                if cell.windowed || cell.open_real {
                    cell.candidates = vec![v];
                    cell.windowed = false;
                    cell.open_real = false;
                } else {
                    cell.candidates.retain(|c| *c == v);
                }
            }
        }
        if cells.iter().any(|c| c.candidates.is_empty() && !c.open_real) {
            return Ok(false);
        }
        // Forced cells first; unpinned Real cells last.
        cells.sort_by_key(|c| (c.open_real, c.candidates.len() != 1));
        if cells.iter().any(|c| c.windowed) {
            self.windowed = true;
        }
        self.cells = cells;
        Ok(true)
    }

    fn set(&mut self, key: &CellKey, v: Option<Value>) {
        match key {
            CellKey::Const(id) => self.model.constants[*id] = v,
            CellKey::Entry(f, args) => match v {
                Some(v) => {
                    self.model.tables[*f].insert(args.clone(), v);
                }
                None => {
                    self.model.tables[*f].remove(args);
                }
            },
        }
    }

    fn fill_defaults(&mut self, from: usize) {
        for k in from..self.cells.len() {
            let v = self.cells[k].candidates.first().cloned().unwrap_or(Value::Num(num::int(0)));
            let key = self.cells[k].key.clone();
            self.set(&key, Some(v));
        }
    }

    fn tick(&mut self) -> Result<(), Stop> {
        self.stats.nodes += 1;
        if self.stats.nodes > self.cfg.budget {
            return Err(Stop::Budget);
        }
        Ok(())
    }

    fn decided(&mut self, level: usize) -> Result<bool, Stop> {
        match self.evaluate() {
            Some(false) => {
                self.stats.leaves += 1;
                Ok(true)
            }
            Some(true) if self.mode == Mode::Check => {
                self.stats.leaves += 1;
                self.fill_defaults(level);
                Err(Stop::Found)
            }
            Some(true) => match self.objective_values() {
                Some(vals) => {
                    self.stats.leaves += 1;
                    let improves = match &self.best {
                        None => true,
                        Some((b, _)) => self.better(&vals, b),
                    };
                    if improves {
                        let mut snapshot = self.model.clone();
                        let saved = core::mem::replace(&mut self.model, snapshot.clone());
                        self.fill_defaults(level);
                        snapshot = core::mem::replace(&mut self.model, saved);
                        self.best = Some((vals, snapshot));
                    }
                    Ok(true)
                }
                None => Ok(false),
            },
            None => Ok(false),
        }
    }

    fn search_cells(&mut self, level: usize) -> Result<(), Stop> {
        if self.decided(level)? {
            return Ok(());
        }
        if level == self.cells.len() {
            self.undetermined = true;
            return Ok(());
        }
        if self.cells[level].open_real {
            self.open_real_hit = true;
            return Ok(());
        }
        let key = self.cells[level].key.clone();
        for i in 0..self.cells[level].candidates.len() {
            self.tick()?;
            let v = self.cells[level].candidates[i].clone();
            self.set(&key, Some(v));
            let r = self.search_cells(level + 1);
            if let Err(Stop::Found) = r {
                return r;
            }
            self.set(&key, None);
            r?;
        }
        Ok(())
    }

    fn search_partition(&mut self, level: usize) -> Result<(), Stop> {
        if level == self.partition.len() {
            let saved = core::mem::take(&mut self.cells);
            let result = match self.build_cells() {
                Ok(true) => self.search_cells(0),
                Ok(false) => {
                    self.stats.leaves += 1;
                    Ok(())
                }
                Err(d) => {
                    if self.errors.is_empty() {
                        self.errors.push(d);
                    }
                    Ok(())
                }
            };
            if !matches!(result, Err(Stop::Found)) {
                self.cells = saved;
            }
            return result;
        }
        if level > 0 && self.decided_partial()? {
            return Ok(());
        }
        let id = self.partition[level];
        let Sort::Declared(s) = self.tp.constants[id].sort else { unreachable!() };
        let prev_top = self.top[s];
        // Witnesses denote named elements only.
        let limit = match (prev_top, self.tp.constants[id].origin) {
            (Some(t), ConstantOrigin::Declared) => t + 1,
            (Some(t), _) => t,
            (None, _) => 0,
        };
        let last_of_sort = self
            .partition
            .get(level + 1)
            .map(|next| self.tp.constants[*next].sort != Sort::Declared(s))
            .unwrap_or(true);
        // A fresh element first: distinct named constants are the likelier
        // models, and the merged partitions follow in order.
        let order: Vec<u32> = if self.tp.constants[id].origin == ConstantOrigin::Declared {
            core::iter::once(limit).chain(0..limit).collect()
        } else {
            (0..=limit).collect()
        };
        for k in order {
            self.tick()?;
            self.model.constants[id] = Some(Value::Elem(k));
            self.top[s] = Some(prev_top.map_or(k, |t| t.max(k)));
            if last_of_sort {
                self.model.universes[s] = Some(self.top[s].unwrap() + 1);
            }
            let r = self.search_partition(level + 1);
            if let Err(Stop::Found) = r {
                return r;
            }
            self.model.universes[s] = None;
            self.top[s] = prev_top;
            self.model.constants[id] = None;
            r?;
        }
        Ok(())
    }

    /// Prunes partitions that already falsify the query.
    fn decided_partial(&mut self) -> Result<bool, Stop> {
        if self.evaluate() == Some(false) {
            self.stats.leaves += 1;
            return Ok(true);
        }
        Ok(false)
    }

    fn run(&mut self) -> Result<(), Stop> {
        self.search_partition(0)
    }
}

fn product(domains: &[Vec<Value>]) -> Vec<Vec<Value>> {
    let mut out: Vec<Vec<Value>> = vec![Vec::new()];
    for d in domains {
        let mut next = Vec::with_capacity(out.len() * d.len());
        for prefix in &out {
            for v in d {
                let mut p = prefix.clone();
                p.push(v.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn fill_unused(model: &mut FiniteModel, tp: &TypedProgram) {
    for (id, c) in tp.constants.iter().enumerate() {
        if model.constants[id].is_none() {
            model.constants[id] = Some(match c.sort {
                Sort::Bool => Value::Bool(false),
                Sort::Int | Sort::Real => Value::Num(num::int(0)),
                _ => Value::Elem(0),
            });
        }
    }
}

fn window_caveat(window: (i64, i64)) -> Diagnostic {
    not_finite(format!(
        "the query mentions integers outside the window [{}, {}]; exhaustion inside the window is inconclusive",
        window.0, window.1
    ))
}

/// Decides satisfiability of the query's conjunction by exhaustive search.
pub fn enumerate_check(q: &Query, cfg: FiniteConfig) -> CheckResult {
    let mut search = match Search::new(q, cfg, Mode::Check) {
        Ok(s) => s,
        Err(d) => {
            return CheckResult {
                status: Status::Unknown,
                model: None,
                diagnostics: vec![d],
                stats: SearchStats::default(),
            }
        }
    };
    let outcome = search.run();
    let stats = search.stats;
    let mut diagnostics = core::mem::take(&mut search.errors);
    let bounded_quantifier = int_quantifier(&search.formulas);
    let status = match outcome {
        Err(Stop::Found) if diagnostics.is_empty() && !bounded_quantifier => Status::Sat,
        Err(Stop::Budget) => {
            diagnostics.push(not_finite(format!("search budget of {} assignments exhausted", cfg.budget)));
            Status::Unknown
        }
        Ok(()) if diagnostics.is_empty() && !search.undetermined && !search.open_real_hit && !bounded_quantifier => {
            if search.windowed && integer_literals_outside(&search.formulas, cfg.int_window) {
                diagnostics.push(window_caveat(cfg.int_window));
                Status::Unknown
            } else {
                Status::Unsat
            }
        }
        _ => {
            if search.open_real_hit {
                diagnostics.push(not_finite(String::from(
                    "a Real-valued symbol without a pinned value would have to be enumerated",
                )));
            }
            if search.undetermined {
                diagnostics
                    .push(not_finite(String::from("some function application falls outside the enumerated tables")));
            }
            if bounded_quantifier {
                diagnostics
                    .push(not_finite(String::from("a quantifier over Int can only be checked on the integer window")));
            }
            Status::Unknown
        }
    };
    let model = (status == Status::Sat).then(|| {
        let mut m = search.model.clone();
        fill_unused(&mut m, search.tp);
        m
    });
    CheckResult { status, model, diagnostics, stats }
}

fn optimize_once(q: &Query, cfg: FiniteConfig) -> (OptimizeResult, bool) {
    let mut search = match Search::new(q, cfg, Mode::Optimize) {
        Ok(s) => s,
        Err(d) => {
            return (
                OptimizeResult {
                    status: OptStatus::Unknown,
                    values: vec![],
                    model: None,
                    diagnostics: vec![d],
                    stats: SearchStats::default(),
                },
                false,
            )
        }
    };
    let outcome = search.run();
    let mut diagnostics = core::mem::take(&mut search.errors);
    if search.formulas.iter().any(|f| f.has_quantifier()) && int_quantifier(&search.formulas) {
        diagnostics.push(not_finite(String::from("a quantifier over Int can only be checked on the integer window")));
    }
    let incomplete = search.undetermined || search.open_real_hit;
    if incomplete {
        diagnostics.push(not_finite(String::from("the search space could not be enumerated completely")));
    }
    let status = match outcome {
        Err(_) => {
            diagnostics.push(not_finite(format!("search budget of {} assignments exhausted", cfg.budget)));
            OptStatus::Unknown
        }
        Ok(()) if !diagnostics.is_empty() => OptStatus::Unknown,
        Ok(()) => match &search.best {
            Some(_) => OptStatus::Optimal,
            None if search.windowed && integer_literals_outside(&search.formulas, cfg.int_window) => {
                diagnostics.push(window_caveat(cfg.int_window));
                OptStatus::Unknown
            }
            None => OptStatus::Infeasible,
        },
    };
    let (values, model) = match (status, search.best.take()) {
        (OptStatus::Optimal, Some((vals, mut m))) => {
            fill_unused(&mut m, search.tp);
            (vals, Some(m))
        }
        _ => (Vec::new(), None),
    };
    (OptimizeResult { status, values, model, diagnostics, stats: search.stats }, search.windowed)
}

/// Exact optimum over all feasible assignments, objectives compared
/// lexicographically in declaration order. When integer cells range over
/// the window, the optimum must survive widening the window by one.
pub fn enumerate_optimize(q: &Query, cfg: FiniteConfig) -> OptimizeResult {
    let (mut first, windowed) = optimize_once(q, cfg);
    if first.status == OptStatus::Optimal && windowed {
        let wider = FiniteConfig { int_window: (cfg.int_window.0 - 1, cfg.int_window.1 + 1), ..cfg };
        let (second, _) = optimize_once(q, wider);
        if second.status != OptStatus::Optimal || second.values != first.values {
            first.status = OptStatus::Unknown;
            first.diagnostics.push(not_finite(String::from(
                "the optimum moves when the integer window is widened; it lies on the window boundary",
            )));
            first.values.clear();
            first.model = None;
        }
    }
    first
}

/// Three-valued evaluation helper for callers holding a finite model.
pub fn holds(model: &FiniteModel, term: &TypedTerm) -> Option<bool> {
    let mut env = Vec::new();
    eval(model, term, &mut env).ok().flatten().and_then(|v| v.as_bool())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::Builder;
    use crate::model::SortKind;

    fn check(tp: &TypedProgram) -> CheckResult {
        enumerate_check(&Query::verification(tp, 0), FiniteConfig::default())
    }

    fn pigeonhole() -> TypedProgram {
        Builder::new()
            .enum_sort("Pigeon", &["p1", "p2", "p3", "p4"])
            .enum_sort("Hole", &["h1", "h2", "h3"])
            .func("assigned_to", &["Pigeon"], "Hole")
            .verify("v", &[], "Distinct(assigned_to(p1), assigned_to(p2), assigned_to(p3), assigned_to(p4))")
            .typed()
    }

    #[test]
    fn pigeonhole_is_unsat_within_all_tables() {
        let tp = pigeonhole();
        let domains = ground_domains(&tp, DEFAULT_WINDOW).unwrap();
        assert_eq!(domains.table_space(&tp, 0), Some(BigUint::from(81u32)));
        let r = check(&tp);
        assert_eq!(r.status, Status::Unsat);
        assert!(r.stats.leaves <= 81, "{:?}", r.stats);
    }

    #[test]
    fn k4_is_not_three_colorable() {
        let tp = Builder::new()
            .enum_sort("Node", &["n1", "n2", "n3", "n4"])
            .enum_sort("Color", &["red", "green", "blue"])
            .func("color_of", &["Node"], "Color")
            .func("connected", &["Node", "Node"], "BoolSort")
            .fact("connected(n1, n2)")
            .fact("connected(n1, n3)")
            .fact("connected(n1, n4)")
            .fact("connected(n2, n3)")
            .fact("connected(n2, n4)")
            .fact("connected(n3, n4)")
            .rule(
                &[("a", "Node"), ("b", "Node")],
                "Implies(And(Or(connected(a, b), connected(b, a)), a != b), color_of(a) != color_of(b))",
            )
            .verify("v", &[], "True")
            .typed();
        assert_eq!(check(&tp).status, Status::Unsat);
    }

    #[test]
    fn integer_witness_found_in_window() {
        let tp = Builder::new().sort("Int", SortKind::IntSort).verify("v", &[("x", "Int")], "x + 2 == 5").typed();
        let q = Query::verification(&tp, 0);
        let r = enumerate_check(&q, FiniteConfig::default());
        assert_eq!(r.status, Status::Sat);
        let rendered = r.model.unwrap().render(&q.program);
        assert_eq!(rendered, vec![("x".into(), "3".into())]);
    }

    #[test]
    fn contradictory_bounds_unsat() {
        let tp =
            Builder::new().sort("Int", SortKind::IntSort).verify("v", &[("x", "Int")], "And(x > 0, x < 0)").typed();
        assert_eq!(check(&tp).status, Status::Unsat);
    }

    #[test]
    fn exhaustion_beyond_window_literal_is_unknown() {
        let tp = Builder::new().sort("Int", SortKind::IntSort).verify("v", &[("x", "Int")], "x > 20").typed();
        let r = check(&tp);
        assert_eq!(r.status, Status::Unknown);
        assert_eq!(r.diagnostics[0].category, Category::NotFiniteDomain);
    }

    #[test]
    fn declared_universe_is_closed_over_constants() {
        // Under closure the only animal is the giraffe, so nothing is taller.
        let tp = Builder::new()
            .sort("Animal", SortKind::DeclareSort)
            .func("height", &["Animal"], "IntSort")
            .consts("Animal", &["giraffe"])
            .fact("height(giraffe) == 5")
            .verify("v", &[("a", "Animal")], "height(a) > height(giraffe)")
            .typed();
        assert_eq!(check(&tp).status, Status::Unsat);
    }

    #[test]
    fn constants_may_share_an_element() {
        let tp =
            Builder::new().sort("P", SortKind::DeclareSort).consts("P", &["a", "b"]).verify("v", &[], "a == b").typed();
        let q = Query::verification(&tp, 0);
        let r = enumerate_check(&q, FiniteConfig::default());
        assert_eq!(r.status, Status::Sat);
        assert_eq!(r.model.unwrap().render(&q.program), vec![("a".into(), "a".into()), ("b".into(), "a".into())]);
    }

    #[test]
    fn pinned_real_values_are_compared() {
        let tp = Builder::new()
            .sort("Person", SortKind::DeclareSort)
            .func("jump", &["Person"], "RealSort")
            .consts("Person", &["s"])
            .fact("jump(s) == 2.45")
            .verify("v", &[], "jump(s) >= 5.5")
            .typed();
        assert_eq!(check(&tp).status, Status::Unsat);
    }

    #[test]
    fn unpinned_real_is_not_enumerable() {
        let tp = Builder::new()
            .sort("Person", SortKind::DeclareSort)
            .func("jump", &["Person"], "RealSort")
            .consts("Person", &["s"])
            .verify("v", &[], "jump(s) >= 5.5")
            .typed();
        let r = check(&tp);
        assert_eq!(r.status, Status::Unknown);
        assert!(r.diagnostics.iter().any(|d| d.category == Category::NotFiniteDomain));
    }

    #[test]
    fn declared_sort_without_constants_is_rejected() {
        let tp = Builder::new()
            .sort("Ghost", SortKind::DeclareSort)
            .func("seen", &["Ghost"], "BoolSort")
            .verify("v", &[("g", "Ghost")], "seen(g)")
            .typed();
        let r = check(&tp);
        assert_eq!(r.status, Status::Unknown);
        assert_eq!(r.diagnostics[0].category, Category::NotFiniteDomain);
        assert!(ground_domains(&tp, DEFAULT_WINDOW).is_err());
    }

    #[test]
    fn budget_exhaustion_is_unknown() {
        let r = enumerate_check(
            &Query::verification(&pigeonhole(), 0),
            FiniteConfig { budget: 5, ..FiniteConfig::default() },
        );
        assert_eq!(r.status, Status::Unknown);
        assert!(r.stats.nodes <= 6);
    }

    #[test]
    fn optimum_over_window() {
        let tp = Builder::new()
            .sort("Int", SortKind::IntSort)
            .consts("Int", &["x", "y"])
            .optimize(&["x + y <= 10", "x >= 0", "y >= 0", "x <= 4"], &[(Direction::Maximize, "2 * x + y")])
            .typed();
        let r = enumerate_optimize(&Query::optimization(&tp), FiniteConfig::default());
        assert_eq!(r.status, OptStatus::Optimal);
        assert_eq!(r.values, vec![num::int(14)]);
    }

    #[test]
    fn optimum_on_window_edge_is_unknown() {
        let tp = Builder::new()
            .sort("Int", SortKind::IntSort)
            .consts("Int", &["x"])
            .optimize(&["x >= 0"], &[(Direction::Maximize, "x")])
            .typed();
        let r = enumerate_optimize(&Query::optimization(&tp), FiniteConfig::default());
        assert_eq!(r.status, OptStatus::Unknown);
    }

    #[test]
    fn infeasible_optimization() {
        let tp = Builder::new()
            .sort("Int", SortKind::IntSort)
            .consts("Int", &["x"])
            .optimize(&["x > 5", "x < 3"], &[(Direction::Minimize, "x")])
            .typed();
        let r = enumerate_optimize(&Query::optimization(&tp), FiniteConfig::default());
        assert_eq!(r.status, OptStatus::Infeasible);
    }
}
