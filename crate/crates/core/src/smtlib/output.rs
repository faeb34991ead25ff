//! Solver replies: status, objective values and models.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_traits::Zero;

use super::sexpr::{parse_sexprs, SExpr};
use super::SymbolMap;
use crate::num::{self, Rational};
use crate::semantics::{builtin_universe, element_name, render_value, Interpretation, Universe, Value};
use crate::typed::{Sort, TypedProgram};
use crate::verdict::{Assignment, Status};

/// The parsed reply to one script.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverReply {
    pub status: Status,
    pub objectives: Option<SExpr>,
    pub model: Option<SExpr>,
    /// `(error ...)` messages that precede the status, or follow a `sat`.
    pub errors: Vec<String>,
}

/// Splits solver output into status, objectives and model. Errors after an
/// `unsat`/`unknown` (such as "model is not available") are dropped.
pub fn parse_output(stdout: &str) -> Result<SolverReply, String> {
    let exprs = parse_sexprs(stdout)?;
    let mut status = None;
    let mut objectives = None;
    let mut model = None;
    let mut errors = Vec::new();
    for e in exprs {
        match (&e, e.head()) {
            (SExpr::Atom(a), _) if status.is_none() => {
                status = Some(match a.as_str() {
                    "sat" => Status::Sat,
                    "unsat" => Status::Unsat,
                    "unknown" => Status::Unknown,
                    other => return Err(format!("unexpected solver output `{}`", other)),
                });
            }
            (_, Some("error")) => {
                if status.is_none() || status == Some(Status::Sat) {
                    let msg = e.list().unwrap().get(1).map(|m| match m {
                        SExpr::Str(s) => s.clone(),
                        other => other.to_string(),
                    });
                    errors.push(msg.unwrap_or_default());
                }
            }
            (_, Some("objectives")) => objectives = Some(e),
            (SExpr::List(_), _) if status.is_some() && model.is_none() => model = Some(e),
            _ => {}
        }
    }
    match status {
        Some(status) => Ok(SolverReply { status, objectives, model, errors }),
        None if !errors.is_empty() => Err(errors.join("; ")),
        None => Err(String::from("solver produced no status")),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObjectiveResult {
    Value(Rational),
    /// Infinite or infinitesimal (`oo`, `epsilon`) optimum.
    Unbounded(String),
}

fn literal(e: &SExpr) -> Option<Rational> {
    match e {
        SExpr::Atom(a) => num::parse_decimal(a),
        SExpr::List(xs) => match (xs.first().and_then(|h| h.atom()), xs.len()) {
            (Some("-"), 2) => literal(&xs[1]).map(|v| -v),
            (Some("/"), 3) => {
                let (n, d) = (literal(&xs[1])?, literal(&xs[2])?);
                (!d.is_zero()).then(|| n / d)
            }
            _ => None,
        },
        SExpr::Str(_) => None,
    }
}

/// Values from an `(objectives (e v) ...)` block, in order.
pub fn parse_objectives(block: &SExpr) -> Result<Vec<ObjectiveResult>, String> {
    let items = block.list().ok_or("objectives block is not a list")?;
    items[1..]
        .iter()
        .map(|entry| {
            let pair = entry.list().filter(|p| p.len() == 2).ok_or("malformed objective entry")?;
            Ok(match literal(&pair[1]) {
                Some(v) => ObjectiveResult::Value(v),
                None => ObjectiveResult::Unbounded(pair[1].to_string()),
            })
        })
        .collect()
}

fn unquote(s: &str) -> &str {
    s.strip_prefix('|').and_then(|t| t.strip_suffix('|')).unwrap_or(s)
}

#[derive(Debug, Clone, PartialEq)]
struct Definition {
    params: Vec<String>,
    body: SExpr,
}

/// A model returned by the solver, evaluated on demand. Declared-sort
/// elements are the solver's `Sort!val!k` symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct SmtModel {
    defs: BTreeMap<String, Definition>,
    constants: Vec<(String, Sort)>,
    functions: Vec<(String, Sort)>,
    /// SMT sort name to program sort index.
    sort_index: BTreeMap<String, usize>,
    ctors: BTreeMap<String, u32>,
    universes: Vec<u32>,
    builtin: Vec<(Sort, Universe)>,
}

const MAX_DEPTH: usize = 200;

impl SmtModel {
    pub fn new(tp: &TypedProgram, symbols: &SymbolMap, model: &SExpr) -> Result<SmtModel, String> {
        let mut defs = BTreeMap::new();
        let entries = model.list().ok_or("model is not a list")?;
        // Older solvers wrap the definitions as `(model ...)`.
        let entries = match entries.first().and_then(|e| e.atom()) {
            Some("model") => &entries[1..],
            _ => entries,
        };
        for e in entries {
            if e.head() != Some("define-fun") {
                continue;
            }
            let xs = e.list().unwrap();
            if xs.len() != 5 {
                return Err(format!("malformed definition `{}`", e));
            }
            let name = xs[1].atom().ok_or("definition without a name")?.to_string();
            let params = xs[2]
                .list()
                .ok_or("malformed parameter list")?
                .iter()
                .map(|p| p.list().and_then(|p| p.first()).and_then(|n| n.atom()).map(|n| n.to_string()))
                .collect::<Option<Vec<_>>>()
                .ok_or("malformed parameter")?;
            defs.insert(name, Definition { params, body: xs[4].clone() });
        }
        let sort_index: BTreeMap<String, usize> =
            symbols.sorts.iter().enumerate().map(|(i, s)| (unquote(s).to_string(), i)).collect();
        let mut ctors = BTreeMap::new();
        for vals in &symbols.values {
            for (k, v) in vals.iter().enumerate() {
                ctors.insert(unquote(v).to_string(), k as u32);
            }
        }
        let mut m = SmtModel {
            defs,
            constants: symbols
                .constants
                .iter()
                .zip(&tp.constants)
                .map(|(s, c)| (unquote(s).to_string(), c.sort))
                .collect(),
            functions: symbols
                .functions
                .iter()
                .zip(&tp.functions)
                .map(|(s, f)| (unquote(s).to_string(), f.range))
                .collect(),
            sort_index,
            ctors,
            universes: alloc::vec![1; tp.sorts.len()],
            builtin: [Sort::Bool]
                .into_iter()
                .chain((0..tp.sorts.len()).map(Sort::Enum))
                .map(|s| (s, builtin_universe(tp, s)))
                .collect(),
        };
        let walk = |e: &SExpr, m: &mut SmtModel| {
            fn visit(e: &SExpr, f: &mut dyn FnMut(&str)) {
                match e {
                    SExpr::Atom(a) => f(a),
                    SExpr::List(xs) => xs.iter().for_each(|x| visit(x, f)),
                    SExpr::Str(_) => {}
                }
            }
            let mut found = Vec::new();
            visit(e, &mut |a| found.extend(m.element(a)));
            for (s, k) in found {
                m.universes[s] = m.universes[s].max(k + 1);
            }
        };
        for e in entries {
            walk(e, &mut m);
        }
        Ok(m)
    }

    /// Parses `Sort!val!k`.
    fn element(&self, atom: &str) -> Option<(usize, u32)> {
        let (sort, k) = atom.rsplit_once("!val!")?;
        Some((*self.sort_index.get(sort)?, k.parse().ok()?))
    }

    fn default_value(sort: Sort) -> Value {
        match sort {
            Sort::Bool => Value::Bool(false),
            Sort::Int | Sort::Real => Value::Num(num::int(0)),
            _ => Value::Elem(0),
        }
    }

    fn eval(&self, e: &SExpr, env: &mut Vec<(String, Value)>, depth: usize) -> Result<Value, String> {
        if depth > MAX_DEPTH {
            return Err(String::from("model definitions nest too deeply"));
        }
        let d = depth + 1;
        match e {
            SExpr::Str(s) => Err(format!("unexpected string `{}` in model", s)),
            SExpr::Atom(a) => {
                if let Some((_, v)) = env.iter().rev().find(|(n, _)| n == a) {
                    return Ok(v.clone());
                }
                match a.as_str() {
                    "true" => return Ok(Value::Bool(true)),
                    "false" => return Ok(Value::Bool(false)),
                    _ => {}
                }
                if let Some(v) = num::parse_decimal(a) {
                    return Ok(Value::Num(v));
                }
                if let Some(bits) = a.strip_prefix("#b") {
                    return u32::from_str_radix(bits, 2).map(Value::Elem).map_err(|e| e.to_string());
                }
                if let Some(hex) = a.strip_prefix("#x") {
                    return u32::from_str_radix(hex, 16).map(Value::Elem).map_err(|e| e.to_string());
                }
                if let Some((_, k)) = self.element(a) {
                    return Ok(Value::Elem(k));
                }
                if let Some(k) = self.ctors.get(a.as_str()) {
                    return Ok(Value::Elem(*k));
                }
                match self.defs.get(a.as_str()) {
                    Some(def) if def.params.is_empty() => self.eval(&def.body, &mut Vec::new(), d),
                    _ => Err(format!("unknown symbol `{}` in model", a)),
                }
            }
            SExpr::List(xs) => {
                let head = xs.first().and_then(|h| h.atom()).ok_or("application without a head symbol")?;
                let args = &xs[1..];
                let bools = |m: &Self, env: &mut Vec<(String, Value)>| -> Result<Vec<bool>, String> {
                    args.iter()
                        .map(|a| m.eval(a, env, d)?.as_bool().ok_or_else(|| String::from("Boolean expected")))
                        .collect()
                };
                let nums = |m: &Self, env: &mut Vec<(String, Value)>| -> Result<Vec<Rational>, String> {
                    args.iter()
                        .map(|a| match m.eval(a, env, d)? {
                            Value::Num(v) => Ok(v),
                            other => Err(format!("number expected, found {:?}", other)),
                        })
                        .collect()
                };
                Ok(match head {
                    "ite" if args.len() == 3 => {
                        let c = self.eval(&args[0], env, d)?.as_bool().ok_or("Boolean condition expected")?;
                        self.eval(&args[if c { 1 } else { 2 }], env, d)?
                    }
                    "and" => Value::Bool(bools(self, env)?.into_iter().all(|b| b)),
                    "or" => Value::Bool(bools(self, env)?.into_iter().any(|b| b)),
                    "xor" => Value::Bool(bools(self, env)?.into_iter().fold(false, |a, b| a ^ b)),
                    "not" if args.len() == 1 => Value::Bool(!bools(self, env)?[0]),
                    "=>" => {
                        let bs = bools(self, env)?;
                        Value::Bool(bs.split_last().is_none_or(|(last, init)| !init.iter().all(|b| *b) || *last))
                    }
                    "=" | "distinct" => {
                        let vals = args.iter().map(|a| self.eval(a, env, d)).collect::<Result<Vec<_>, _>>()?;
                        if head == "=" {
                            Value::Bool(vals.windows(2).all(|w| w[0] == w[1]))
                        } else {
                            Value::Bool((0..vals.len()).all(|i| (i + 1..vals.len()).all(|j| vals[i] != vals[j])))
                        }
                    }
                    "+" => Value::Num(nums(self, env)?.into_iter().fold(num::int(0), |a, b| a + b)),
                    "*" => Value::Num(nums(self, env)?.into_iter().fold(num::int(1), |a, b| a * b)),
                    "-" => {
                        let ns = nums(self, env)?;
                        match ns.split_first() {
                            Some((x, [])) => Value::Num(-x.clone()),
                            Some((x, rest)) => Value::Num(rest.iter().fold(x.clone(), |a, b| a - b)),
                            None => return Err(String::from("`-` without arguments")),
                        }
                    }
                    "/" => {
                        let ns = nums(self, env)?;
                        match ns.split_first() {
                            Some((x, rest)) if !rest.iter().any(|r| r.is_zero()) => {
                                Value::Num(rest.iter().fold(x.clone(), |a, b| a / b))
                            }
                            _ => return Err(String::from("division by zero in model")),
                        }
                    }
                    "<" | "<=" | ">" | ">=" => {
                        let ns = nums(self, env)?;
                        Value::Bool(ns.windows(2).all(|w| match head {
                            "<" => w[0] < w[1],
                            "<=" => w[0] <= w[1],
                            ">" => w[0] > w[1],
                            _ => w[0] >= w[1],
                        }))
                    }
                    "to_real" if args.len() == 1 => self.eval(&args[0], env, d)?,
                    "to_int" if args.len() == 1 => Value::Num(nums(self, env)?[0].floor()),
                    "as" if args.len() == 2 => self.eval(&args[0], env, d)?,
                    "_" if args.len() == 2 => {
                        let bits = args[0].atom().and_then(|a| a.strip_prefix("bv")).and_then(|n| n.parse().ok());
                        Value::Elem(bits.ok_or("unsupported indexed literal")?)
                    }
                    "let" if args.len() == 2 => {
                        let bindings = args[0].list().ok_or("malformed let")?;
                        let mut bound = Vec::new();
                        for b in bindings {
                            let pair = b.list().filter(|p| p.len() == 2).ok_or("malformed let binding")?;
                            let name = pair[0].atom().ok_or("malformed let binding")?.to_string();
                            bound.push((name, self.eval(&pair[1], env, d)?));
                        }
                        let mark = env.len();
                        env.extend(bound);
                        let v = self.eval(&args[1], env, d);
                        env.truncate(mark);
                        v?
                    }
                    name => {
                        let def = self.defs.get(name).ok_or_else(|| format!("unknown function `{}` in model", name))?;
                        if def.params.len() != args.len() {
                            return Err(format!("`{}` applied to {} arguments", name, args.len()));
                        }
                        let vals = args.iter().map(|a| self.eval(a, env, d)).collect::<Result<Vec<_>, _>>()?;
                        let mut inner: Vec<(String, Value)> = def.params.iter().cloned().zip(vals).collect();
                        self.eval(&def.body, &mut inner, d)?
                    }
                })
            }
        }
    }

    fn lookup(&self, name: &str, sort: Sort, args: &[Value]) -> Option<Value> {
        match self.defs.get(name) {
            Some(def) => {
                let mut env: Vec<(String, Value)> = def.params.iter().cloned().zip(args.iter().cloned()).collect();
                self.eval(&def.body, &mut env, 0).ok()
            }
            // Symbols the solver left unconstrained.
            None => Some(Self::default_value(sort)),
        }
    }

    /// Constants, then function entries whose domain is finite and small.
    pub fn render(&self, tp: &TypedProgram) -> Assignment {
        const MAX_ENTRIES: usize = 64;
        let name = |s: usize, k: u32| element_name(tp, self, s, k);
        let mut out = Vec::new();
        for (id, c) in tp.constants.iter().enumerate() {
            if let Some(v) = self.constant(id) {
                out.push((c.name.clone(), render_value(tp, c.sort, &v, &name)));
            }
        }
        for (fid, sig) in tp.functions.iter().enumerate() {
            let mut tuples: Vec<Vec<Value>> = alloc::vec![Vec::new()];
            for d in &sig.domain {
                let Some(vals) = self.universe(*d).values(*d).filter(|_| !matches!(d, Sort::Int)) else {
                    tuples.clear();
                    break;
                };
                tuples = tuples
                    .into_iter()
                    .flat_map(|t| {
                        vals.iter().map(move |v| {
                            let mut t = t.clone();
                            t.push(v.clone());
                            t
                        })
                    })
                    .collect();
                if tuples.len() > MAX_ENTRIES {
                    tuples.clear();
                    break;
                }
            }
            for args in tuples {
                if let Some(v) = self.apply(fid, &args) {
                    let rendered: Vec<String> =
                        args.iter().zip(&sig.domain).map(|(a, s)| render_value(tp, *s, a, &name)).collect();
                    let lhs = if rendered.is_empty() {
                        sig.name.clone()
                    } else {
                        format!("{}({})", sig.name, rendered.join(", "))
                    };
                    out.push((lhs, render_value(tp, sig.range, &v, &name)));
                }
            }
        }
        out
    }
}

impl Interpretation for SmtModel {
    fn universe(&self, sort: Sort) -> Universe {
        match sort {
            Sort::Declared(i) => Universe::Finite(self.universes[i]),
            _ => self.builtin.iter().find(|(s, _)| *s == sort).map(|(_, u)| u.clone()).unwrap_or(Universe::Infinite),
        }
    }

    fn constant(&self, id: usize) -> Option<Value> {
        let (name, sort) = &self.constants[id];
        self.lookup(name, *sort, &[])
    }

    fn apply(&self, function: usize, args: &[Value]) -> Option<Value> {
        let (name, sort) = &self.functions[function];
        self.lookup(name, *sort, args)
    }
}
