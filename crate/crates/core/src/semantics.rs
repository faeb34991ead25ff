//! Values, interpretations and (three-valued) term evaluation.
//!
//! Evaluation is Kleene-style: an interpretation may leave some constants or
//! function entries undetermined, in which case a formula still evaluates
//! when its determined parts already fix the result.

use alloc::string::String;
use alloc::vec::Vec;

use crate::normalize::{arith, compare};
use crate::num::{self, Rational};
use crate::term::{CmpOp, Quantifier};
use crate::typed::{ConstantOrigin, Sort, TypedKind, TypedProgram, TypedTerm};

/// A domain element. `Elem` indexes the universe of a declared or
/// enumerated sort, or is the unsigned value of a bit-vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    Num(Rational),
    Elem(u32),
}

impl Value {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

/// What a quantifier over a sort ranges over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Universe {
    /// Elements `Elem(0) .. Elem(n)` (or the two Booleans).
    Finite(u32),
    /// Integers `lo ..= hi`.
    Window(i64, i64),
    /// Not known yet; quantifiers over it evaluate to unknown.
    Pending,
    Infinite,
}

impl Universe {
    pub fn values(&self, sort: Sort) -> Option<Vec<Value>> {
        match (self, sort) {
            (Universe::Finite(_), Sort::Bool) => Some(alloc::vec![Value::Bool(false), Value::Bool(true)]),
            (Universe::Finite(n), _) => Some((0..*n).map(Value::Elem).collect()),
            (Universe::Window(lo, hi), _) => Some((*lo..=*hi).map(|i| Value::Num(num::int(i))).collect()),
            _ => None,
        }
    }
}

/// Builtin universes; declared sorts and Int are up to the interpretation.
pub fn builtin_universe(tp: &TypedProgram, sort: Sort) -> Universe {
    match sort {
        Sort::Bool => Universe::Finite(2),
        Sort::Enum(i) => Universe::Finite(tp.sorts[i].values.len() as u32),
        Sort::BitVec(w) if w <= 16 => Universe::Finite(1 << w),
        _ => Universe::Infinite,
    }
}

pub trait Interpretation {
    fn universe(&self, sort: Sort) -> Universe;
    fn constant(&self, id: usize) -> Option<Value>;
    fn apply(&self, function: usize, args: &[Value]) -> Option<Value>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    /// A quantifier ranges over a sort with no finite enumeration.
    Unbounded(Sort),
    /// Strict evaluation met an undetermined symbol.
    Undetermined(String),
}

type Env = Vec<(String, Value)>;

fn num_of(v: &Value) -> &Rational {
    match v {
        Value::Num(r) => r,
        other => panic!("numeric value expected, found {:?}", other),
    }
}

/// Evaluates `term` under `interp`; `Ok(None)` means undetermined.
pub fn eval(interp: &dyn Interpretation, term: &TypedTerm, env: &mut Env) -> Result<Option<Value>, EvalError> {
    Ok(match &term.kind {
        TypedKind::Bool(b) => Some(Value::Bool(*b)),
        TypedKind::Num(v) => Some(Value::Num(v.clone())),
        TypedKind::Var(name) => env.iter().rev().find(|(n, _)| n == name).map(|(_, v)| v.clone()),
        TypedKind::Const(id) => interp.constant(*id),
        TypedKind::EnumValue { index, .. } => Some(Value::Elem(*index as u32)),
        TypedKind::Apply(fid, args) => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                match eval(interp, a, env)? {
                    Some(v) => vals.push(v),
                    None => return Ok(None),
                }
            }
            interp.apply(*fid, &vals)
        }
        TypedKind::ToReal(t) => eval(interp, t, env)?,
        TypedKind::Cmp(op, l, r) => {
            let (Some(a), Some(b)) = (eval(interp, l, env)?, eval(interp, r, env)?) else {
                return Ok(None);
            };
            Some(Value::Bool(match op {
                CmpOp::Eq => a == b,
                CmpOp::Neq => a != b,
                _ => compare(*op, num_of(&a), num_of(&b)),
            }))
        }
        TypedKind::Arith(op, l, r) => {
            let (Some(a), Some(b)) = (eval(interp, l, env)?, eval(interp, r, env)?) else {
                return Ok(None);
            };
            Some(Value::Num(arith(*op, num_of(&a), num_of(&b))))
        }
        TypedKind::Neg(t) => eval(interp, t, env)?.map(|v| Value::Num(-num_of(&v))),
        TypedKind::Not(t) => eval(interp, t, env)?.map(|v| Value::Bool(!v.as_bool().unwrap())),
        TypedKind::And(args) => junction(interp, args, env, false)?,
        TypedKind::Or(args) => junction(interp, args, env, true)?,
        TypedKind::Implies(a, b) => {
            let x = eval(interp, a, env)?.and_then(|v| v.as_bool());
            if x == Some(false) {
                return Ok(Some(Value::Bool(true)));
            }
            let y = eval(interp, b, env)?.and_then(|v| v.as_bool());
            match (x, y) {
                (_, Some(true)) => Some(Value::Bool(true)),
                (Some(true), Some(false)) => Some(Value::Bool(false)),
                _ => None,
            }
        }
        TypedKind::Distinct(args) => {
            let mut known: Vec<Value> = Vec::new();
            let mut complete = true;
            for a in args {
                match eval(interp, a, env)? {
                    Some(v) => {
                        if known.contains(&v) {
                            return Ok(Some(Value::Bool(false)));
                        }
                        known.push(v);
                    }
                    None => complete = false,
                }
            }
            complete.then_some(Value::Bool(true))
        }
        TypedKind::Quant(q, vars, body) => quantifier(interp, *q, vars, body, env)?,
    })
}

/// Kleene And (`dominant` = false) or Or (`dominant` = true).
fn junction(
    interp: &dyn Interpretation,
    args: &[TypedTerm],
    env: &mut Env,
    dominant: bool,
) -> Result<Option<Value>, EvalError> {
    let mut complete = true;
    for a in args {
        match eval(interp, a, env)?.and_then(|v| v.as_bool()) {
            Some(b) if b == dominant => return Ok(Some(Value::Bool(dominant))),
            Some(_) => {}
            None => complete = false,
        }
    }
    Ok(complete.then_some(Value::Bool(!dominant)))
}

fn quantifier(
    interp: &dyn Interpretation,
    q: Quantifier,
    vars: &[(String, Sort)],
    body: &TypedTerm,
    env: &mut Env,
) -> Result<Option<Value>, EvalError> {
    let dominant = q == Quantifier::Exists;
    let mut ranges = Vec::with_capacity(vars.len());
    let mut pending = false;
    for (_, s) in vars {
        let u = interp.universe(*s);
        match u {
            Universe::Infinite => return Err(EvalError::Unbounded(*s)),
            Universe::Pending => pending = true,
            _ => ranges.push(u.values(*s).unwrap()),
        }
    }
    if pending {
        return Ok(None);
    }
    if ranges.iter().any(|r| r.is_empty()) {
        return Ok(Some(Value::Bool(!dominant)));
    }
    let mark = env.len();
    let mut idx = alloc::vec![0usize; vars.len()];
    let mut complete = true;
    loop {
        env.truncate(mark);
        for (k, (name, _)) in vars.iter().enumerate() {
            env.push((name.clone(), ranges[k][idx[k]].clone()));
        }
        let r = eval(interp, body, env);
        env.truncate(mark);
        match r?.and_then(|v| v.as_bool()) {
            Some(b) if b == dominant => return Ok(Some(Value::Bool(dominant))),
            Some(_) => {}
            None => complete = false,
        }
        // odometer over the bound tuple, last variable fastest
        let mut k = vars.len();
        loop {
            if k == 0 {
                return Ok(complete.then_some(Value::Bool(!dominant)));
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < ranges[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Strict evaluation of a closed term: every symbol must be determined.
pub fn eval_ground_term(interp: &dyn Interpretation, term: &TypedTerm) -> Result<Value, EvalError> {
    let mut env = Vec::new();
    match eval(interp, term, &mut env)? {
        Some(v) => Ok(v),
        None => Err(EvalError::Undetermined(alloc::format!("{:?}", term.kind))),
    }
}

/// Name of element `k` of a declared sort: the first named constant
/// denoting it, then any witness constant, else `Sort!val!k`.
pub fn element_name(tp: &TypedProgram, interp: &dyn Interpretation, sort: usize, k: u32) -> String {
    let denotes =
        |id: usize| tp.constants[id].sort == Sort::Declared(sort) && interp.constant(id) == Some(Value::Elem(k));
    let ids = 0..tp.constants.len();
    ids.clone()
        .find(|id| tp.constants[*id].origin == ConstantOrigin::Declared && denotes(*id))
        .or_else(|| ids.clone().find(|id| denotes(*id)))
        .map(|id| tp.constants[id].name.clone())
        .unwrap_or_else(|| alloc::format!("{}!val!{}", tp.sorts[sort].name, k))
}

/// Renders a value of `sort`; `elem_name` names declared-sort elements.
pub fn render_value(tp: &TypedProgram, sort: Sort, v: &Value, elem_name: &dyn Fn(usize, u32) -> String) -> String {
    match (sort, v) {
        (_, Value::Bool(true)) => "True".into(),
        (_, Value::Bool(false)) => "False".into(),
        (Sort::Real, Value::Num(r)) => num::to_decimal_string(r),
        (_, Value::Num(r)) => num::to_plain_string(r),
        (Sort::Enum(i), Value::Elem(k)) => tp.sorts[i].values[*k as usize].clone(),
        (Sort::Declared(i), Value::Elem(k)) => elem_name(i, *k),
        (Sort::BitVec(w), Value::Elem(k)) => alloc::format!("(_ bv{} {})", k, w),
        (_, Value::Elem(k)) => alloc::format!("#{}", k),
    }
}
