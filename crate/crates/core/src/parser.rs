//! Recursive-descent parser for expression strings.
//!
//! Precedence, lowest to highest: comparison (non-associative), `+ -`
//! (left-associative), `*` (left-associative), unary minus, atoms. Atoms are
//! identifiers, numerals, Bool literals, parenthesized expressions and call
//! forms `Name(arg, ...)`. `And`, `Or`, `Not`, `Implies`, `Distinct`,
//! `ForAll` and `Exists` are reserved call forms; the quantifiers take a
//! bracketed variable list followed by a body.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;

use crate::num::{self, Rational};
use crate::term::{ArithOp, CmpOp, Ident, Quantifier, Span, Term, TermKind};

/// Call forms with fixed meaning. No user identifier may use these names.
pub const RESERVED_FORMS: [&str; 7] = ["And", "Or", "Not", "Implies", "Distinct", "ForAll", "Exists"];

/// Spellings of the Bool literals.
pub const BOOL_LITERALS: [&str; 4] = ["True", "False", "true", "false"];

pub fn is_reserved(name: &str) -> bool {
    RESERVED_FORMS.contains(&name) || BOOL_LITERALS.contains(&name)
}

pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprError {
    pub span: Span,
    pub message: String,
    pub expected: Vec<String>,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at offset {}", self.message, self.span.start)?;
        if !self.expected.is_empty() {
            write!(f, "; expected one of: {}", self.expected.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(Rational),
    Decimal(Rational),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Plus,
    Minus,
    Star,
    Cmp(CmpOp),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{}`", s),
            Tok::Int(v) => format!("number `{}`", v.numer()),
            Tok::Decimal(v) => format!("number `{}`", num::to_decimal_string(v)),
            Tok::LParen => "`(`".to_owned(),
            Tok::RParen => "`)`".to_owned(),
            Tok::LBracket => "`[`".to_owned(),
            Tok::RBracket => "`]`".to_owned(),
            Tok::Comma => "`,`".to_owned(),
            Tok::Plus => "`+`".to_owned(),
            Tok::Minus => "`-`".to_owned(),
            Tok::Star => "`*`".to_owned(),
            Tok::Cmp(op) => format!("`{}`", op.symbol()),
            Tok::Eof => "end of input".to_owned(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Span)>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |start: usize, end: usize, message: String| ExprError {
        span: Span::new(start, end),
        message,
        expected: Vec::new(),
    };
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            out.push((Tok::Ident(word), Span::new(start, i)));
            continue;
        }
        if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let mut decimal = false;
            if i < chars.len() && chars[i] == '.' {
                if i + 1 < chars.len() && chars[i + 1].is_ascii_digit() {
                    decimal = true;
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                } else {
                    return Err(err(start, i + 1, "malformed decimal literal".to_owned()));
                }
            }
            if i < chars.len() && (chars[i].is_ascii_alphabetic() || chars[i] == '_') {
                return Err(err(start, i + 1, "identifier cannot start with a digit".to_owned()));
            }
            let word: String = chars[start..i].iter().collect();
            let value = num::parse_decimal(&word).ok_or_else(|| err(start, i, "malformed number".to_owned()))?;
            let tok = if decimal { Tok::Decimal(value) } else { Tok::Int(value) };
            out.push((tok, Span::new(start, i)));
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match (c, next) {
            ('=', Some('=')) => (Tok::Cmp(CmpOp::Eq), 2),
            ('!', Some('=')) => (Tok::Cmp(CmpOp::Neq), 2),
            ('<', Some('=')) => (Tok::Cmp(CmpOp::Le), 2),
            ('>', Some('=')) => (Tok::Cmp(CmpOp::Ge), 2),
            ('<', _) => (Tok::Cmp(CmpOp::Lt), 1),
            ('>', _) => (Tok::Cmp(CmpOp::Gt), 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            (',', _) => (Tok::Comma, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('=', _) => {
                return Err(ExprError {
                    span: Span::new(start, start + 1),
                    message: "single `=` is not an operator".to_owned(),
                    expected: vec!["`==`".to_owned()],
                })
            }
            ('/', _) => return Err(err(start, start + 1, "division is not supported".to_owned())),
            _ => return Err(err(start, start + 1, format!("unexpected character `{}`", c))),
        };
        i += len;
        out.push((tok, Span::new(start, i)));
    }
    out.push((Tok::Eof, Span::new(chars.len(), chars.len())));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

const EXPR_START: [&str; 5] = ["identifier", "number", "`(`", "`-`", "Bool literal"];

fn expected(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| (*s).to_owned()).collect()
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, message: impl Into<String>, exp: Vec<String>) -> Result<T, ExprError> {
        Err(ExprError { span: self.span(), message: message.into(), expected: exp })
    }

    fn unexpected<T>(&self, exp: &[&str]) -> Result<T, ExprError> {
        self.fail(format!("unexpected {}", self.peek().describe()), expected(exp))
    }

    fn expect(&mut self, tok: Tok) -> Result<Span, ExprError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            let want = tok.describe();
            self.fail(format!("unexpected {}", self.peek().describe()), vec![want])
        }
    }

    fn expr(&mut self) -> Result<Term, ExprError> {
        let lhs = self.additive()?;
        if let Tok::Cmp(op) = *self.peek() {
            self.bump();
            let rhs = self.additive()?;
            if let Tok::Cmp(_) = self.peek() {
                return self.fail("chained comparisons are not allowed; combine them with And(...)", Vec::new());
            }
            let span = lhs.span.join(rhs.span);
            return Ok(Term::new(TermKind::Cmp(op, Box::new(lhs), Box::new(rhs)), span));
        }
        Ok(lhs)
    }

    fn additive(&mut self) -> Result<Term, ExprError> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.multiplicative()?;
            let span = lhs.span.join(rhs.span);
            lhs = Term::new(TermKind::Arith(op, Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn multiplicative(&mut self) -> Result<Term, ExprError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Star {
            self.bump();
            let rhs = self.unary()?;
            let span = lhs.span.join(rhs.span);
            lhs = Term::new(TermKind::Arith(ArithOp::Mul, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Term, ExprError> {
        if *self.peek() == Tok::Minus {
            let (_, start) = self.bump();
            let inner = self.unary()?;
            let span = start.join(inner.span);
            return Ok(Term::new(TermKind::Neg(Box::new(inner)), span));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Term, ExprError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                let (_, span) = self.bump();
                Ok(Term::new(TermKind::Int(v), span))
            }
            Tok::Decimal(v) => {
                let (_, span) = self.bump();
                Ok(Term::new(TermKind::Decimal(v), span))
            }
            Tok::LParen => {
                let (_, open) = self.bump();
                let mut inner = self.expr()?;
                let close = self.expect(Tok::RParen)?;
                inner.span = open.join(close);
                Ok(inner)
            }
            Tok::Ident(name) => {
                let (_, span) = self.bump();
                self.identifier(name, span)
            }
            _ => self.unexpected(&EXPR_START),
        }
    }

    fn identifier(&mut self, name: String, span: Span) -> Result<Term, ExprError> {
        match name.as_str() {
            "True" | "true" => return Ok(Term::new(TermKind::Bool(true), span)),
            "False" | "false" => return Ok(Term::new(TermKind::Bool(false), span)),
            _ => {}
        }
        let is_call = *self.peek() == Tok::LParen;
        if RESERVED_FORMS.contains(&name.as_str()) {
            if !is_call {
                return Err(ExprError {
                    span,
                    message: format!("`{}` is a reserved form and must be called", name),
                    expected: vec!["`(`".to_owned()],
                });
            }
            return self.reserved(name, span);
        }
        if !is_call {
            return Ok(Term::new(TermKind::Symbol(name), span));
        }
        self.bump();
        let (args, close) = self.args()?;
        Ok(Term::new(TermKind::Apply(Ident { name, span }, args), span.join(close)))
    }

    /// Comma-separated arguments up to and including the closing paren.
    fn args(&mut self) -> Result<(Vec<Term>, Span), ExprError> {
        let mut args = Vec::new();
        if *self.peek() == Tok::RParen {
            let (_, close) = self.bump();
            return Ok((args, close));
        }
        loop {
            args.push(self.expr()?);
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RParen => {
                    let (_, close) = self.bump();
                    return Ok((args, close));
                }
                _ => return self.unexpected(&["`,`", "`)`"]),
            }
        }
    }

    fn reserved(&mut self, name: String, span: Span) -> Result<Term, ExprError> {
        self.bump(); // (
        if name == "ForAll" || name == "Exists" {
            let q = if name == "ForAll" { Quantifier::ForAll } else { Quantifier::Exists };
            self.expect(Tok::LBracket)?;
            let mut vars = Vec::new();
            loop {
                match self.peek().clone() {
                    Tok::Ident(v) if !is_reserved(&v) => {
                        let (_, vspan) = self.bump();
                        vars.push(Ident { name: v, span: vspan });
                    }
                    Tok::Ident(v) => {
                        return self.fail(format!("`{}` is reserved and cannot be bound", v), expected(&["identifier"]))
                    }
                    _ => return self.unexpected(&["identifier"]),
                }
                match self.peek() {
                    Tok::Comma => {
                        self.bump();
                    }
                    Tok::RBracket => {
                        self.bump();
                        break;
                    }
                    _ => return self.unexpected(&["`,`", "`]`"]),
                }
            }
            self.expect(Tok::Comma)?;
            let body = self.expr()?;
            let close = self.expect(Tok::RParen)?;
            return Ok(Term::new(TermKind::Quant(q, vars, Box::new(body)), span.join(close)));
        }
        let (mut args, close) = self.args()?;
        let full = span.join(close);
        let arity_error = |want: &str| ExprError {
            span: full,
            message: format!("`{}` takes {}, found {}", name, want, args.len()),
            expected: Vec::new(),
        };
        let kind = match name.as_str() {
            "And" | "Or" | "Distinct" => {
                if args.is_empty() {
                    return Err(arity_error("at least one argument"));
                }
                match name.as_str() {
                    "And" => TermKind::And(args),
                    "Or" => TermKind::Or(args),
                    _ => TermKind::Distinct(args),
                }
            }
            "Not" => {
                if args.len() != 1 {
                    return Err(arity_error("exactly one argument"));
                }
                TermKind::Not(Box::new(args.remove(0)))
            }
            "Implies" => {
                if args.len() != 2 {
                    return Err(arity_error("exactly two arguments"));
                }
                let rhs = args.pop().unwrap();
                let lhs = args.pop().unwrap();
                TermKind::Implies(Box::new(lhs), Box::new(rhs))
            }
            _ => unreachable!("quantifiers handled above"),
        };
        Ok(Term::new(kind, full))
    }
}

/// Parses one expression string into a surface term.
pub fn parse_expression(text: &str) -> Result<Term, ExprError> {
    let toks = lex(text)?;
    let mut parser = Parser { toks, pos: 0 };
    let term = parser.expr()?;
    if *parser.peek() != Tok::Eof {
        let msg = format!("unexpected {} after expression", parser.peek().describe());
        let mut exp = vec!["end of input".to_owned()];
        if term_can_continue(&term) {
            exp.extend(["`+`", "`-`", "`*`", "comparison"].iter().map(|s| s.to_string()));
        }
        return parser.fail(msg, exp);
    }
    Ok(term)
}

fn term_can_continue(term: &Term) -> bool {
    !matches!(term.kind, TermKind::Cmp(..))
}

/// Builds an integer literal term (used by tests and rewriting).
pub fn int_literal(n: i64) -> Term {
    Term::new(TermKind::Int(Rational::from_integer(BigInt::from(n))), Span::default())
}
