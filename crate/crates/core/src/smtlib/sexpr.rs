//! A small s-expression reader for solver output.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    /// A symbol or literal; `|quoted|` symbols are stored without bars.
    Atom(String),
    Str(String),
    List(Vec<SExpr>),
}

impl SExpr {
    pub fn atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(xs) => Some(xs),
            _ => None,
        }
    }

    /// The head symbol of a list.
    pub fn head(&self) -> Option<&str> {
        self.list().and_then(|xs| xs.first()).and_then(|h| h.atom())
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Atom(a) => f.write_str(a),
            SExpr::Str(s) => write!(f, "\"{}\"", s.replace('"', "\"\"")),
            SExpr::List(xs) => {
                f.write_str("(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{}", x)?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Reads every top-level expression; `;` starts a line comment.
pub fn parse_sexprs(text: &str) -> Result<Vec<SExpr>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut stack: Vec<Vec<SExpr>> = vec![Vec::new()];
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ';' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => {
                stack.push(Vec::new());
                i += 1;
            }
            ')' => {
                let done = stack.pop().unwrap();
                match stack.last_mut() {
                    Some(parent) => parent.push(SExpr::List(done)),
                    None => return Err(format!("unbalanced `)` at offset {}", i)),
                }
                i += 1;
            }
            '|' => {
                let start = i + 1;
                let end = chars[start..].iter().position(|c| *c == '|').map(|p| start + p);
                let Some(end) = end else { return Err(String::from("unterminated quoted symbol")) };
                stack.last_mut().unwrap().push(SExpr::Atom(chars[start..end].iter().collect()));
                i = end + 1;
            }
            '"' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err(String::from("unterminated string literal")),
                        Some('"') if chars.get(i + 1) == Some(&'"') => {
                            s.push('"');
                            i += 2;
                        }
                        Some('"') => {
                            i += 1;
                            break;
                        }
                        Some(c) => {
                            s.push(*c);
                            i += 1;
                        }
                    }
                }
                stack.last_mut().unwrap().push(SExpr::Str(s));
            }
            c if c.is_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < chars.len() && !chars[i].is_whitespace() && !"()|\";".contains(chars[i]) {
                    i += 1;
                }
                stack.last_mut().unwrap().push(SExpr::Atom(chars[start..i].iter().collect()));
            }
        }
    }
    if stack.len() != 1 {
        return Err(String::from("unbalanced `(` in solver output"));
    }
    Ok(stack.pop().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists_comments_and_quotes() {
        let xs = parse_sexprs("sat ; done\n(a (|p'| 2) \"x\"\"y\")").unwrap();
        assert_eq!(xs.len(), 2);
        assert_eq!(xs[0], SExpr::Atom("sat".into()));
        assert_eq!(xs[1].head(), Some("a"));
        assert_eq!(xs[1].list().unwrap()[1].list().unwrap()[0], SExpr::Atom("p'".into()));
        assert_eq!(xs[1].list().unwrap()[2], SExpr::Str("x\"y".into()));
    }

    #[test]
    fn unbalanced_input_is_rejected() {
        assert!(parse_sexprs("(a").is_err());
        assert!(parse_sexprs("a)").is_err());
    }
}
