// SPDX-License-Identifier: Apache-2.0

//! Symbolic boolean expressions.
//!
//! Used for gate output definitions (`!A*B ^ A*C`) and for latch
//! characteristic equations (`D*E + !E*Q`). Accepted syntax:
//!
//! | operator | forms              | precedence |
//! |----------|--------------------|------------|
//! | NOT      | `!x`, `~x`, `NOT x`, postfix `x'` | highest |
//! | AND      | `*`, `&`, `AND`    |            |
//! | XOR      | `^`, `XOR`         |            |
//! | OR       | `+`, `\|`, `OR`    | lowest     |
//!
//! Binary operators are left associative. Constants are `0` and `1`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(bool),
    Var(String),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Xor(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

/// Operation counts of an expression tree, without any sharing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub xor: u32,
    pub and: u32,
    pub or: u32,
    pub not: u32,
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Self {
        Expr::Var(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Self {
        Expr::Not(Box::new(e))
    }

    pub fn and(a: Expr, b: Expr) -> Self {
        Expr::And(Box::new(a), Box::new(b))
    }

    pub fn xor(a: Expr, b: Expr) -> Self {
        Expr::Xor(Box::new(a), Box::new(b))
    }

    pub fn or(a: Expr, b: Expr) -> Self {
        Expr::Or(Box::new(a), Box::new(b))
    }

    /// Symbols referenced by the expression, in first-occurrence order.
    pub fn symbols(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                if !out.contains(&v.as_str()) {
                    out.push(v);
                }
            }
            Expr::Not(e) => e.collect_symbols(out),
            Expr::And(a, b) | Expr::Xor(a, b) | Expr::Or(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
        }
    }

    pub fn op_counts(&self) -> OpCounts {
        let mut c = OpCounts::default();
        self.count_into(&mut c);
        c
    }

    fn count_into(&self, c: &mut OpCounts) {
        match self {
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Not(e) => {
                c.not += 1;
                e.count_into(c);
            }
            Expr::And(a, b) => {
                c.and += 1;
                a.count_into(c);
                b.count_into(c);
            }
            Expr::Xor(a, b) => {
                c.xor += 1;
                a.count_into(c);
                b.count_into(c);
            }
            Expr::Or(a, b) => {
                c.or += 1;
                a.count_into(c);
                b.count_into(c);
            }
        }
    }

    /// Resolves variable names to positions in `symbols`.
    pub fn bind<S: AsRef<str>>(&self, symbols: &[S]) -> Result<BoundExpr, ExprError> {
        Ok(match self {
            Expr::Const(b) => BoundExpr::Const(*b),
            Expr::Var(v) => {
                let idx =
                    symbols.iter().position(|s| s.as_ref() == v).ok_or_else(|| ExprError::UnknownSymbol(v.clone()))?;
                BoundExpr::Var(idx)
            }
            Expr::Not(e) => BoundExpr::Not(Box::new(e.bind(symbols)?)),
            Expr::And(a, b) => BoundExpr::And(Box::new(a.bind(symbols)?), Box::new(b.bind(symbols)?)),
            Expr::Xor(a, b) => BoundExpr::Xor(Box::new(a.bind(symbols)?), Box::new(b.bind(symbols)?)),
            Expr::Or(a, b) => BoundExpr::Or(Box::new(a.bind(symbols)?), Box::new(b.bind(symbols)?)),
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Or(..) => 1,
            Expr::Xor(..) => 2,
            Expr::And(..) => 3,
            Expr::Not(_) | Expr::Var(_) | Expr::Const(_) => 4,
        }
    }
}

/// An expression whose variables are indices into an assignment slice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundExpr {
    Const(bool),
    Var(usize),
    Not(Box<BoundExpr>),
    And(Box<BoundExpr>, Box<BoundExpr>),
    Xor(Box<BoundExpr>, Box<BoundExpr>),
    Or(Box<BoundExpr>, Box<BoundExpr>),
}

impl BoundExpr {
    pub fn eval(&self, vars: &[bool]) -> bool {
        match self {
            BoundExpr::Const(b) => *b,
            BoundExpr::Var(i) => vars[*i],
            BoundExpr::Not(e) => !e.eval(vars),
            BoundExpr::And(a, b) => a.eval(vars) & b.eval(vars),
            BoundExpr::Xor(a, b) => a.eval(vars) ^ b.eval(vars),
            BoundExpr::Or(a, b) => a.eval(vars) | b.eval(vars),
        }
    }

    /// Bit-parallel evaluation: each word holds one variable's value across
    /// up to 64 assignments. `full` masks the live lanes.
    pub fn eval_words(&self, vars: &[u64], full: u64) -> u64 {
        match self {
            BoundExpr::Const(true) => full,
            BoundExpr::Const(false) => 0,
            BoundExpr::Var(i) => vars[*i],
            BoundExpr::Not(e) => !e.eval_words(vars, full) & full,
            BoundExpr::And(a, b) => a.eval_words(vars, full) & b.eval_words(vars, full),
            BoundExpr::Xor(a, b) => a.eval_words(vars, full) ^ b.eval_words(vars, full),
            BoundExpr::Or(a, b) => a.eval_words(vars, full) | b.eval_words(vars, full),
        }
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            BoundExpr::Const(_) => None,
            BoundExpr::Var(i) => Some(*i),
            BoundExpr::Not(e) => e.max_var(),
            BoundExpr::And(a, b) | BoundExpr::Xor(a, b) | BoundExpr::Or(a, b) => a.max_var().max(b.max_var()),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
            if parens {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        let p = self.precedence();
        match self {
            Expr::Const(b) => write!(f, "{}", u8::from(*b)),
            Expr::Var(v) => f.write_str(v),
            Expr::Not(e) => {
                f.write_str("!")?;
                child(f, e, e.precedence() < 4)
            }
            Expr::And(a, b) | Expr::Xor(a, b) | Expr::Or(a, b) => {
                let op = match self {
                    Expr::And(..) => "*",
                    Expr::Xor(..) => " ^ ",
                    _ => " + ",
                };
                child(f, a, a.precedence() < p)?;
                f.write_str(op)?;
                child(f, b, b.precedence() <= p)
            }
        }
    }
}

impl FromStr for Expr {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let tokens = tokenize(s)?;
        let mut p = Parser { tokens, pos: 0, len: s.len() };
        let e = p.or()?;
        match p.peek() {
            None => Ok(e),
            Some((off, t)) => Err(ExprError::Syntax { offset: *off, message: format!("unexpected {t:?}") }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Const(bool),
    Not,
    Prime,
    And,
    Xor,
    Or,
    LParen,
    RParen,
}

fn tokenize(s: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let mut out = Vec::new();
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '!' | '~' => Tok::Not,
            '\'' => Tok::Prime,
            '*' | '&' => Tok::And,
            '^' => Tok::Xor,
            '+' | '|' => Tok::Or,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '0' => Tok::Const(false),
            '1' => Tok::Const(true),
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &s[start..i];
                let tok = match word {
                    "NOT" => Tok::Not,
                    "AND" => Tok::And,
                    "XOR" => Tok::Xor,
                    "OR" => Tok::Or,
                    _ => Tok::Ident(word.to_string()),
                };
                out.push((start, tok));
                continue;
            }
            other => {
                return Err(ExprError::Syntax { offset: start, message: format!("unexpected character `{other}`") })
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(usize, Tok)> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek().map(|(_, x)| x) == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.len, |(o, _)| *o)
    }

    fn or(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.xor()?;
        while self.eat(&Tok::Or) {
            lhs = Expr::or(lhs, self.xor()?);
        }
        Ok(lhs)
    }

    fn xor(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Xor) {
            lhs = Expr::xor(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::And) {
            lhs = Expr::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat(&Tok::Not) {
            return Ok(Expr::not(self.unary()?));
        }
        let mut e = self.atom()?;
        while self.eat(&Tok::Prime) {
            e = Expr::not(e);
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let offset = self.offset();
        let Some((_, tok)) = self.tokens.get(self.pos).cloned() else {
            return Err(ExprError::Syntax { offset, message: "unexpected end of expression".into() });
        };
        self.pos += 1;
        match tok {
            Tok::Ident(name) => Ok(Expr::Var(name)),
            Tok::Const(b) => Ok(Expr::Const(b)),
            Tok::LParen => {
                let e = self.or()?;
                if !self.eat(&Tok::RParen) {
                    return Err(ExprError::Syntax { offset: self.offset(), message: "expected `)`".into() });
                }
                Ok(e)
            }
            other => Err(ExprError::Syntax { offset, message: format!("unexpected {other:?}") }),
        }
    }
}
