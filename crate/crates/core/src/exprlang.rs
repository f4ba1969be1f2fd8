//! Component expressions for metrics and potentials.
//!
//! Grammar (EBNF):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-r^2`
//! is `-(r^2)` and `2^-1` is `2^(-1)`. Known functions: `sqrt sin cos exp
//! ln abs`. Angles are radians.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::jets::{Jet, JetError};

/// Byte range `[begin, end)` into the parsed source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub begin: usize,
    pub end: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.begin, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{message} at {span} (expected {})", expected.join(" | "))]
pub struct ParseError {
    pub span: SourceSpan,
    pub expected: Vec<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error(transparent)]
    Jet(#[from] JetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Neg,
    Sqrt,
    Sin,
    Cos,
    Exp,
    Ln,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Neg => "-",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Abs => "abs",
        }
    }

    fn apply_f64(self, a: f64) -> f64 {
        match self {
            Func::Neg => -a,
            Func::Sqrt => a.sqrt(),
            Func::Sin => a.sin(),
            Func::Cos => a.cos(),
            Func::Exp => a.exp(),
            Func::Ln => a.ln(),
            Func::Abs => a.abs(),
        }
    }
}

const FUNCTION_NAMES: [&str; 6] = ["sqrt", "sin", "cos", "exp", "ln", "abs"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Symbol(String),
    Unary(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

/// Names that resolve without being bound by the caller.
pub const BUILTIN_CONSTANTS: [&str; 1] = ["pi"];

impl Expr {
    pub fn constant(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn symbol(name: &str) -> Expr {
        Expr::Symbol(name.to_string())
    }

    /// Every symbol referenced, including built-in constants such as `pi`.
    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Symbol(s) => {
                out.insert(s.clone());
            }
            Expr::Unary(_, a) => a.collect_symbols(out),
            Expr::Binary(_, a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    /// Plain floating-point evaluation.
    pub fn eval_f64(&self, env: &HashMap<String, f64>) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Symbol(s) => lookup_f64(env, s)?,
            Expr::Unary(f, a) => f.apply_f64(a.eval_f64(env)?),
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.eval_f64(env)?, b.eval_f64(env)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => {
                        if b.fract() == 0.0 && b.abs() <= i32::MAX as f64 {
                            a.powi(b as i32)
                        } else {
                            a.powf(b)
                        }
                    }
                }
            }
        })
    }

    /// Evaluates over jets. Symbols look up `env` first, then built-in
    /// constants; every jet in `env` must share one shape, given by `like`.
    pub fn evaluate(&self, env: &HashMap<String, Jet>, like: &Jet) -> Result<Jet, EvalError> {
        let (order, nvars) = (like.order(), like.nvars());
        Ok(match self {
            Expr::Const(c) => Jet::constant(*c, order, nvars),
            Expr::Symbol(s) => match env.get(s) {
                Some(j) => j.clone(),
                None if s == "pi" => Jet::constant(std::f64::consts::PI, order, nvars),
                None => return Err(EvalError::Unbound(s.clone())),
            },
            Expr::Unary(f, a) => {
                let a = a.evaluate(env, like)?;
                match f {
                    Func::Neg => -a,
                    Func::Sqrt => a.sqrt()?,
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Ln => a.ln()?,
                    Func::Abs => a.abs()?,
                }
            }
            Expr::Binary(BinOp::Pow, a, b) => {
                let base = a.evaluate(env, like)?;
                if b.free_symbols().iter().all(|s| s == "pi" && !env.contains_key(s)) {
                    let p = b.eval_f64(&HashMap::new())?;
                    base.powf(p)?
                } else {
                    // Non-constant exponent: exp(b ln a), positive base only.
                    let e = b.evaluate(env, like)?;
                    (e * base.ln()?).exp()
                }
            }
            Expr::Binary(op, a, b) => {
                let a = a.evaluate(env, like)?;
                let b = b.evaluate(env, like)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a.try_div(&b)?,
                    BinOp::Pow => unreachable!(),
                }
            }
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Const(c) if *c < 0.0 => 2,
            Expr::Const(_) | Expr::Symbol(_) => 5,
            Expr::Unary(Func::Neg, _) => 3,
            Expr::Unary(_, _) => 5,
            Expr::Binary(BinOp::Add | BinOp::Sub, _, _) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, _, _) => 2,
            Expr::Binary(BinOp::Pow, _, _) => 4,
        }
    }
}

fn lookup_f64(env: &HashMap<String, f64>, s: &str) -> Result<f64, EvalError> {
    match env.get(s) {
        Some(v) => Ok(*v),
        None if s == "pi" => Ok(std::f64::consts::PI),
        None => Err(EvalError::Unbound(s.to_string())),
    }
}

/// Canonical printer; `parse(&e.to_string())` rebuilds a tree equal to `e`
/// for every tree produced by [`parse`].
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if *c < 0.0 {
                    write!(f, "(-{:?})", -c)
                } else {
                    write!(f, "{c:?}")
                }
            }
            Expr::Symbol(s) => write!(f, "{s}"),
            Expr::Unary(Func::Neg, a) => {
                if a.precedence() < 3 {
                    write!(f, "-({a})")
                } else {
                    write!(f, "-{a}")
                }
            }
            Expr::Unary(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Binary(op, a, b) => {
                let p = self.precedence();
                let (left_paren, right_paren) = match op {
                    // '^' is right-associative; its exponent is a unary.
                    BinOp::Pow => (a.precedence() <= p, b.precedence() < 3),
                    // Left-associative: the right operand needs parens at equal precedence.
                    _ => (a.precedence() < p, b.precedence() <= p),
                };
                write_operand(f, a, left_paren)?;
                write!(f, " {} ", op.symbol())?;
                write_operand(f, b, right_paren)
            }
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, paren: bool) -> fmt::Result {
    if paren {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(n) => format!("number {n}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = single {
            i += 1;
            out.push((t, SourceSpan { begin: start, end: i }));
            continue;
        }
        if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let span = SourceSpan { begin: start, end: i };
            let text = &src[start..i];
            let v: f64 = text
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| ParseError {
                    span,
                    expected: vec!["number".into()],
                    message: format!("malformed number `{text}`"),
                })?;
            out.push((Tok::Num(v), span));
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((
                Tok::Ident(src[start..i].to_string()),
                SourceSpan { begin: start, end: i },
            ));
            continue;
        }
        // Report the whole (possibly multi-byte) character.
        let ch_len = src[start..].chars().next().map_or(1, char::len_utf8);
        return Err(ParseError {
            span: SourceSpan {
                begin: start,
                end: start + ch_len,
            },
            expected: vec!["number".into(), "identifier".into(), "operator".into()],
            message: format!("unexpected character `{}`", &src[start..start + ch_len]),
        });
    }
    out.push((
        Tok::End,
        SourceSpan {
            begin: src.len(),
            end: src.len(),
        },
    ));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
    depth: usize,
}

const MAX_DEPTH: usize = 256;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, SourceSpan) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError {
            span: self.span(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            message: format!("unexpected {}", self.peek().describe()),
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError {
                span: self.span(),
                expected: vec![],
                message: "expression nested too deeply".into(),
            });
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let e = if *self.peek() == Tok::Minus {
            self.bump();
            Expr::Unary(Func::Neg, Box::new(self.unary()?))
        } else {
            self.power()?
        };
        self.depth -= 1;
        Ok(e)
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        const PRIMARY: [&str; 4] = ["number", "identifier", "`(`", "`-`"];
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Const(v))
            }
            Tok::Ident(name) => {
                let (_, name_span) = self.bump();
                if *self.peek() == Tok::LParen {
                    let func = Func::from_name(&name).ok_or_else(|| ParseError {
                        span: name_span,
                        expected: FUNCTION_NAMES.iter().map(|s| s.to_string()).collect(),
                        message: format!("unknown function `{name}`"),
                    })?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    Ok(Expr::Unary(func, Box::new(arg)))
                } else {
                    Ok(Expr::Symbol(name))
                }
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            _ => Err(self.error(&PRIMARY)),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&["`)`", "operator"]))
        }
    }
}

/// Parses one expression; the whole input must be consumed.
pub fn parse(source: &str) -> Result<Expr, ParseError> {
    let toks = lex(source)?;
    let mut p = Parser {
        toks,
        pos: 0,
        depth: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(e)
}
