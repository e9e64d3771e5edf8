//! Expressions in one variable `x`, with second-order forward-mode
//! differentiation.
//!
//! Grammar (whitespace is ignored between tokens):
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := unary ("^" factor)?
//! unary  := "-" unary | atom
//! atom   := number | "x" | "pi" | "e" | name "(" expr ")" | "(" expr ")"
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x^2`
//! is `-(x^2)`. Recognised functions are `sin`, `cos`, `exp`, `sqrt` and
//! `abs`. There is no implicit multiplication: `2x` is a syntax error.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> Option<usize> {
        match self {
            ParseError::Empty => Some(0),
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => {
                Some(*offset)
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("division by zero at x = {x}")]
    DivisionByZero { x: f64 },
    #[error("{op} is not defined or not differentiable at argument {arg} (x = {x})")]
    Domain { op: &'static str, arg: f64, x: f64 },
    #[error("non-finite value produced at x = {x}")]
    NonFinite { x: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "sqrt" => Some(Func::Sqrt),
            "abs" => Some(Func::Abs),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedConst {
    Pi,
    E,
}

impl NamedConst {
    pub fn value(self) -> f64 {
        match self {
            NamedConst::Pi => std::f64::consts::PI,
            NamedConst::E => std::f64::consts::E,
        }
    }
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Named(NamedConst),
    X,
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    /// True when the subtree does not reference `x`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Named(_) => true,
            Expr::X => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Binary(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        self.eval_jet(x).map(|j| j.v)
    }

    /// Evaluates value, first and second derivative at `x`.
    pub fn eval_jet(&self, x: f64) -> Result<Jet2, EvalError> {
        let out = self.jet(x)?;
        if out.v.is_finite() && out.d1.is_finite() && out.d2.is_finite() {
            Ok(out)
        } else {
            Err(EvalError::NonFinite { x })
        }
    }

    fn jet(&self, x: f64) -> Result<Jet2, EvalError> {
        match self {
            Expr::Const(c) => Ok(Jet2::constant(*c)),
            Expr::Named(c) => Ok(Jet2::constant(c.value())),
            Expr::X => Ok(Jet2::variable(x)),
            Expr::Neg(a) => Ok(-a.jet(x)?),
            Expr::Call(f, a) => {
                let u = a.jet(x)?;
                match f {
                    Func::Sin => Ok(u.sin()),
                    Func::Cos => Ok(u.cos()),
                    Func::Exp => Ok(u.exp()),
                    Func::Sqrt => u.sqrt().ok_or(EvalError::Domain {
                        op: "sqrt",
                        arg: u.v,
                        x,
                    }),
                    Func::Abs => u.abs().ok_or(EvalError::Domain {
                        op: "abs",
                        arg: u.v,
                        x,
                    }),
                }
            }
            Expr::Binary(op, a, b) => {
                let l = a.jet(x)?;
                let r = b.jet(x)?;
                match op {
                    BinOp::Add => Ok(l + r),
                    BinOp::Sub => Ok(l - r),
                    BinOp::Mul => Ok(l * r),
                    BinOp::Div => {
                        if r.v == 0.0 {
                            Err(EvalError::DivisionByZero { x })
                        } else {
                            Ok(l / r)
                        }
                    }
                    BinOp::Pow => {
                        if b.is_constant() {
                            l.powf(r.v).ok_or(EvalError::Domain {
                                op: "^",
                                arg: l.v,
                                x,
                            })
                        } else {
                            l.pow(r).ok_or(EvalError::Domain {
                                op: "^",
                                arg: l.v,
                                x,
                            })
                        }
                    }
                }
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Binary(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                // `{:?}` is the shortest round-trippable form for f64.
                write!(f, "{c:?}")
            }
            Expr::Named(NamedConst::Pi) => f.write_str("pi"),
            Expr::Named(NamedConst::E) => f.write_str("e"),
            Expr::X => f.write_str("x"),
            Expr::Neg(a) => {
                if a.precedence() < 3 {
                    write!(f, "-({a})")
                } else {
                    write!(f, "-{a}")
                }
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Binary(op, a, b) => {
                let p = self.precedence();
                // Left operand of `^` must be an atom-level term because `^`
                // binds tighter than unary minus; everything else is
                // left-associative.
                let (lp, rp) = match op {
                    BinOp::Pow => (5, 4),
                    _ => (p, p + 1),
                };
                if a.precedence() < lp {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                write!(f, "{}", op.symbol())?;
                if b.precedence() < rp {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

/// Parses `text` into an expression tree.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(ParseError::Empty);
    }
    let mut p = Parser {
        tokens: &tokens,
        pos: 0,
        end: text.len(),
    };
    let e = p.expr()?;
    if let Some(t) = p.peek() {
        return Err(ParseError::Syntax {
            offset: t.offset,
            message: format!("unexpected {}", t.kind.describe()),
        });
    }
    Ok(e)
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::Number(v) => format!("number {v}"),
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Plus => "`+`".into(),
            TokenKind::Minus => "`-`".into(),
            TokenKind::Star => "`*`".into(),
            TokenKind::Slash => "`/`".into(),
            TokenKind::Caret => "`^`".into(),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    offset: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let simple = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Some(TokenKind::Plus),
            b'-' => Some(TokenKind::Minus),
            b'*' => Some(TokenKind::Star),
            b'/' => Some(TokenKind::Slash),
            b'^' => Some(TokenKind::Caret),
            b'(' => Some(TokenKind::LParen),
            b')' => Some(TokenKind::RParen),
            _ => None,
        };
        if let Some(kind) = simple {
            out.push(Token {
                kind,
                offset: start,
            });
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                // Only treat as exponent when digits follow; otherwise `e` is
                // the next token (and will be rejected as implicit
                // multiplication by the parser).
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
            let lit = &text[start..i];
            let v: f64 = lit.parse().map_err(|_| ParseError::Syntax {
                offset: start,
                message: format!("malformed number `{lit}`"),
            })?;
            out.push(Token {
                kind: TokenKind::Number(v),
                offset: start,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                kind: TokenKind::Ident(text[start..i].to_string()),
                offset: start,
            });
            continue;
        }
        let ch = text[start..].chars().next().unwrap_or('?');
        return Err(ParseError::Syntax {
            offset: start,
            message: format!("unexpected character `{ch}`"),
        });
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self) -> Option<&TokenKind> {
        self.peek().map(|t| &t.kind)
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.end, |t| t.offset)
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if t.kind == kind => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(ParseError::Syntax {
                offset: t.offset,
                message: format!("expected {what}, found {}", t.kind.describe()),
            }),
            None => Err(ParseError::Syntax {
                offset: self.end,
                message: format!("expected {what}, found end of input"),
            }),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek_kind() {
                Some(TokenKind::Plus) => BinOp::Add,
                Some(TokenKind::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek_kind() {
                Some(TokenKind::Star) => BinOp::Mul,
                Some(TokenKind::Slash) => BinOp::Div,
                Some(TokenKind::Number(_) | TokenKind::Ident(_) | TokenKind::LParen) => {
                    return Err(ParseError::Syntax {
                        offset: self.offset(),
                        message: "implicit multiplication is not supported; use `*`".into(),
                    })
                }
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    /// `factor := '-' factor | atom ('^' factor)?` so that `^` binds tighter
    /// than a leading minus and associates to the right.
    fn factor(&mut self) -> Result<Expr, ParseError> {
        if let Some(TokenKind::Minus) = self.peek_kind() {
            self.pos += 1;
            let inner = self.factor()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        let base = self.atom()?;
        if let Some(TokenKind::Caret) = self.peek_kind() {
            self.pos += 1;
            let exp = self.factor()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(ParseError::Syntax {
                offset: self.end,
                message: "unexpected end of input".into(),
            });
        };
        self.pos += 1;
        match tok.kind {
            TokenKind::Number(v) => Ok(Expr::Const(v)),
            TokenKind::LParen => {
                let e = self.expr()?;
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(e)
            }
            TokenKind::Ident(name) => match name.as_str() {
                "x" => Ok(Expr::X),
                "pi" => Ok(Expr::Named(NamedConst::Pi)),
                "e" => Ok(Expr::Named(NamedConst::E)),
                _ => match Func::from_name(&name) {
                    Some(func) => {
                        self.expect(TokenKind::LParen, "`(` after function name")?;
                        let arg = self.expr()?;
                        self.expect(TokenKind::RParen, "`)`")?;
                        Ok(Expr::Call(func, Box::new(arg)))
                    }
                    None => Err(ParseError::UnknownIdentifier {
                        name,
                        offset: tok.offset,
                    }),
                },
            },
            other => Err(ParseError::Syntax {
                offset: tok.offset,
                message: format!("unexpected {}", other.describe()),
            }),
        }
    }
}

/// Truncated second-order Taylor value: `v + d1·ε + d2·ε²/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet2 {
    pub fn new(v: f64, d1: f64, d2: f64) -> Self {
        Self { v, d1, d2 }
    }

    pub fn constant(v: f64) -> Self {
        Self {
            v,
            d1: 0.0,
            d2: 0.0,
        }
    }

    /// The independent variable seeded at `x`.
    pub fn variable(x: f64) -> Self {
        Self {
            v: x,
            d1: 1.0,
            d2: 0.0,
        }
    }

    /// Composes with a scalar function given its value and first two
    /// derivatives at `self.v`.
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        Self {
            v: f0,
            d1: f1 * self.d1,
            d2: f2 * self.d1 * self.d1 + f1 * self.d2,
        }
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Option<Self> {
        if self.v <= 0.0 {
            return None;
        }
        let r = 1.0 / self.v;
        Some(self.chain(self.v.ln(), r, -r * r))
    }

    pub fn sqrt(self) -> Option<Self> {
        if self.v <= 0.0 {
            return None;
        }
        let r = self.v.sqrt();
        Some(self.chain(r, 0.5 / r, -0.25 / (r * self.v)))
    }

    /// `None` at zero, where the derivative does not exist.
    pub fn abs(self) -> Option<Self> {
        if self.v == 0.0 {
            return None;
        }
        let sign = self.v.signum();
        Some(self.chain(self.v.abs(), sign, 0.0))
    }

    /// Power with a constant exponent.
    pub fn powf(self, p: f64) -> Option<Self> {
        let u = self.v;
        if p == 0.0 {
            return Some(Self::constant(1.0));
        }
        let integral = p.fract() == 0.0;
        if u < 0.0 && !integral {
            return None;
        }
        if u == 0.0 && p < 0.0 {
            return None;
        }
        let pow = |k: f64| -> f64 {
            if integral && k.abs() <= i32::MAX as f64 {
                u.powi(k as i32)
            } else {
                u.powf(k)
            }
        };
        let f0 = pow(p);
        let f1 = p * pow(p - 1.0);
        let f2 = if p == 1.0 {
            0.0
        } else {
            p * (p - 1.0) * pow(p - 2.0)
        };
        let out = self.chain(f0, f1, f2);
        // Non-integral powers below 2 have unbounded derivatives at 0.
        (out.d1.is_finite() && out.d2.is_finite()).then_some(out)
    }

    /// General power `self^rhs` via `exp(rhs·ln self)`; requires a positive base.
    pub fn pow(self, rhs: Self) -> Option<Self> {
        Some((rhs * self.ln()?).exp())
    }
}

impl Add for Jet2 {
    type Output = Self;
    fn add(self, r: Self) -> Self {
        Self::new(self.v + r.v, self.d1 + r.d1, self.d2 + r.d2)
    }
}

impl Sub for Jet2 {
    type Output = Self;
    fn sub(self, r: Self) -> Self {
        Self::new(self.v - r.v, self.d1 - r.d1, self.d2 - r.d2)
    }
}

impl Mul for Jet2 {
    type Output = Self;
    fn mul(self, r: Self) -> Self {
        Self::new(
            self.v * r.v,
            self.d1 * r.v + self.v * r.d1,
            self.d2 * r.v + 2.0 * self.d1 * r.d1 + self.v * r.d2,
        )
    }
}

impl Div for Jet2 {
    type Output = Self;
    fn div(self, r: Self) -> Self {
        let inv = 1.0 / r.v;
        let q = self.v * inv;
        let d1 = (self.d1 - q * r.d1) * inv;
        let d2 = (self.d2 - 2.0 * d1 * r.d1 - q * r.d2) * inv;
        Self::new(q, d1, d2)
    }
}

impl Neg for Jet2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.v, -self.d1, -self.d2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn jet(s: &str, x: f64) -> Jet2 {
        parse(s).unwrap().eval_jet(x).unwrap()
    }

    #[test]
    fn parses_variable_leaf() {
        assert_eq!(parse("x").unwrap(), Expr::X);
        assert_eq!(parse("  x ").unwrap(), Expr::X);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(parse("-x^2").unwrap().eval(3.0).unwrap(), -9.0);
        assert_eq!(parse("2^3^2").unwrap().eval(0.0).unwrap(), 512.0);
        assert_eq!(parse("8-3-2").unwrap().eval(0.0).unwrap(), 3.0);
        assert_eq!(parse("8/4/2").unwrap().eval(0.0).unwrap(), 1.0);
        assert_eq!(parse("1+2*3").unwrap().eval(0.0).unwrap(), 7.0);
        assert_eq!(parse("--x").unwrap().eval(2.0).unwrap(), 2.0);
        assert_eq!(parse("2*-x").unwrap().eval(2.0).unwrap(), -4.0);
    }

    #[test]
    fn numeric_literals() {
        assert_eq!(parse("1.5e-3").unwrap(), Expr::Const(1.5e-3));
        assert_eq!(parse("2E2").unwrap(), Expr::Const(200.0));
        assert_eq!(parse(".5").unwrap(), Expr::Const(0.5));
    }

    #[test]
    fn unbalanced_paren_reports_offset() {
        let err = parse("sin(").unwrap_err();
        assert_eq!(err.offset(), Some(4));
        assert!(matches!(err, ParseError::Syntax { .. }));
        let err = parse("(x+1").unwrap_err();
        assert_eq!(err.offset(), Some(4));
    }

    #[test]
    fn syntax_errors() {
        assert_eq!(parse("").unwrap_err(), ParseError::Empty);
        assert_eq!(parse("   ").unwrap_err(), ParseError::Empty);
        assert_eq!(parse("2x").unwrap_err().offset(), Some(1));
        assert_eq!(parse("x+").unwrap_err().offset(), Some(2));
        assert_eq!(parse("x)").unwrap_err().offset(), Some(1));
        assert_eq!(parse("x # 1").unwrap_err().offset(), Some(2));
        assert_eq!(parse("1..2").unwrap_err().offset(), Some(0));
    }

    #[test]
    fn unknown_identifier() {
        assert_eq!(
            parse("1+tan(x)").unwrap_err(),
            ParseError::UnknownIdentifier {
                name: "tan".into(),
                offset: 2
            }
        );
        assert!(matches!(
            parse("y").unwrap_err(),
            ParseError::UnknownIdentifier { .. }
        ));
    }

    #[test]
    fn polynomial_jet() {
        assert_eq!(jet("x^2", 3.0), Jet2::new(9.0, 6.0, 2.0));
        assert_eq!(jet("x*x*x", 2.0), Jet2::new(8.0, 12.0, 12.0));
        assert_eq!(jet("x^1", 0.0), Jet2::new(0.0, 1.0, 0.0));
        assert_eq!(jet("x^0", 5.0), Jet2::new(1.0, 0.0, 0.0));
        assert_eq!(jet("x^2", 0.0), Jet2::new(0.0, 0.0, 2.0));
    }

    #[test]
    fn exp_jet() {
        assert_eq!(jet("exp(-x)", 0.0), Jet2::new(1.0, -1.0, 1.0));
    }

    #[test]
    fn example_one_rhs_at_left_end() {
        let j = jet("-2+2*cos(pi*(x+1))", -1.0);
        assert!(j.v.abs() < 1e-15);
        assert!(j.d1.abs() < 1e-15);
        assert!((j.d2 + 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn quotient_jet_matches_hand_rules() {
        // 1/x: -1/x^2, 2/x^3
        let j = jet("1/x", 2.0);
        assert!((j.v - 0.5).abs() < 1e-15);
        assert!((j.d1 + 0.25).abs() < 1e-15);
        assert!((j.d2 - 0.25).abs() < 1e-15);
    }

    #[test]
    fn sqrt_and_variable_power() {
        let j = jet("sqrt(x)", 4.0);
        assert!((j.v - 2.0).abs() < 1e-15);
        assert!((j.d1 - 0.25).abs() < 1e-15);
        assert!((j.d2 + 1.0 / 32.0).abs() < 1e-15);
        // x^x at 1: value 1, d1 = 1, d2 = 2
        let j = jet("x^x", 1.0);
        assert!((j.v - 1.0).abs() < 1e-14);
        assert!((j.d1 - 1.0).abs() < 1e-14);
        assert!((j.d2 - 2.0).abs() < 1e-14);
    }

    #[test]
    fn domain_errors() {
        let e = parse("1/x").unwrap();
        assert_eq!(
            e.eval_jet(0.0).unwrap_err(),
            EvalError::DivisionByZero { x: 0.0 }
        );
        assert!(matches!(
            parse("sqrt(x)").unwrap().eval_jet(-1.0),
            Err(EvalError::Domain { op: "sqrt", .. })
        ));
        assert!(matches!(
            parse("sqrt(x)").unwrap().eval_jet(0.0),
            Err(EvalError::Domain { .. })
        ));
        assert!(matches!(
            parse("abs(x)").unwrap().eval_jet(0.0),
            Err(EvalError::Domain { op: "abs", .. })
        ));
        assert!(matches!(
            parse("x^0.5").unwrap().eval_jet(-2.0),
            Err(EvalError::Domain { op: "^", .. })
        ));
        assert!(matches!(
            parse("x^x").unwrap().eval_jet(-2.0),
            Err(EvalError::Domain { .. })
        ));
        // Integral exponents are fine for negative bases.
        assert_eq!(jet("x^3", -2.0), Jet2::new(-8.0, 12.0, -12.0));
        assert_eq!(jet("abs(x)", -2.0), Jet2::new(2.0, -1.0, 0.0));
    }

    #[test]
    fn print_parse_round_trip_on_examples() {
        for s in [
            "-2+2*cos(pi*(x+1))",
            "-2*exp(x-1)+2/pi*sin(pi*(x+1))+2*cos(pi*(x+1))",
            "cos(pi*(x+1)/2)+4*cos(2*pi*(x+1))-1.5*cos(7*pi*(x+1)/2)",
            "exp(-x)+2*sin(2*pi*(x+1))",
            "-x^2",
            "(-x)^2",
            "2^3^2",
            "(2^3)^2",
            "a-(b-c)"
                .replace('a', "x")
                .replace('b', "1")
                .replace('c', "x")
                .as_str(),
            "x/(x*2)",
            "-(x+1)",
        ] {
            let a = parse(s).unwrap();
            let printed = a.to_string();
            let b = parse(&printed).unwrap();
            assert_eq!(a, b, "{s} -> {printed}");
            assert_eq!(b.to_string(), printed);
        }
    }
}
