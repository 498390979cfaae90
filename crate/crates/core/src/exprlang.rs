//! A small arithmetic language for time coefficients and nonlinearities in
//! configuration files, e.g. `1 + 0.5*cos(2*pi*t/T)` or `tanh(s) + cos(2*pi*t/T)`.
//!
//! Precedence from loosest to tightest: `+ -`, `* /`, unary `-`, `^`.
//! `^` is right associative and its exponent may carry a unary minus.

use std::fmt;

use thiserror::Error;

/// Free variables an expression may mention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    /// `t`, time.
    Time,
    /// `s`, the state argument of a nonlinearity.
    State,
    /// `T`, the period.
    Period,
    /// `pi`, always bound.
    Pi,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::Time => "t",
            Var::State => "s",
            Var::Period => "T",
            Var::Pi => "pi",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "t" => Var::Time,
            "s" => Var::State,
            "T" => Var::Period,
            "pi" => Var::Pi,
            _ => return None,
        })
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
            BinOp::Add => " + ",
            BinOp::Sub => " - ",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Tanh,
    Abs,
    Min,
    Max,
}

impl Func {
    pub const ALL: [Func; 7] = [Func::Sin, Func::Cos, Func::Exp, Func::Tanh, Func::Abs, Func::Min, Func::Max];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Tanh => "tanh",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Parsed expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

const PREC_NEG: u8 = 3;
const PREC_ATOM: u8 = 5;

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(op, ..) => op.precedence(),
            Expr::Neg(_) => PREC_NEG,
            Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => PREC_ATOM,
        }
    }

    /// Variables mentioned, in first-occurrence order, `pi` excluded.
    pub fn free_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(Var::Pi) => {}
            Expr::Var(v) => {
                if !out.contains(v) {
                    out.push(*v);
                }
            }
            Expr::Neg(e) => e.collect_vars(out),
            Expr::Bin(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn eval(&self, env: &Bindings) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Num(x) => *x,
            Expr::Var(v) => env.get(*v)?,
            Expr::Neg(e) => -e.eval(env)?,
            Expr::Bin(op, l, r) => {
                let (a, b) = (l.eval(env)?, r.eval(env)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        a / b
                    }
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call(f, args) => {
                let x = args[0].eval(env)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Tanh => x.tanh(),
                    Func::Abs => x.abs(),
                    Func::Min => x.min(args[1].eval(env)?),
                    Func::Max => x.max(args[1].eval(env)?),
                }
            }
        })
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x}"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Neg(e) => {
                f.write_str("-")?;
                write_child(f, e, e.precedence() < PREC_NEG)
            }
            Expr::Bin(BinOp::Pow, l, r) => {
                write_child(f, l, l.precedence() < PREC_ATOM)?;
                f.write_str("^")?;
                write_child(f, r, r.precedence() < PREC_NEG)
            }
            Expr::Bin(op, l, r) => {
                let p = op.precedence();
                write_child(f, l, l.precedence() < p)?;
                f.write_str(op.symbol())?;
                write_child(f, r, r.precedence() <= p)
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Variable values for [`Expr::eval`]; `pi` is always bound.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Bindings {
    pub t: Option<f64>,
    pub s: Option<f64>,
    pub period: Option<f64>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn t(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }

    pub fn s(mut self, s: f64) -> Self {
        self.s = Some(s);
        self
    }

    pub fn period(mut self, period: f64) -> Self {
        self.period = Some(period);
        self
    }

    fn get(&self, v: Var) -> Result<f64, EvalError> {
        match v {
            Var::Time => self.t.ok_or(EvalError::Unbound("t")),
            Var::State => self.s.ok_or(EvalError::Unbound("s")),
            Var::Period => self.period.ok_or(EvalError::Unbound("T")),
            Var::Pi => Ok(std::f64::consts::PI),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(&'static str),
    #[error("division by zero")]
    DivisionByZero,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("expected `{0}`")]
    Expected(&'static str),
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("`{name}` takes {expected} argument(s), got {found}")]
    Arity { name: &'static str, expected: usize, found: usize },
    #[error("malformed number `{0}`")]
    BadNumber(String),
}

/// Syntax error with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at offset {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, offset: usize, kind: ParseErrorKind) -> ParseError {
        ParseError { offset, kind }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char, what: &'static str) -> Result<(), ParseError> {
        if self.eat(c) {
            return Ok(());
        }
        let pos = self.pos;
        Err(match self.peek() {
            None => self.err(pos, ParseErrorKind::UnexpectedEnd),
            Some(_) => self.err(pos, ParseErrorKind::Expected(what)),
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some('+') => BinOp::Add,
                Some('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some('*') => BinOp::Mul,
                Some('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.eat('^') {
            let exponent = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.err(self.pos, ParseErrorKind::UnexpectedEnd)),
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')', ")")?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let start = self.pos;
                let len = self.src[start..]
                    .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
                    .unwrap_or(self.src.len() - start);
                let name = &self.src[start..start + len];
                self.pos += len;
                if let Some(v) = Var::from_name(name) {
                    return Ok(Expr::Var(v));
                }
                let Some(func) = Func::from_name(name) else {
                    return Err(self.err(start, ParseErrorKind::UnknownIdentifier(name.to_string())));
                };
                self.expect('(', "(")?;
                let mut args = vec![self.expr()?];
                while self.eat(',') {
                    args.push(self.expr()?);
                }
                self.expect(')', ")")?;
                if args.len() != func.arity() {
                    return Err(self.err(
                        start,
                        ParseErrorKind::Arity { name: func.name(), expected: func.arity(), found: args.len() },
                    ));
                }
                Ok(Expr::Call(func, args))
            }
            Some(c) => Err(self.err(self.pos, ParseErrorKind::UnexpectedChar(c))),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut end = start;
        while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
            end += 1;
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut exp = end + 1;
            if exp < bytes.len() && (bytes[exp] == b'+' || bytes[exp] == b'-') {
                exp += 1;
            }
            if exp < bytes.len() && bytes[exp].is_ascii_digit() {
                while exp < bytes.len() && bytes[exp].is_ascii_digit() {
                    exp += 1;
                }
                end = exp;
            }
        }
        let text = &self.src[start..end];
        self.pos = end;
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| self.err(start, ParseErrorKind::BadNumber(text.to_string())))
    }
}

/// Parses a complete expression.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src, pos: 0 };
    let e = p.expr()?;
    match p.peek() {
        None => Ok(e),
        Some(c) => Err(p.err(p.pos, ParseErrorKind::UnexpectedChar(c))),
    }
}

/// Evaluates `e` under `env`.
pub fn eval_expr(e: &Expr, env: &Bindings) -> Result<f64, EvalError> {
    e.eval(env)
}
