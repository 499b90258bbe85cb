//! Scalar expressions `f(x, u)` for boundary data and source terms.
//!
//! ```text
//! expr   := term (('+' | '-' | '−') term)*
//! term   := unary (('*' | '·' | '/') unary)*
//! unary  := ('+' | '-' | '−') unary | power
//! power  := atom ('^' unary)?
//! atom   := number | var | func '(' expr ')' | '(' expr ')'
//! var    := 'x' | 'y' | 'z' | 'x' digits | 'u'
//! func   := 'exp' | 'ln'
//! ```
//!
//! `x`, `y`, `z` alias `x1`, `x2`, `x3`. `^` is right associative and binds
//! tighter than unary minus, so `-x^2` is `-(x^2)`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Zero-based coordinate index.
    Coord(usize),
    U,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Exp(Box<Expr>),
    Ln(Box<Expr>),
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr> {
        let mut p = Parser {
            chars: text.chars().collect(),
            pos: 0,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.chars.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn eval(&self, x: &[f64], u: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Coord(k) => x.get(*k).copied().unwrap_or(f64::NAN),
            Expr::U => u,
            Expr::Neg(a) => -a.eval(x, u),
            Expr::Add(a, b) => a.eval(x, u) + b.eval(x, u),
            Expr::Sub(a, b) => a.eval(x, u) - b.eval(x, u),
            Expr::Mul(a, b) => a.eval(x, u) * b.eval(x, u),
            Expr::Div(a, b) => a.eval(x, u) / b.eval(x, u),
            Expr::Pow(a, b) => {
                let base = a.eval(x, u);
                match b.as_ref() {
                    Expr::Num(k) if k.fract() == 0.0 && k.abs() <= i32::MAX as f64 => {
                        base.powi(*k as i32)
                    }
                    _ => base.powf(b.eval(x, u)),
                }
            }
            Expr::Exp(a) => a.eval(x, u).exp(),
            Expr::Ln(a) => a.eval(x, u).ln(),
        }
    }

    pub fn depends_on_u(&self) -> bool {
        match self {
            Expr::U => true,
            Expr::Num(_) | Expr::Coord(_) => false,
            Expr::Neg(a) | Expr::Exp(a) | Expr::Ln(a) => a.depends_on_u(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.depends_on_u() || b.depends_on_u(),
        }
    }

    /// Largest coordinate index used, plus one.
    pub fn dimension(&self) -> usize {
        match self {
            Expr::Coord(k) => k + 1,
            Expr::Num(_) | Expr::U => 0,
            Expr::Neg(a) | Expr::Exp(a) | Expr::Ln(a) => a.dimension(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.dimension().max(b.dimension()),
        }
    }

    /// Constant value when the expression uses neither `x` nor `u`.
    pub fn constant(&self) -> Option<f64> {
        (self.dimension() == 0 && !self.depends_on_u()).then(|| self.eval(&[], 0.0))
    }

    /// Symbolic `∂/∂u`, lightly simplified.
    pub fn derivative_u(&self) -> Expr {
        use Expr::*;
        if !self.depends_on_u() {
            return Num(0.0);
        }
        match self {
            U => Num(1.0),
            Num(_) | Coord(_) => Num(0.0),
            Neg(a) => neg(a.derivative_u()),
            Add(a, b) => add(a.derivative_u(), b.derivative_u()),
            Sub(a, b) => sub(a.derivative_u(), b.derivative_u()),
            Mul(a, b) => add(
                mul(a.derivative_u(), (**b).clone()),
                mul((**a).clone(), b.derivative_u()),
            ),
            Div(a, b) => Div(
                Box::new(sub(
                    mul(a.derivative_u(), (**b).clone()),
                    mul((**a).clone(), b.derivative_u()),
                )),
                Box::new(Pow(b.clone(), Box::new(Num(2.0)))),
            ),
            Pow(a, b) if !b.depends_on_u() => mul(
                mul(
                    (**b).clone(),
                    Pow(a.clone(), Box::new(sub((**b).clone(), Num(1.0)))),
                ),
                a.derivative_u(),
            ),
            Pow(a, b) => mul(
                self.clone(),
                add(
                    mul(b.derivative_u(), Ln(a.clone())),
                    Div(Box::new(mul((**b).clone(), a.derivative_u())), a.clone()),
                ),
            ),
            Exp(a) => mul(self.clone(), a.derivative_u()),
            Ln(a) => Div(Box::new(a.derivative_u()), a.clone()),
        }
    }
}

fn is_zero(e: &Expr) -> bool {
    matches!(e, Expr::Num(v) if *v == 0.0)
}

fn is_one(e: &Expr) -> bool {
    matches!(e, Expr::Num(v) if *v == 1.0)
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) => Expr::Num(-v),
        a => Expr::Neg(Box::new(a)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) {
        b
    } else if is_zero(&b) {
        a
    } else {
        Expr::Add(Box::new(a), Box::new(b))
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    if is_zero(&b) {
        a
    } else if is_zero(&a) {
        neg(b)
    } else {
        Expr::Sub(Box::new(a), Box::new(b))
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) || is_zero(&b) {
        Expr::Num(0.0)
    } else if is_one(&a) {
        b
    } else if is_one(&b) {
        a
    } else {
        Expr::Mul(Box::new(a), Box::new(b))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Coord(k) => write!(f, "x{}", k + 1),
            Expr::U => write!(f, "u"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Ln(a) => write!(f, "ln({a})"),
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Expr::parse(s)
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn error(&self, message: &str) -> Error {
        Error::Parse {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    acc = Expr::Add(Box::new(acc), Box::new(self.term()?));
                }
                Some('-' | '−') => {
                    self.pos += 1;
                    acc = Expr::Sub(Box::new(acc), Box::new(self.term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some('*' | '·') => {
                    self.pos += 1;
                    acc = Expr::Mul(Box::new(acc), Box::new(self.unary()?));
                }
                Some('/') => {
                    self.pos += 1;
                    acc = Expr::Div(Box::new(acc), Box::new(self.unary()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some('-' | '−') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let digits = |p: &mut Parser| {
            while p.chars.get(p.pos).is_some_and(|c| c.is_ascii_digit()) {
                p.pos += 1;
            }
        };
        digits(self);
        if self.chars.get(self.pos) == Some(&'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.chars.get(self.pos), Some('e' | 'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.chars.get(self.pos), Some('+' | '-')) {
                self.pos += 1;
            }
            if self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                digits(self);
            } else {
                self.pos = save;
            }
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse::<f64>().map(Expr::Num).map_err(|_| Error::Parse {
            position: start,
            message: format!("bad number '{s}'"),
        })
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.close()?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self
                    .chars
                    .get(self.pos)
                    .is_some_and(|c| c.is_ascii_alphanumeric())
                {
                    self.pos += 1;
                }
                let word: String = self.chars[start..self.pos].iter().collect();
                match word.as_str() {
                    "u" => Ok(Expr::U),
                    "x" => Ok(Expr::Coord(0)),
                    "y" => Ok(Expr::Coord(1)),
                    "z" => Ok(Expr::Coord(2)),
                    "exp" | "ln" => {
                        if self.peek() != Some('(') {
                            return Err(self.error("expected '(' after function name"));
                        }
                        self.pos += 1;
                        let arg = Box::new(self.expr()?);
                        self.close()?;
                        Ok(if word == "exp" {
                            Expr::Exp(arg)
                        } else {
                            Expr::Ln(arg)
                        })
                    }
                    w if w.len() > 1
                        && w.starts_with('x')
                        && w[1..].bytes().all(|b| b.is_ascii_digit()) =>
                    {
                        let k: usize = w[1..].parse().map_err(|_| self.error("bad coordinate"))?;
                        if k == 0 {
                            return Err(Error::Parse {
                                position: start,
                                message: "coordinates start at x1".into(),
                            });
                        }
                        Ok(Expr::Coord(k - 1))
                    }
                    _ => Err(Error::Parse {
                        position: start,
                        message: format!("unknown identifier '{word}'"),
                    }),
                }
            }
            _ => Err(self.error("expected a number, variable, function, or '('")),
        }
    }

    fn close(&mut self) -> Result<()> {
        if self.peek() != Some(')') {
            return Err(self.error("expected ')'"));
        }
        self.pos += 1;
        Ok(())
    }
}
