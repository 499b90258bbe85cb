//! Reader for σ-expressions such as `σ1²σ2 − 3·σ1σ3 + (σ1 + σ2)^2`.
//!
//! ```text
//! expr  := sign? term (sign term)*
//! term  := power (('·' | '*')? power)*
//! power := atom (superscript | '^' integer)?
//! atom  := integer | ('σ' | "sigma") index | '(' expr ')'
//! sign  := '+' | '-' | '−'
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;

use super::sigma::SigmaPolynomial;
use crate::error::{Error, Result};

pub fn parse_sigma(text: &str, n: usize) -> Result<SigmaPolynomial> {
    let mut p = Parser {
        chars: text.chars().collect(),
        pos: 0,
        n,
    };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos != p.chars.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(out)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    n: usize,
}

fn superscript_digit(c: char) -> Option<u32> {
    match c {
        '⁰' => Some(0),
        '¹' => Some(1),
        '²' => Some(2),
        '³' => Some(3),
        '⁴'..='⁹' => Some(c as u32 - '⁴' as u32 + 4),
        _ => None,
    }
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

    fn sign(&mut self) -> Option<bool> {
        match self.peek() {
            Some('+') => {
                self.pos += 1;
                Some(false)
            }
            Some('-' | '−') => {
                self.pos += 1;
                Some(true)
            }
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<SigmaPolynomial> {
        let negate = self.sign().unwrap_or(false);
        let first = self.term()?;
        let mut acc = if negate { first.neg() } else { first };
        while let Some(neg) = self.sign() {
            let t = self.term()?;
            acc = acc.add(&if neg { t.neg() } else { t });
        }
        Ok(acc)
    }

    fn starts_atom(&mut self) -> bool {
        matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == 'σ' || c == 's' || c == '(')
    }

    fn term(&mut self) -> Result<SigmaPolynomial> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some('·' | '*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.power()?);
                }
                _ if self.starts_atom() => acc = acc.mul(&self.power()?),
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<SigmaPolynomial> {
        let base = self.atom()?;
        if self
            .chars
            .get(self.pos)
            .copied()
            .and_then(superscript_digit)
            .is_some()
        {
            let mut k = 0u32;
            while let Some(d) = self
                .chars
                .get(self.pos)
                .copied()
                .and_then(superscript_digit)
            {
                k = k * 10 + d;
                self.pos += 1;
            }
            return Ok(base.pow(k));
        }
        if self.peek() == Some('^') {
            self.pos += 1;
            self.skip_ws();
            let k = self.integer()?;
            let k: u32 = k.try_into().map_err(|_| self.error("exponent too large"))?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<BigInt> {
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an integer"));
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().map_err(|_| self.error("bad integer"))
    }

    fn atom(&mut self) -> Result<SigmaPolynomial> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let v = self.integer()?;
                Ok(SigmaPolynomial::constant(
                    self.n,
                    BigRational::from_integer(v),
                ))
            }
            Some('σ') => {
                self.pos += 1;
                self.sigma_index()
            }
            Some('s') => {
                let word: String = self.chars[self.pos..].iter().take(5).collect();
                if word == "sigma" {
                    self.pos += 5;
                    self.sigma_index()
                } else {
                    Err(self.error("expected 'sigma'"))
                }
            }
            _ => Err(self.error("expected a number, σk, or '('")),
        }
    }

    fn sigma_index(&mut self) -> Result<SigmaPolynomial> {
        if self.chars.get(self.pos) == Some(&'_') {
            self.pos += 1;
        }
        let k = self.integer()?;
        let k: usize = k.try_into().map_err(|_| self.error("index too large"))?;
        if k == 0 || k > self.n {
            return Err(self.error(&format!("σ index {k} outside 1..={}", self.n)));
        }
        Ok(SigmaPolynomial::sigma(self.n, k))
    }
}
