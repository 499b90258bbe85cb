use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::lambda::{rational, LambdaPolynomial};
use crate::error::{Error, Result};

/// Polynomial in `σ_1..σ_n`; exponent vector `e` stands for `Π σ_k^{e_k}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaPolynomial {
    pub(crate) n: usize,
    pub(crate) terms: BTreeMap<Vec<u32>, BigRational>,
}

impl SigmaPolynomial {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: BigRational) -> Self {
        let mut p = Self::zero(n);
        p.add_term(vec![0; n], c);
        p
    }

    /// `σ_k` as a σ-monomial (`k` 1-based).
    pub fn sigma(n: usize, k: usize) -> Self {
        let mut e = vec![0; n];
        e[k - 1] = 1;
        let mut p = Self::zero(n);
        p.add_term(e, BigRational::one());
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, BigRational> {
        &self.terms
    }

    pub fn add_term(&mut self, exponents: Vec<u32>, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        let c = self
            .terms
            .remove(&exponents)
            .unwrap_or_else(BigRational::zero)
            + coeff;
        if !c.is_zero() {
            self.terms.insert(exponents, c);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::constant(self.n, BigRational::one()), |acc, _| {
            acc.mul(self)
        })
    }

    /// Weighted degrees `Σ k e_k` present, ascending.
    pub fn weighted_degrees(&self) -> Vec<u32> {
        let mut d: Vec<u32> = self.terms.keys().map(|e| weighted_degree(e)).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    /// Exact evaluation through the elementary symmetric values of `λ`.
    pub fn eval(&self, lambda: &[BigRational]) -> BigRational {
        let sig = elementary_values(lambda);
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (k, &x) in e.iter().enumerate() {
                if x > 0 {
                    term *= num_traits::pow(sig[k + 1].clone(), x as usize);
                }
            }
            acc += term;
        }
        acc
    }

    pub fn to_lambda(&self) -> LambdaPolynomial {
        let mut cache = PowerCache::new(self.n);
        let mut out = LambdaPolynomial::zero(self.n);
        for (e, c) in &self.terms {
            out = out.add(&cache.expand(e).scale(c));
        }
        out
    }

    /// Terms ordered by weighted degree, then exponent vector descending.
    pub fn canonical_terms(&self) -> Vec<(&Vec<u32>, &BigRational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|(a, _), (b, _)| canonical_cmp(a, b));
        v
    }

    pub fn to_canonical_string(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (e, c)) in self.canonical_terms().into_iter().enumerate() {
            let negative = c.is_negative();
            match (i, negative) {
                (0, true) => out.push('−'),
                (0, false) => {}
                (_, true) => out.push_str(" − "),
                (_, false) => out.push_str(" + "),
            }
            let mag = c.abs();
            let mono = render_monomial(e);
            match (mag.is_one(), mono.is_empty()) {
                (true, false) => out.push_str(&mono),
                (_, true) => out.push_str(&render_rational(&mag)),
                (false, false) => {
                    out.push_str(&render_rational(&mag));
                    out.push('·');
                    out.push_str(&mono);
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> SigmaJson {
        SigmaJson {
            n: self.n,
            terms: self
                .canonical_terms()
                .into_iter()
                .map(|(e, c)| SigmaTermJson {
                    exponents: e.clone(),
                    numerator: c.numer().to_string(),
                    denominator: c.denom().to_string(),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &SigmaJson) -> Result<Self> {
        let mut p = Self::zero(j.n);
        for t in &j.terms {
            if t.exponents.len() != j.n {
                return Err(Error::Parse {
                    position: 0,
                    message: format!(
                        "exponent vector {:?} does not have length {}",
                        t.exponents, j.n
                    ),
                });
            }
            let num: BigInt = t.numerator.parse().map_err(|_| Error::Parse {
                position: 0,
                message: format!("bad numerator {:?}", t.numerator),
            })?;
            let den: BigInt = t.denominator.parse().map_err(|_| Error::Parse {
                position: 0,
                message: format!("bad denominator {:?}", t.denominator),
            })?;
            if den.is_zero() {
                return Err(Error::Parse {
                    position: 0,
                    message: "zero denominator".into(),
                });
            }
            p.add_term(t.exponents.clone(), BigRational::new(num, den));
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaTermJson {
    pub exponents: Vec<u32>,
    pub numerator: String,
    pub denominator: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaJson {
    pub n: usize,
    pub terms: Vec<SigmaTermJson>,
}

pub fn weighted_degree(e: &[u32]) -> u32 {
    e.iter().enumerate().map(|(k, &x)| (k as u32 + 1) * x).sum()
}

fn canonical_cmp(a: &[u32], b: &[u32]) -> Ordering {
    weighted_degree(a)
        .cmp(&weighted_degree(b))
        .then_with(|| b.cmp(a))
}

const SUPERSCRIPTS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];

fn superscript(mut k: u32) -> String {
    let mut digits = Vec::new();
    while k > 0 {
        digits.push(SUPERSCRIPTS[(k % 10) as usize]);
        k /= 10;
    }
    digits.iter().rev().collect()
}

fn render_monomial(e: &[u32]) -> String {
    e.iter()
        .enumerate()
        .filter(|(_, &x)| x > 0)
        .map(|(k, &x)| {
            if x == 1 {
                format!("σ{}", k + 1)
            } else {
                format!("σ{}{}", k + 1, superscript(x))
            }
        })
        .collect::<Vec<_>>()
        .join("·")
}

fn render_rational(c: &BigRational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

/// `σ_0..σ_n` of `λ`.
pub fn elementary_values(lambda: &[BigRational]) -> Vec<BigRational> {
    let n = lambda.len();
    let mut e = vec![BigRational::zero(); n + 1];
    e[0] = BigRational::one();
    for x in lambda {
        for k in (1..=n).rev() {
            let prev = e[k - 1].clone();
            e[k] += prev * x;
        }
    }
    e
}

/// Memoized λ-expansions of `σ_k^j`.
struct PowerCache {
    n: usize,
    powers: HashMap<(usize, u32), LambdaPolynomial>,
}

impl PowerCache {
    fn new(n: usize) -> Self {
        Self {
            n,
            powers: HashMap::new(),
        }
    }

    fn power(&mut self, k: usize, j: u32) -> LambdaPolynomial {
        if j == 0 {
            return LambdaPolynomial::one(self.n);
        }
        if let Some(p) = self.powers.get(&(k, j)) {
            return p.clone();
        }
        let p = self
            .power(k, j - 1)
            .mul(&LambdaPolynomial::elementary(self.n, k));
        self.powers.insert((k, j), p.clone());
        p
    }

    fn expand(&mut self, e: &[u32]) -> LambdaPolynomial {
        let mut acc = LambdaPolynomial::one(self.n);
        for (k, &j) in e.iter().enumerate() {
            if j > 0 {
                acc = acc.mul(&self.power(k + 1, j));
            }
        }
        acc
    }
}

/// Rewrites a symmetric polynomial in the σ-basis by repeatedly removing
/// the graded-lex leading monomial `c λ^a` with `c Π σ_k^{a_k - a_{k+1}}`.
pub fn reduce_to_sigma(poly: &LambdaPolynomial) -> Result<SigmaPolynomial> {
    if !poly.is_symmetric() {
        return Err(Error::NotSymmetricPolynomial);
    }
    let n = poly.n();
    let mut rest = poly.clone();
    let mut out = SigmaPolynomial::zero(n);
    let mut cache = PowerCache::new(n);
    while let Some((lead, c)) = rest.leading() {
        let (lead, c) = (lead.clone(), c.clone());
        if lead.windows(2).any(|w| w[0] < w[1]) {
            // The leading term of a symmetric polynomial is non-increasing.
            return Err(Error::NotSymmetricPolynomial);
        }
        let e: Vec<u32> = (0..n)
            .map(|k| lead[k] - if k + 1 < n { lead[k + 1] } else { 0 })
            .collect();
        rest = rest.sub(&cache.expand(&e).scale(&c));
        out.add_term(e, c);
    }
    Ok(out)
}

/// `Σ_{k=2}^n (-1)^k σ_1^{n-k} σ_k`.
pub fn closed_form_nminus1(n: usize) -> Result<SigmaPolynomial> {
    if n < 2 {
        return Err(Error::InvalidDimensions {
            n,
            p: n.saturating_sub(1),
            reason: "closed form needs n >= 2".into(),
        });
    }
    let mut p = SigmaPolynomial::zero(n);
    for k in 2..=n {
        let mut e = vec![0; n];
        e[0] = (n - k) as u32;
        e[k - 1] += 1;
        p.add_term(e, rational(if k % 2 == 0 { 1 } else { -1 }));
    }
    Ok(p)
}

pub fn eval_sigma(p: &SigmaPolynomial, lambda: &[BigRational]) -> BigRational {
    p.eval(lambda)
}

#[cfg(test)]
mod tests {
    use super::super::lambda::expand_mp;
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigRational> {
        v.iter().map(|&x| rational(x)).collect()
    }

    #[test]
    fn small_table_entries() {
        let r = reduce_to_sigma(&expand_mp(3, 2).unwrap()).unwrap();
        assert_eq!(r.to_canonical_string(), "σ1·σ2 − σ3");
        let r = reduce_to_sigma(&expand_mp(4, 3).unwrap()).unwrap();
        assert_eq!(r.to_canonical_string(), "σ1²·σ2 − σ1·σ3 + σ4");
        let r = reduce_to_sigma(&expand_mp(4, 2).unwrap()).unwrap();
        assert_eq!(r.to_canonical_string(), "−σ1²·σ4 + σ1·σ2·σ3 − σ3²");
        let r = reduce_to_sigma(&expand_mp(4, 2).unwrap()).unwrap();
        assert_eq!(r.weighted_degrees(), vec![6]);
    }

    #[test]
    fn closed_forms() {
        assert_eq!(
            closed_form_nminus1(3).unwrap().to_canonical_string(),
            "σ1·σ2 − σ3"
        );
        assert_eq!(
            closed_form_nminus1(5).unwrap().to_canonical_string(),
            "σ1³·σ2 − σ1²·σ3 + σ1·σ4 − σ5"
        );
        assert_eq!(
            closed_form_nminus1(4).unwrap(),
            reduce_to_sigma(&expand_mp(4, 3).unwrap()).unwrap()
        );
        assert!(closed_form_nminus1(1).is_err());
    }

    #[test]
    fn evaluation() {
        let r = reduce_to_sigma(&expand_mp(3, 2).unwrap()).unwrap();
        assert_eq!(eval_sigma(&r, &ints(&[3, 2, 1])), rational(60));
        assert_eq!(eval_sigma(&r, &ints(&[0, 0, 0])), rational(0));
        let r = reduce_to_sigma(&expand_mp(5, 2).unwrap()).unwrap();
        assert_eq!(eval_sigma(&r, &ints(&[1, 1, 1, 1, 1])), rational(1024));
    }

    #[test]
    fn rejects_non_symmetric() {
        let skew = LambdaPolynomial::linear_sum(3, &[1]);
        assert_eq!(reduce_to_sigma(&skew), Err(Error::NotSymmetricPolynomial));
    }

    #[test]
    fn rendering() {
        let mut p = SigmaPolynomial::zero(3);
        p.add_term(
            vec![0, 0, 1],
            BigRational::new(BigInt::from(-3), BigInt::from(2)),
        );
        p.add_term(vec![0, 0, 0], rational(2));
        p.add_term(vec![3, 0, 0], rational(-1));
        assert_eq!(p.to_canonical_string(), "2 − σ1³ − 3/2·σ3");
        assert_eq!(SigmaPolynomial::zero(2).to_canonical_string(), "0");
        assert_eq!(superscript(12), "¹²");
        let back = SigmaPolynomial::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn lambda_round_trip() {
        let m = expand_mp(4, 2).unwrap();
        assert_eq!(reduce_to_sigma(&m).unwrap().to_lambda(), m);
    }
}
