use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::ptuples::{check_dims, enumerate_tuples};

/// Largest dimension `expand_mp` accepts.
pub const EXPANSION_CAP: usize = 6;

/// Polynomial in `λ_1..λ_n` with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaPolynomial {
    pub(crate) n: usize,
    pub(crate) terms: BTreeMap<Vec<u32>, BigRational>,
}

impl LambdaPolynomial {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(n: usize) -> Self {
        Self::monomial(n, vec![0; n], BigRational::one())
    }

    pub fn monomial(n: usize, exponents: Vec<u32>, coeff: BigRational) -> Self {
        let mut p = Self::zero(n);
        p.add_term(exponents, coeff);
        p
    }

    /// `λ_{i1} + … + λ_{ik}` for 1-based `indices`.
    pub fn linear_sum(n: usize, indices: &[usize]) -> Self {
        let mut p = Self::zero(n);
        for &i in indices {
            let mut e = vec![0; n];
            e[i - 1] = 1;
            p.add_term(e, BigRational::one());
        }
        p
    }

    /// Elementary symmetric polynomial `σ_k` in `n` variables.
    pub fn elementary(n: usize, k: usize) -> Self {
        if k == 0 {
            return Self::one(n);
        }
        let mut p = Self::zero(n);
        if k > n {
            return p;
        }
        let table = enumerate_tuples(n, k).expect("1 <= k <= n");
        for t in table.tuples() {
            let mut e = vec![0; n];
            for &i in t.indices() {
                e[i - 1] = 1;
            }
            p.add_term(e, BigRational::one());
        }
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, BigRational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, exponents: Vec<u32>, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(exponents) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut acc: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                *acc.entry(e).or_insert_with(BigRational::zero) += ca * cb;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Self {
            n: self.n,
            terms: acc,
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.n);
        }
        Self {
            n: self.n,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    /// Permutes variables: `λ_i` becomes `λ_{perm[i]}` (0-based).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            let mut f = vec![0; self.n];
            for (i, &x) in e.iter().enumerate() {
                f[perm[i]] = x;
            }
            out.add_term(f, c.clone());
        }
        out
    }

    /// Invariance under the transposition `(1 2)` and the cycle
    /// `(1 2 … n)`, which generate the symmetric group.
    pub fn is_symmetric(&self) -> bool {
        let n = self.n;
        if n < 2 {
            return true;
        }
        let mut swap: Vec<usize> = (0..n).collect();
        swap.swap(0, 1);
        let cycle: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        self.permuted(&swap) == *self && self.permuted(&cycle) == *self
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn is_homogeneous(&self, degree: u32) -> bool {
        self.terms.keys().all(|e| e.iter().sum::<u32>() == degree)
    }

    /// Leading monomial in graded lexicographic order.
    pub fn leading(&self) -> Option<(&Vec<u32>, &BigRational)> {
        self.terms.iter().max_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            da.cmp(&db).then_with(|| a.cmp(b))
        })
    }

    pub fn eval(&self, lambda: &[BigRational]) -> BigRational {
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (x, &k) in lambda.iter().zip(e) {
                if k > 0 {
                    term *= num_traits::pow(x.clone(), k as usize);
                }
            }
            acc += term;
        }
        acc
    }
}

pub fn rational(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Exact expansion of `Π_α (Σ_{i∈α} λ_i)` over increasing p-tuples.
pub fn expand_mp(n: usize, p: usize) -> Result<LambdaPolynomial> {
    check_dims(n, p)?;
    if n > EXPANSION_CAP {
        return Err(Error::ExpansionTooLarge {
            n,
            cap: EXPANSION_CAP,
        });
    }
    let table = enumerate_tuples(n, p)?;
    Ok(table
        .tuples()
        .iter()
        .fold(LambdaPolynomial::one(n), |acc, t| {
            acc.mul(&LambdaPolynomial::linear_sum(n, t.indices()))
        }))
}
