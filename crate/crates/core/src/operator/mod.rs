//! The operator `M_p(A) = Π (λ_{i1} + … + λ_{ip})` over increasing
//! p-tuples, evaluated by two independent routes: the spectral product and
//! the determinant of the derivation matrix `D_A` on `Λ^p R^n`.

mod derivation;
mod matrix;

pub use derivation::{
    build_derivation, mp_via_determinant, sign_convention_holds, DerivationMatrix,
    DerivationPattern, Feed, DISPLAYED_N3, DISPLAYED_N4,
};
pub use matrix::{eigen_spectrum, Spectrum, SymMatrix};

use crate::error::{Error, Result};
use crate::ptuples::{binomial, check_dims, enumerate_tuples, PTuple};

/// Relative cone tolerance; multiplied by [`SymMatrix::scale`].
pub const CONE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorValue {
    pub mp: f64,
    /// `mp^(1 / C(n,p))`, present iff `mp >= 0`.
    pub tilde: Option<f64>,
}

impl OperatorValue {
    fn from_mp(mp: f64, n: usize, p: usize) -> Self {
        let degree = binomial(n, p) as f64;
        let tilde = (mp >= 0.0).then(|| mp.powf(1.0 / degree));
        Self { mp, tilde }
    }
}

pub fn mp_from_values(values: &[f64], p: usize) -> Result<OperatorValue> {
    let n = values.len();
    check_dims(n, p)?;
    let table = enumerate_tuples(n, p)?;
    let mp = table.tuples().iter().map(|t| t.sum_of(values)).product();
    Ok(OperatorValue::from_mp(mp, n, p))
}

pub fn mp_from_spectrum(s: &Spectrum, p: usize) -> Result<OperatorValue> {
    mp_from_values(&s.values, p)
}

/// Spectral-route evaluation of `M_p(A)`.
pub fn mp(a: &SymMatrix, p: usize) -> Result<OperatorValue> {
    mp_from_spectrum(&eigen_spectrum(a), p)
}

/// Smallest tuple sum of decreasing `values`: the last `p` entries, with
/// the witness tuple `(n-p+1, …, n)`.
pub fn min_tuple_sum(values: &[f64], p: usize) -> Result<(f64, PTuple)> {
    let n = values.len();
    check_dims(n, p)?;
    debug_assert!(values.windows(2).all(|w| w[0] >= w[1]));
    let margin = values[n - p..].iter().sum();
    let witness = PTuple::new((n - p + 1..=n).collect(), n)?;
    Ok((margin, witness))
}

/// `M_p(A)^(1/C(n,p))` on the closed cone.
pub fn tilde_mp(a: &SymMatrix, p: usize) -> Result<OperatorValue> {
    let s = eigen_spectrum(a);
    let (margin, witness) = min_tuple_sum(&s.values, p)?;
    if margin < -CONE_TOL * a.scale() {
        return Err(Error::ConeViolation {
            tuple: witness.indices().to_vec(),
            margin,
        });
    }
    let mut v = mp_from_spectrum(&s, p)?;
    // Inside the tolerance band a product of tiny sums may round negative.
    let clamped = v.mp.max(0.0);
    v.tilde = Some(clamped.powf(1.0 / binomial(a.n(), p) as f64));
    Ok(v)
}
