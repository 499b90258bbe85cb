//! Membership and sampling for the cone `P_p` of symmetric matrices whose
//! eigenvalue p-tuple sums are all positive.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{eigen_spectrum, min_tuple_sum, mp, SymMatrix, CONE_TOL};
use crate::ptuples::{binomial, check_dims, PTuple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConeStatus {
    StrictInterior,
    ClosureBoundary,
    Outside,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeReport {
    pub status: ConeStatus,
    /// Smallest eigenvalue p-tuple sum.
    pub margin: f64,
    /// Eigenvalue positions (decreasing order, 1-based) attaining the margin.
    pub witness: PTuple,
}

impl ConeReport {
    pub fn is_strict(&self) -> bool {
        self.status == ConeStatus::StrictInterior
    }
}

pub fn classify(margin: f64, scale: f64) -> ConeStatus {
    let tol = CONE_TOL * scale;
    if margin > tol {
        ConeStatus::StrictInterior
    } else if margin >= -tol {
        ConeStatus::ClosureBoundary
    } else {
        ConeStatus::Outside
    }
}

pub fn cone_report(a: &SymMatrix, p: usize) -> Result<ConeReport> {
    let s = eigen_spectrum(a);
    let (margin, witness) = min_tuple_sum(&s.values, p)?;
    Ok(ConeReport {
        status: classify(margin, a.scale()),
        margin,
        witness,
    })
}

/// Margin of a matrix (sum of its `p` smallest eigenvalues).
pub fn margin(a: &SymMatrix, p: usize) -> Result<f64> {
    Ok(cone_report(a, p)?.margin)
}

/// Random symmetric `B` with entries in `[-scale, scale]`, shifted by `t·I`
/// so the margin is at least `0.1 · scale`.
pub fn sample_cone(n: usize, p: usize, seed: u64, scale: f64) -> Result<SymMatrix> {
    check_dims(n, p)?;
    if !(scale > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "scale must be positive, got {scale}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = SymMatrix::from_upper(n, |_, _| rng.random_range(-scale..=scale))?;
    let m = margin(&b, p)?;
    let target = 0.1 * scale * (1.0 + 1e-6);
    let t = ((target - m) / p as f64).max(0.0) + rng.random_range(0.0..0.5) * scale;
    Ok(b.shifted(t))
}

/// Symmetric matrix whose off-diagonal entries vanish outside the first
/// row and column.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrowheadMatrix(SymMatrix);

impl ArrowheadMatrix {
    pub fn new(a: SymMatrix) -> Result<Self> {
        let n = a.n();
        for k in 1..n {
            for l in k + 1..n {
                if a.get(k, l) != 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "not an arrowhead matrix: entry ({k},{l}) is {}",
                        a.get(k, l)
                    )));
                }
            }
        }
        Ok(Self(a))
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrowheadSample {
    pub matrix: ArrowheadMatrix,
    /// `c > (2/n) M_p(A)^(1/n) C(n-1,p)`, the quantitative hypothesis of
    /// the arrowhead dominance bound.
    pub strong: bool,
}

/// Largest entry magnitude the arrowhead sampler will draw.
pub const ARROWHEAD_ENTRY_CAP: f64 = 1e3;
pub const ARROWHEAD_MAX_ATTEMPTS: usize = 10_000;

pub fn strong_threshold(a: &SymMatrix, p: usize) -> Result<f64> {
    let n = a.n();
    let m = mp(a, p)?.mp.max(0.0);
    Ok(2.0 / n as f64 * m.powf(1.0 / n as f64) * binomial(n - 1, p) as f64)
}

/// Rejection sampler for arrowhead matrices in `P_p` with `a_11 <= -c`.
///
/// The tail diagonal sits just above `c / (p - 1)` so the tuples through
/// index 1 stay barely positive; entries are capped at
/// [`ARROWHEAD_ENTRY_CAP`], which makes large `c` infeasible.
pub fn sample_arrowhead(n: usize, p: usize, c: f64, seed: u64) -> Result<ArrowheadSample> {
    check_dims(n, p)?;
    if n < 2 || !(c > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "arrowhead sampling needs n >= 2 and c > 0 (n={n}, c={c})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let floor = if p > 1 {
        c / (p - 1) as f64
    } else {
        ARROWHEAD_ENTRY_CAP
    };
    for _ in 0..ARROWHEAD_MAX_ATTEMPTS {
        let a11 = -c * (1.0 + rng.random_range(0.0..0.25));
        let need = if p > 1 { -a11 / (p - 1) as f64 } else { floor };
        let tail: Vec<f64> = (1..n)
            .map(|_| (need * (1.0 + rng.random_range(0.0..0.6))).min(ARROWHEAD_ENTRY_CAP))
            .collect();
        let off: Vec<f64> = (1..n).map(|_| rng.random_range(-0.25..0.25) * c).collect();
        let a = SymMatrix::from_upper(n, |k, l| match (k, l) {
            (0, 0) => a11,
            (0, l) => off[l - 1],
            (k, l) if k == l => tail[k - 1],
            _ => 0.0,
        })?;
        if !cone_report(&a, p)?.is_strict() {
            continue;
        }
        let strong = c > strong_threshold(&a, p)?;
        return Ok(ArrowheadSample {
            matrix: ArrowheadMatrix::new(a)?,
            strong,
        });
    }
    Err(Error::SamplerExhausted {
        n,
        p,
        c,
        attempts: ARROWHEAD_MAX_ATTEMPTS,
    })
}

/// `[[1, ε, ε], [ε, 1/ε, 1/ε - ε], [ε, 1/ε - ε, 1/ε]]`.
pub fn counterexample_matrix(eps: f64) -> Result<SymMatrix> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    let inv = 1.0 / eps;
    SymMatrix::from_rows(&[
        vec![1.0, eps, eps],
        vec![eps, inv, inv - eps],
        vec![eps, inv - eps, inv],
    ])
}

/// Determinant of the principal submatrix on 0-based `indices`.
pub fn principal_minor(a: &SymMatrix, indices: &[usize]) -> f64 {
    let k = indices.len();
    nalgebra::DMatrix::from_fn(k, k, |r, c| a.get(indices[r], indices[c])).determinant()
}

/// Sum of all `k × k` principal minors (`σ_k` of the spectrum).
pub fn sum_principal_minors(a: &SymMatrix, k: usize) -> Result<f64> {
    let table = crate::ptuples::enumerate_tuples(a.n(), k)?;
    Ok(table
        .tuples()
        .iter()
        .map(|t| {
            let idx: Vec<usize> = t.indices().iter().map(|i| i - 1).collect();
            principal_minor(a, &idx)
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ptuples::enumerate_tuples;

    #[test]
    fn report_examples() {
        for n in 1..=5 {
            for p in 1..=n {
                let r = cone_report(&SymMatrix::identity(n), p).unwrap();
                assert_eq!(r.status, ConeStatus::StrictInterior);
                assert!((r.margin - p as f64).abs() < 1e-12);
            }
        }
        let r = cone_report(&SymMatrix::diag(&[3.0, 2.0, 1.0]).unwrap(), 2).unwrap();
        assert!(r.is_strict());
        assert!((r.margin - 3.0).abs() < 1e-12);
        assert_eq!(r.witness.indices(), &[2, 3]);
        let r = cone_report(&SymMatrix::diag(&[1.0, 1.0, -2.0]).unwrap(), 2).unwrap();
        assert_eq!(r.status, ConeStatus::Outside);
        assert!((r.margin + 1.0).abs() < 1e-12);
        assert_eq!(r.witness.indices(), &[2, 3]);
        let r = cone_report(&SymMatrix::diag(&[1.0, 1.0, -1.0]).unwrap(), 2).unwrap();
        assert_eq!(r.status, ConeStatus::ClosureBoundary);
    }

    #[test]
    fn margin_matches_brute_force_tuple_sums() {
        for seed in 0..40u64 {
            for n in 1..=6 {
                for p in 1..=n {
                    let a = SymMatrix::from_upper(n, |k, l| {
                        (((seed as usize + 3) * (k + 1) * 7 + (l + 2) * 13) % 17) as f64 - 8.0
                    })
                    .unwrap();
                    let vals = eigen_spectrum(&a).values;
                    let table = enumerate_tuples(n, p).unwrap();
                    let brute = table
                        .tuples()
                        .iter()
                        .map(|t| t.sum_of(&vals))
                        .fold(f64::INFINITY, f64::min);
                    let r = cone_report(&a, p).unwrap();
                    assert!((brute - r.margin).abs() < 1e-12 * a.scale());
                    assert!((r.witness.sum_of(&vals) - r.margin).abs() < 1e-12 * a.scale());
                }
            }
        }
    }

    #[test]
    fn sampler_is_deterministic_and_inside() {
        let a = sample_cone(4, 2, 9, 1.0).unwrap();
        assert_eq!(a, sample_cone(4, 2, 9, 1.0).unwrap());
        assert_ne!(a, sample_cone(4, 2, 10, 1.0).unwrap());
        for seed in 0..100 {
            let a = sample_cone(5, 3, seed, 2.0).unwrap();
            let r = cone_report(&a, 3).unwrap();
            assert!(r.is_strict());
            assert!(r.margin >= 0.1 * 2.0);
        }
        assert!(sample_cone(3, 2, 0, 0.0).is_err());
    }

    #[test]
    fn arrowhead_sampler() {
        let s = sample_arrowhead(3, 2, 1.0, 1).unwrap();
        let a = s.matrix.matrix();
        assert!(a.get(0, 0) <= -1.0);
        assert_eq!(a.get(1, 2), 0.0);
        assert!(cone_report(a, 2).unwrap().is_strict());
        if s.strong {
            assert!(1.0 > strong_threshold(a, 2).unwrap());
        }
        assert_eq!(s, sample_arrowhead(3, 2, 1.0, 1).unwrap());
        assert!(matches!(
            sample_arrowhead(4, 2, 1e6, 1),
            Err(Error::SamplerExhausted { .. })
        ));
        // Convex matrices have no negative diagonal entries.
        assert!(matches!(
            sample_arrowhead(3, 1, 1.0, 1),
            Err(Error::SamplerExhausted { .. })
        ));
    }

    #[test]
    fn counterexample_values() {
        let a = counterexample_matrix(0.1).unwrap();
        assert!((principal_minor(&a, &[1, 2]) - 1.99).abs() < 1e-12);
        assert!((principal_minor(&a, &[0]) - 1.0).abs() < 1e-15);
        assert!((principal_minor(&a, &[0, 1]) - 9.99).abs() < 1e-12);
        assert!((a.as_matrix().determinant() - 1.988).abs() < 1e-12);
        assert!(cone_report(&a, 1).unwrap().is_strict());

        let ratio = |eps: f64| {
            let a = counterexample_matrix(eps).unwrap();
            principal_minor(&a, &[1, 2]) / sum_principal_minors(&a, 2).unwrap()
        };
        assert!(ratio(0.01) < ratio(0.1) / 5.0);
        assert!(ratio(0.01) < 0.01);
        assert!(counterexample_matrix(1.5).is_err());
    }
}
