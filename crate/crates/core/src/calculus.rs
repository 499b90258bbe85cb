//! First and second derivatives of `M_p` with respect to matrix entries.
//!
//! Off-diagonal coordinates `a_{kl}` and `a_{lk}` are treated as
//! independent, so a symmetric perturbation `a_{kl} = a_{lk} = t` changes
//! `M_p` at rate `M^{kl} + M^{lk} = 2 M^{kl}`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::operator::{
    build_derivation, eigen_spectrum, min_tuple_sum, mp_from_values, DerivationMatrix, SymMatrix,
    CONE_TOL,
};
use crate::ptuples::{binomial, check_dims, enumerate_tuples, TupleTable};

/// `M^{kl} = ∂M_p / ∂a_{kl}`, 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientMatrix {
    pub n: usize,
    pub p: usize,
    pub entries: DMatrix<f64>,
}

impl GradientMatrix {
    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.entries[(k, l)]
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    /// `Σ_{kl} M^{kl} a_{kl}`.
    pub fn contract(&self, a: &SymMatrix) -> f64 {
        self.entries.component_mul(a.as_matrix()).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let sym = 0.5 * (&self.entries + self.entries.transpose());
        SymmetricEigen::new(sym).eigenvalues.min()
    }
}

/// Second derivatives at a diagonal point, keyed by `(k, l, r, s)` 0-based.
///
/// Only the `(kk, rr)` and `(kl, lk)` patterns can be nonzero there.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianTensor {
    pub n: usize,
    pub p: usize,
    pub entries: BTreeMap<(usize, usize, usize, usize), f64>,
}

impl HessianTensor {
    pub fn get(&self, k: usize, l: usize, r: usize, s: usize) -> f64 {
        self.entries.get(&(k, l, r, s)).copied().unwrap_or(0.0)
    }
}

fn tuple_sums(values: &[f64], table: &TupleTable) -> Vec<f64> {
    table.tuples().iter().map(|t| t.sum_of(values)).collect()
}

fn hazard_check(values: &[f64], sums: &[f64], table: &TupleTable) -> Result<()> {
    let scale = 1.0 + values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    for (t, &s) in table.tuples().iter().zip(sums) {
        if s.abs() <= 1e-12 * scale {
            return Err(Error::DivisionHazard {
                tuple: t.indices().to_vec(),
                sum: s,
            });
        }
    }
    Ok(())
}

/// `M^{kk} = M_p · Σ_{α ∋ k} 1 / S_α` at `diag(λ)`.
pub fn grad_mp_diagonal(lambda: &[f64], p: usize) -> Result<GradientMatrix> {
    let n = lambda.len();
    check_dims(n, p)?;
    let table = enumerate_tuples(n, p)?;
    let sums = tuple_sums(lambda, &table);
    hazard_check(lambda, &sums, &table)?;
    let m: f64 = sums.iter().product();
    let mut entries = DMatrix::zeros(n, n);
    for k in 0..n {
        entries[(k, k)] = m * table
            .containing(k + 1)
            .iter()
            .map(|&r| 1.0 / sums[r])
            .sum::<f64>();
    }
    Ok(GradientMatrix { n, p, entries })
}

/// Adjugate (transposed cofactor matrix) of a symmetric matrix.
///
/// Uses `det · D^{-1}` from a full-pivoting LU when the pivots are well
/// separated from zero, otherwise the eigen form
/// `Q diag(Π_{j≠i} μ_j) Qᵀ`, which stays exact at singular points.
pub fn adjugate(d: &DMatrix<f64>) -> DMatrix<f64> {
    let dim = d.nrows();
    if dim == 1 {
        return DMatrix::from_element(1, 1, 1.0);
    }
    let lu = d.clone().full_piv_lu();
    let pivots = lu.u().diagonal();
    let max_pivot = pivots.amax();
    let min_pivot = pivots.iter().fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
    if max_pivot > 0.0 && min_pivot > 1e-8 * max_pivot {
        if let Some(inv) = lu.try_inverse() {
            return inv * lu.determinant();
        }
    }
    let eig = SymmetricEigen::new(0.5 * (d + d.transpose()));
    let mu = &eig.eigenvalues;
    let weights: Vec<f64> = (0..dim)
        .map(|i| (0..dim).filter(|&j| j != i).map(|j| mu[j]).product())
        .collect();
    let q = &eig.eigenvectors;
    DMatrix::from_fn(dim, dim, |r, c| {
        (0..dim).map(|i| q[(r, i)] * weights[i] * q[(c, i)]).sum()
    })
}

/// Chain rule through `A -> D_A`: each feed contributes
/// `cofactor(row, col) · sign` to `M^{kl}`.
pub fn grad_from_derivation(d: &DerivationMatrix) -> GradientMatrix {
    let n = d.n();
    let adj = adjugate(d.entries());
    let mut entries = DMatrix::zeros(n, n);
    for f in d.pattern().feeds() {
        // cofactor(row, col) = adj(col, row)
        entries[(f.k, f.l)] += f64::from(f.sign) * adj[(f.col, f.row)];
    }
    GradientMatrix {
        n,
        p: d.p(),
        entries,
    }
}

pub fn grad_mp_adjugate(a: &SymMatrix, p: usize) -> Result<GradientMatrix> {
    Ok(grad_from_derivation(&build_derivation(a, p)?))
}

/// Diagonal-point second derivatives.
///
/// `(kk, rr)`: `M_p Σ_{α∋k, β∋r, α≠β} 1/(S_α S_β)`.
/// `(kl, lk)`, `k ≠ l`: `-M_p Σ 1/(S_α S_β)` over `α ∋ k`, `l ∉ α`,
/// `β = α \ {k} ∪ {l}`.
pub fn hess_mp_diagonal(lambda: &[f64], p: usize) -> Result<HessianTensor> {
    let n = lambda.len();
    check_dims(n, p)?;
    let table = enumerate_tuples(n, p)?;
    let sums = tuple_sums(lambda, &table);
    hazard_check(lambda, &sums, &table)?;
    let m: f64 = sums.iter().product();
    let mut entries = BTreeMap::new();
    for k in 0..n {
        for r in 0..n {
            let mut acc = 0.0;
            for &a in table.containing(k + 1) {
                for &b in table.containing(r + 1) {
                    if a != b {
                        acc += 1.0 / (sums[a] * sums[b]);
                    }
                }
            }
            entries.insert((k, k, r, r), m * acc);
        }
    }
    for k in 0..n {
        for l in 0..n {
            if k == l {
                continue;
            }
            let mut acc = 0.0;
            for &a in table.containing(k + 1) {
                let alpha = table.get(a);
                if alpha.contains(l + 1) {
                    continue;
                }
                let mut beta: Vec<usize> = alpha
                    .indices()
                    .iter()
                    .copied()
                    .filter(|&i| i != k + 1)
                    .chain(std::iter::once(l + 1))
                    .collect();
                beta.sort_unstable();
                let b = table.rank(&crate::ptuples::PTuple::new(beta, n)?)?;
                acc += 1.0 / (sums[a] * sums[b]);
            }
            if acc != 0.0 {
                entries.insert((k, l, l, k), -m * acc);
            }
        }
    }
    Ok(HessianTensor { n, p, entries })
}

/// `Σ M^{kl} a_{kl} - C(n,p) M_p`, zero by degree-`C(n,p)` homogeneity.
pub fn euler_residual(a: &SymMatrix, p: usize) -> Result<f64> {
    let d = build_derivation(a, p)?;
    let g = grad_from_derivation(&d);
    let m = crate::operator::mp_via_determinant(&d);
    Ok(g.contract(a) - binomial(a.n(), p) as f64 * m)
}

/// Gradient of `M_p^(1/C(n,p))` on the open cone.
pub fn grad_tilde_mp(a: &SymMatrix, p: usize) -> Result<GradientMatrix> {
    let s = eigen_spectrum(a);
    let (margin, witness) = min_tuple_sum(&s.values, p)?;
    if margin <= CONE_TOL * a.scale() {
        return Err(Error::ConeViolation {
            tuple: witness.indices().to_vec(),
            margin,
        });
    }
    let m = mp_from_values(&s.values, p)?.mp;
    let g = grad_mp_adjugate(a, p)?;
    Ok(tilde_chain(g, m))
}

/// `ṼM^{kl} = (1/N) M^(1/N - 1) M^{kl}`, `N = C(n,p)`.
pub fn tilde_chain(mut g: GradientMatrix, m: f64) -> GradientMatrix {
    let degree = binomial(g.n, g.p) as f64;
    let factor = m.powf(1.0 / degree - 1.0) / degree;
    g.entries *= factor;
    g
}
