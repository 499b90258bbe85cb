use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Dense real symmetric matrix with finite entries.
///
/// Indices are 0-based. Symmetry is exact: construction either verifies it
/// or copies the upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Accepts only exactly symmetric, finite input.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let n = m.nrows();
        for k in 0..n {
            for l in 0..n {
                if !m[(k, l)].is_finite() {
                    return Err(Error::NonFinite { row: k, col: l });
                }
                if l > k && m[(k, l)] != m[(l, k)] {
                    return Err(Error::NotSymmetric { row: k, col: l });
                }
            }
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |k, l| rows[k][l]))
    }

    /// Builds from the upper triangle of `f(k, l)`, `k <= l`.
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut m = DMatrix::zeros(n, n);
        for k in 0..n {
            for l in k..n {
                let v = f(k, l);
                m[(k, l)] = v;
                m[(l, k)] = v;
            }
        }
        Self::new(m)
    }

    /// Replaces `m` by `(m + mᵀ) / 2`.
    pub fn symmetrize(m: &DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        Self::from_upper(m.nrows(), |k, l| 0.5 * (m[(k, l)] + m[(l, k)]))
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(
            &nalgebra::DVector::from_column_slice(values),
        ))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.0[(k, l)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    /// `1 + max |a_kl|`, the reference magnitude for relative tolerances.
    pub fn scale(&self) -> f64 {
        1.0 + self.0.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self(&self.0 * t)
    }

    pub fn add(&self, other: &SymMatrix) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn shifted(&self, t: f64) -> Self {
        let mut m = self.0.clone();
        for k in 0..self.n() {
            m[(k, k)] += t;
        }
        Self(m)
    }

    /// `Qᵀ A Q`.
    pub fn congruence(&self, q: &DMatrix<f64>) -> Result<Self> {
        Self::symmetrize(&(q.transpose() * &self.0 * q))
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.n();
        (0..n).all(|k| (0..n).all(|l| k == l || self.0[(k, l)] == 0.0))
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n()).map(|k| self.0[(k, k)]).collect()
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> f64 {
        let s = eigen_spectrum(self);
        s.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }
}

/// Eigenvalues in decreasing order with the matching orthonormal frame
/// (eigenvectors as columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub frame: DMatrix<f64>,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// `frame · diag(values) · frameᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.values));
        &self.frame * d * self.frame.transpose()
    }
}

pub fn eigen_spectrum(a: &SymMatrix) -> Spectrum {
    let n = a.n();
    let eig = SymmetricEigen::new(a.as_matrix().clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .expect("finite eigenvalues")
            .then(i.cmp(&j))
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let frame = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Spectrum { values, frame }
}
