//! Uniform box grids and node fields.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::SymMatrix;

/// Geometry of a uniform axis-aligned box grid. Axis 0 varies fastest in
/// the linear node order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    lower: Vec<f64>,
    upper: Vec<f64>,
    shape: Vec<usize>,
    h: f64,
    #[serde(skip)]
    strides: Vec<usize>,
}

impl Grid {
    pub fn new(lower: &[f64], upper: &[f64], shape: &[usize]) -> Result<Self> {
        let n = shape.len();
        if !(2..=3).contains(&n) || lower.len() != n || upper.len() != n {
            return Err(Error::InvalidProblem(format!(
                "grid needs 2 or 3 axes with matching bounds, got shape {shape:?}"
            )));
        }
        let mut spacing = Vec::with_capacity(n);
        for k in 0..n {
            if shape[k] < 3 {
                return Err(Error::InvalidProblem(format!(
                    "axis {k} needs at least 3 nodes"
                )));
            }
            if !(lower[k].is_finite() && upper[k].is_finite() && lower[k] < upper[k]) {
                return Err(Error::InvalidProblem(format!("axis {k} has bad bounds")));
            }
            spacing.push((upper[k] - lower[k]) / (shape[k] - 1) as f64);
        }
        let h = spacing[0];
        if spacing.iter().any(|s| (s - h).abs() > 1e-9 * h) {
            return Err(Error::InvalidProblem(format!(
                "spacing is not uniform: {spacing:?}"
            )));
        }
        let mut strides = vec![1; n];
        for k in 1..n {
            strides[k] = strides[k - 1] * shape[k - 1];
        }
        Ok(Self {
            lower: lower.to_vec(),
            upper: upper.to_vec(),
            shape: shape.to_vec(),
            h,
            strides,
        })
    }

    /// The cube `[lo, hi]^n` with `m` nodes per axis.
    pub fn cube(n: usize, lo: f64, hi: f64, m: usize) -> Result<Self> {
        Self::new(&vec![lo; n], &vec![hi; n], &vec![m; n])
    }

    pub fn n(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn multi_index(&self, node: usize) -> Vec<usize> {
        let mut rest = node;
        self.shape
            .iter()
            .map(|&m| {
                let i = rest % m;
                rest /= m;
                i
            })
            .collect()
    }

    pub fn node(&self, index: &[usize]) -> usize {
        index.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn coords(&self, node: usize) -> Vec<f64> {
        self.multi_index(node)
            .iter()
            .enumerate()
            .map(|(k, &i)| self.lower[k] + i as f64 * self.h)
            .collect()
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.multi_index(node)
            .iter()
            .zip(&self.shape)
            .any(|(&i, &m)| i == 0 || i + 1 == m)
    }

    /// Index distance to the nearest boundary face.
    pub fn depth(&self, node: usize) -> usize {
        self.multi_index(node)
            .iter()
            .zip(&self.shape)
            .map(|(&i, &m)| i.min(m - 1 - i))
            .min()
            .unwrap_or(0)
    }

    pub fn boundary_mask(&self) -> Vec<bool> {
        (0..self.len()).map(|i| self.is_boundary(i)).collect()
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.is_boundary(i)).collect()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }
}

/// Node values on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: Grid,
    boundary: Vec<bool>,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidProblem(format!(
                "non-finite value at node {:?}",
                grid.multi_index(i)
            )));
        }
        let boundary = grid.boundary_mask();
        Ok(Self {
            grid,
            boundary,
            values,
        })
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(&grid.coords(i))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.boundary[node]
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    pub fn get(&self, node: usize) -> f64 {
        self.values[node]
    }

    pub fn check_same_grid(&self, other: &GridField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "shape {:?} on {:?}..{:?} vs shape {:?} on {:?}..{:?}",
                self.grid.shape,
                self.grid.lower,
                self.grid.upper,
                other.grid.shape,
                other.grid.lower,
                other.grid.upper
            )));
        }
        Ok(())
    }

    pub fn sup_diff(&self, other: &GridField) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs())))
    }

    fn interior_check(&self, node: usize) -> Result<()> {
        if self.boundary[node] {
            return Err(Error::Stencil {
                node: self.grid.multi_index(node),
            });
        }
        Ok(())
    }

    /// Central-difference gradient at an interior node.
    pub fn fd_gradient(&self, node: usize) -> Result<Vec<f64>> {
        self.interior_check(node)?;
        let h = self.grid.h;
        Ok((0..self.grid.n())
            .map(|k| {
                let s = self.grid.strides[k];
                (self.values[node + s] - self.values[node - s]) / (2.0 * h)
            })
            .collect())
    }
}

/// Finite-difference Hessian at an interior node: second central
/// differences on the diagonal and the four-point cross formula off it.
pub fn fd_hessian(u: &GridField, node: usize) -> Result<SymMatrix> {
    u.interior_check(node)?;
    let g = &u.grid;
    let v = &u.values;
    let h2 = g.h * g.h;
    let n = g.n();
    SymMatrix::from_upper(n, |k, l| {
        let sk = g.strides[k];
        if k == l {
            (v[node + sk] - 2.0 * v[node] + v[node - sk]) / h2
        } else {
            let sl = g.strides[l];
            (v[node + sk + sl] + v[node - sk - sl] - v[node + sk - sl] - v[node - sk + sl])
                / (4.0 * h2)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_round_trips() {
        let g = Grid::new(&[0.0, -1.0, 2.0], &[1.0, 0.5, 2.5], &[5, 7, 3]).unwrap();
        assert_eq!(g.h(), 0.25);
        for node in 0..g.len() {
            assert_eq!(g.node(&g.multi_index(node)), node);
        }
        assert_eq!(g.coords(g.node(&[4, 6, 2])), vec![1.0, 0.5, 2.5]);
        assert_eq!(g.interior_nodes().len(), 3 * 5);
        assert_eq!(g.depth(g.node(&[2, 3, 1])), 1);
    }

    #[test]
    fn rejects_nonuniform_spacing() {
        assert!(Grid::new(&[0.0, 0.0], &[1.0, 2.0], &[5, 5]).is_err());
        assert!(Grid::new(&[0.0], &[1.0], &[5]).is_err());
        assert!(Grid::new(&[0.0, 0.0], &[1.0, 1.0], &[2, 2]).is_err());
    }

    #[test]
    fn hessian_is_exact_on_quadratics() {
        let g = Grid::cube(2, 0.0, 1.0, 9).unwrap();
        let u = GridField::from_fn(g.clone(), |x| x[0] * x[0] + x[1] * x[1]).unwrap();
        let node = g.node(&[3, 5]);
        let h = fd_hessian(&u, node).unwrap();
        assert!((h.get(0, 0) - 2.0).abs() < 1e-12 && (h.get(1, 1) - 2.0).abs() < 1e-12);
        assert!(h.get(0, 1).abs() < 1e-12);

        let u = GridField::from_fn(g.clone(), |x| x[0] * x[1]).unwrap();
        let h = fd_hessian(&u, node).unwrap();
        assert!((h.get(0, 1) - 1.0).abs() < 1e-12 && h.get(0, 0).abs() < 1e-12);
    }

    #[test]
    fn hessian_of_quartic_has_second_order_error() {
        let g = Grid::new(&[0.0, 0.0], &[1.0, 1.0], &[101, 101]).unwrap();
        let u = GridField::from_fn(g.clone(), |x| x[0].powi(4)).unwrap();
        let h = fd_hessian(&u, g.node(&[50, 50])).unwrap();
        // Taylor remainder is h²·u''''/12 = 2e-4.
        assert!((h.get(0, 0) - 3.0).abs() < 1e-3);
        assert!((h.get(0, 0) - 3.0 - 2e-4).abs() < 1e-9);
    }

    #[test]
    fn boundary_nodes_are_refused() {
        let g = Grid::cube(3, 0.0, 1.0, 5).unwrap();
        let u = GridField::from_fn(g.clone(), |_| 0.0).unwrap();
        let err = fd_hessian(&u, g.node(&[0, 2, 2])).unwrap_err();
        assert_eq!(
            err,
            Error::Stencil {
                node: vec![0, 2, 2]
            }
        );
    }
}
