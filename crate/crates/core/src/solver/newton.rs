//! Damped Newton iteration for `ṼM_p(D²_h u) = f̃(x, u)` at interior nodes.

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use serde::Serialize;

use super::grid::{fd_hessian, Grid, GridField};
use super::problem::DirichletProblem;
use crate::calculus::{grad_mp_adjugate, tilde_chain, GradientMatrix};
use crate::error::{Error, Result};
use crate::operator::{eigen_spectrum, mp_from_values, SymMatrix};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Residual sup-norm target; `None` means `1e-8 · max(1, sup f̃)`.
    pub tol: Option<f64>,
    pub max_iter: usize,
    pub backtrack: f64,
    pub min_step: f64,
    /// Relative cone margin: every node Hessian `H` keeps
    /// `margin(H) ≥ margin · H.scale()`.
    pub margin: f64,
    /// Starting amplitude `A` of the initial bump.
    pub init_amplitude: f64,
    /// The barrier solves with the constant source `barrier_factor · f0`.
    pub barrier_factor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: None,
            max_iter: 50,
            backtrack: 0.5,
            min_step: 1e-6,
            margin: 1e-8,
            init_amplitude: 1.0,
            barrier_factor: 0.1,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return bad("tol must be positive");
            }
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad("backtrack must lie in (0, 1)");
        }
        if !(self.min_step > 0.0 && self.min_step <= 1.0) {
            return bad("min_step must lie in (0, 1]");
        }
        if !(self.margin >= 0.0) {
            return bad("margin must be non-negative");
        }
        if !(self.init_amplitude > 0.0) {
            return bad("init_amplitude must be positive");
        }
        if !(self.barrier_factor > 0.0 && self.barrier_factor < 1.0) {
            return bad("barrier_factor must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverReport {
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    pub tolerance: f64,
    /// Smallest `margin(H_i)` over interior nodes of the returned field.
    pub min_margin: f64,
    /// Residual sup-norm of the initial guess and of each accepted iterate.
    pub history: Vec<f64>,
    /// Accepted step lengths.
    pub steps: Vec<f64>,
    /// Bump amplitude of the admissible initial guess.
    pub init_amplitude: f64,
}

/// Residual and cone data of one field.
struct State {
    residual: Vec<f64>,
    sup: f64,
    min_margin: f64,
}

/// Why a field was rejected by [`evaluate`].
enum Reject {
    Breach { node: usize, margin: f64 },
    Err(Error),
}

impl From<Error> for Reject {
    fn from(e: Error) -> Self {
        Reject::Err(e)
    }
}

struct NodeValue {
    tilde: f64,
    mp: f64,
    margin: f64,
    hessian: SymMatrix,
}

fn node_value(u: &GridField, node: usize, p: usize) -> Result<NodeValue> {
    let hessian = fd_hessian(u, node)?;
    let spec = eigen_spectrum(&hessian);
    let n = spec.values.len();
    let margin = spec.values[n - p..].iter().sum();
    let mp = mp_from_values(&spec.values, p)?.mp;
    let degree = crate::ptuples::binomial(n, p) as f64;
    Ok(NodeValue {
        tilde: mp.max(0.0).powf(1.0 / degree),
        mp,
        margin,
        hessian,
    })
}

/// Residual at every interior node, rejecting nodes whose margin is below
/// `floor · H.scale()`.
fn evaluate(
    u: &GridField,
    prob: &DirichletProblem,
    interior: &[usize],
    floor: f64,
) -> std::result::Result<State, Reject> {
    let grid = u.grid();
    let mut residual = Vec::with_capacity(interior.len());
    let mut sup = 0.0f64;
    let mut min_margin = f64::INFINITY;
    for &node in interior {
        let v = node_value(u, node, prob.p)?;
        if v.margin < floor * v.hessian.scale() {
            return Err(Reject::Breach {
                node,
                margin: v.margin,
            });
        }
        let (ft, _) = prob.tilde_source(&grid.coords(node), u.get(node));
        let r = v.tilde - ft;
        sup = sup.max(r.abs());
        min_margin = min_margin.min(v.margin);
        residual.push(r);
    }
    Ok(State {
        residual,
        sup,
        min_margin,
    })
}

/// `ṼM_p(D²_h u)(x_i) − f̃(x_i, u_i)` over interior nodes in grid order.
/// Nodes may sit at most `1e-8 · H.scale()` outside the closed cone.
pub fn assemble_residual(u: &GridField, prob: &DirichletProblem) -> Result<Vec<f64>> {
    if u.grid() != &prob.grid {
        return Err(Error::GridMismatch("field and problem grids differ".into()));
    }
    let interior = prob.grid.interior_nodes();
    match evaluate(u, prob, &interior, -SolverConfig::default().margin) {
        Ok(s) => Ok(s.residual),
        Err(Reject::Breach { node, margin }) => Err(Error::ConeBreach {
            node: u.grid().multi_index(node),
            margin,
        }),
        Err(Reject::Err(e)) => Err(e),
    }
}

fn boundary_field(prob: &DirichletProblem) -> Result<GridField> {
    GridField::from_fn(prob.grid.clone(), |x| prob.boundary.eval(x))
}

/// Convex bump vanishing on the whole box boundary,
/// `−(Π_k (r_k² − (x_k − c_k)²) / r_k²)^(1/(n+2))`.
///
/// The plain paraboloid `|x − x_c|² − R²` is nonzero on the faces, and the
/// jump it leaves at corner-adjacent nodes makes the cross-stencil Hessian
/// indefinite in 3D for every amplitude. The product form vanishes on the
/// boundary; an exponent of `1/(n+2)` keeps its FD Hessian positive
/// definite up to the edge nodes.
pub fn boundary_bump(grid: &Grid, x: &[f64]) -> f64 {
    let n = grid.n();
    let prod: f64 = (0..n)
        .map(|k| {
            let r = 0.5 * (grid.upper()[k] - grid.lower()[k]);
            let c = 0.5 * (grid.upper()[k] + grid.lower()[k]);
            ((r * r - (x[k] - c) * (x[k] - c)) / (r * r)).max(0.0)
        })
        .product();
    -prod.powf(1.0 / (n as f64 + 2.0))
}

/// `ψ + A·bump` at interior nodes and `ψ` on the boundary, with `A`
/// doubled from `cfg.init_amplitude` until every node Hessian clears the
/// margin and `ṼM_p ≥ f̃` (a discrete supersolution).
pub fn initial_guess(prob: &DirichletProblem, cfg: &SolverConfig) -> Result<(GridField, f64)> {
    let grid = &prob.grid;
    let psi = boundary_field(prob)?;
    let bump: Vec<f64> = (0..grid.len())
        .map(|i| {
            if grid.is_boundary(i) {
                0.0
            } else {
                boundary_bump(grid, &grid.coords(i))
            }
        })
        .collect();
    let interior = grid.interior_nodes();
    let mut amp = cfg.init_amplitude;
    for _ in 0..80 {
        let values = psi
            .values()
            .iter()
            .zip(&bump)
            .map(|(p, b)| p + amp * b)
            .collect();
        let u = GridField::new(grid.clone(), values)?;
        if let Ok(state) = evaluate(&u, prob, &interior, cfg.margin) {
            if state.residual.iter().all(|&r| r >= 0.0) {
                return Ok((u, amp));
            }
        }
        amp *= 2.0;
    }
    Err(Error::InvalidProblem(
        "no admissible initial guess; the grid may be too coarse for ψ".into(),
    ))
}

/// Gradient of `ṼM_p` at `H` via the adjugate route.
fn tilde_gradient(v: &NodeValue, p: usize) -> Result<GradientMatrix> {
    Ok(tilde_chain(grad_mp_adjugate(&v.hessian, p)?, v.mp))
}

fn jacobian(
    u: &GridField,
    prob: &DirichletProblem,
    interior: &[usize],
    row_of: &[usize],
) -> Result<SparseColMat<usize, f64>> {
    let grid = u.grid();
    let n = grid.n();
    let h2 = grid.h() * grid.h();
    let mut triplets = Vec::with_capacity(interior.len() * (1 + 2 * n * n));
    let mut push = |row: usize, node: usize, val: f64| {
        let col = row_of[node];
        if col != usize::MAX {
            triplets.push(Triplet::new(row, col, val));
        }
    };
    for (row, &node) in interior.iter().enumerate() {
        let v = node_value(u, node, prob.p)?;
        let g = tilde_gradient(&v, prob.p)?;
        let (_, dft) = prob.tilde_source(&grid.coords(node), u.get(node));
        let mut diag = -dft;
        for k in 0..n {
            let s = grid.stride(k);
            let gkk = g.get(k, k);
            diag -= 2.0 * gkk / h2;
            push(row, node + s, gkk / h2);
            push(row, node - s, gkk / h2);
            for l in k + 1..n {
                let t = grid.stride(l);
                // G^{kl} and G^{lk} both multiply the symmetric cross entry.
                let c = (g.get(k, l) + g.get(l, k)) / (4.0 * h2);
                push(row, node + s + t, c);
                push(row, node - s - t, c);
                push(row, node + s - t, -c);
                push(row, node - s + t, -c);
            }
        }
        push(row, node, diag);
    }
    SparseColMat::try_new_from_triplets(interior.len(), interior.len(), &triplets)
        .map_err(|e| Error::SingularLinearization(format!("{e:?}")))
}

/// Solve `J δ = rhs` with one step of iterative refinement if needed.
fn linear_solve(j: &SparseColMat<usize, f64>, rhs: &[f64]) -> Result<Vec<f64>> {
    let lu = j
        .sp_lu()
        .map_err(|e| Error::SingularLinearization(format!("{e:?}")))?;
    let b = Col::from_fn(rhs.len(), |i| rhs[i]);
    let bnorm = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut x = lu.solve(&b);
    for _ in 0..2 {
        let r = &b - j * &x;
        let rnorm = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !rnorm.is_finite() {
            return Err(Error::SingularLinearization(
                "non-finite Newton step".into(),
            ));
        }
        if rnorm <= 1e-10 * bnorm {
            break;
        }
        x += lu.solve(&r);
    }
    Ok(x.iter().copied().collect())
}

/// Solve the discrete Dirichlet problem by damped Newton.
///
/// Returns the field and report when converged or out of iterations. The
/// line search halves the step until the trial keeps every node Hessian at
/// margin `≥ cfg.margin · scale` and lowers the residual sup-norm; failing
/// that down to `cfg.min_step` is an error.
pub fn newton_solve(
    prob: &DirichletProblem,
    cfg: &SolverConfig,
) -> Result<(GridField, SolverReport)> {
    cfg.validate()?;
    let grid: &Grid = &prob.grid;
    let interior = grid.interior_nodes();
    let mut row_of = vec![usize::MAX; grid.len()];
    for (row, &node) in interior.iter().enumerate() {
        row_of[node] = row;
    }
    let (mut u, amp) = initial_guess(prob, cfg)?;
    let reject = |r: Reject| match r {
        Reject::Breach { node, margin } => Error::ConeBreach {
            node: grid.multi_index(node),
            margin,
        },
        Reject::Err(e) => e,
    };
    let mut state = evaluate(&u, prob, &interior, cfg.margin).map_err(reject)?;
    let tol = cfg.tol.unwrap_or_else(|| {
        let scale = interior
            .iter()
            .map(|&node| prob.tilde_source(&grid.coords(node), u.get(node)).0)
            .fold(1.0f64, f64::max);
        1e-8 * scale
    });
    let mut report = SolverReport {
        converged: false,
        iterations: 0,
        residual: state.sup,
        tolerance: tol,
        min_margin: state.min_margin,
        history: vec![state.sup],
        steps: Vec::new(),
        init_amplitude: amp,
    };
    while state.sup > tol && report.iterations < cfg.max_iter {
        let j = jacobian(&u, prob, &interior, &row_of)?;
        let rhs: Vec<f64> = state.residual.iter().map(|r| -r).collect();
        let delta = linear_solve(&j, &rhs)?;
        let mut alpha = 1.0;
        let accepted = loop {
            let mut trial = u.clone();
            for (row, &node) in interior.iter().enumerate() {
                trial.values_mut()[node] += alpha * delta[row];
            }
            let outcome = evaluate(&trial, prob, &interior, cfg.margin);
            let last = match outcome {
                Ok(s) if s.sup < state.sup => break Some((trial, s)),
                Ok(s) => Error::LineSearch(format!(
                    "residual {} does not drop below {} at step {alpha}",
                    s.sup, state.sup
                )),
                Err(r) => reject(r),
            };
            alpha *= cfg.backtrack;
            if alpha < cfg.min_step {
                return Err(last);
            }
        };
        let (next, next_state) = accepted.expect("loop only breaks on acceptance");
        u = next;
        state = next_state;
        report.iterations += 1;
        report.history.push(state.sup);
        report.steps.push(alpha);
    }
    report.residual = state.sup;
    report.min_margin = state.min_margin;
    report.converged = state.sup <= tol;
    Ok((u, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::problem::{BoundaryData, Source};

    fn problem(n: usize, p: usize, m: usize, psi: &str, f: &str, f0: f64) -> DirichletProblem {
        let grid = Grid::cube(n, 0.0, 1.0, m).unwrap();
        DirichletProblem::new(
            p,
            grid,
            BoundaryData::parse(psi, n).unwrap(),
            Source::parse(f).unwrap(),
            f0,
        )
        .unwrap()
    }

    #[test]
    fn residual_vanishes_on_exact_quadratics() {
        let prob = problem(3, 2, 7, "(x^2 + y^2 + z^2)/2", "8", 8.0);
        let u = GridField::from_fn(prob.grid.clone(), |x| prob.boundary.eval(x)).unwrap();
        let r = assemble_residual(&u, &prob).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-12));

        let prob = problem(2, 2, 7, "(x^2 + y^2)/2", "2", 2.0);
        let u = GridField::from_fn(prob.grid.clone(), |x| prob.boundary.eval(x)).unwrap();
        assert!(assemble_residual(&u, &prob)
            .unwrap()
            .iter()
            .all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn perturbation_is_local() {
        // D²u = 3I leaves room for the -2 diagonal shift at the bumped node.
        let prob = problem(3, 2, 9, "1.5*(x^2 + y^2 + z^2)", "216", 216.0);
        let mut u = GridField::from_fn(prob.grid.clone(), |x| prob.boundary.eval(x)).unwrap();
        let base = assemble_residual(&u, &prob).unwrap();
        let g = &prob.grid;
        let center = g.node(&[4, 4, 4]);
        u.values_mut()[center] += g.h() * g.h();
        let bumped = assemble_residual(&u, &prob).unwrap();
        let interior = g.interior_nodes();
        for (row, &node) in interior.iter().enumerate() {
            let idx = g.multi_index(node);
            let near = idx.iter().all(|&i| i.abs_diff(4) <= 1);
            let changed = (bumped[row] - base[row]).abs() > 1e-12;
            assert!(!changed || near, "node {idx:?} changed");
            if idx == [4, 4, 4] {
                assert!(changed);
            }
        }
    }

    #[test]
    fn breach_is_reported() {
        let prob = problem(2, 1, 7, "x^2 + y^2", "1", 1.0);
        let u = GridField::from_fn(prob.grid.clone(), |x| -(x[0] * x[0]) - x[1] * x[1]).unwrap();
        assert!(matches!(
            assemble_residual(&u, &prob),
            Err(Error::ConeBreach { .. })
        ));
    }

    #[test]
    fn recovers_quadratic_solutions() {
        let prob = problem(3, 2, 9, "(x^2 + y^2 + z^2)/2", "8", 8.0);
        let (u, report) = newton_solve(&prob, &SolverConfig::default()).unwrap();
        assert!(report.converged, "{report:?}");
        let exact = GridField::from_fn(prob.grid.clone(), |x| prob.boundary.eval(x)).unwrap();
        assert!(u.sup_diff(&exact).unwrap() < 1e-8);
        assert!(report.history.windows(2).all(|w| w[1] < w[0]));

        let prob = problem(2, 2, 9, "x^2 + y^2", "4", 4.0);
        let (u, report) = newton_solve(&prob, &SolverConfig::default()).unwrap();
        assert!(report.converged);
        let exact = GridField::from_fn(prob.grid.clone(), |x| prob.boundary.eval(x)).unwrap();
        assert!(u.sup_diff(&exact).unwrap() < 1e-8);
    }

    #[test]
    fn boundary_values_are_untouched() {
        let prob = problem(2, 1, 9, "exp(x) + y^2", "2 + x", 2.0);
        let (u, report) = newton_solve(&prob, &SolverConfig::default()).unwrap();
        assert!(report.converged);
        for node in 0..prob.grid.len() {
            if prob.grid.is_boundary(node) {
                assert_eq!(u.get(node), prob.boundary.eval(&prob.grid.coords(node)));
            }
        }
    }

    #[test]
    fn bump_is_discretely_convex_and_vanishes_on_the_boundary() {
        for (n, m) in [(2, 5), (2, 33), (3, 5), (3, 17), (3, 25)] {
            let g = Grid::cube(n, 0.0, 1.0, m).unwrap();
            let phi = GridField::from_fn(g.clone(), |x| boundary_bump(&g, x)).unwrap();
            for node in 0..g.len() {
                if g.is_boundary(node) {
                    assert!(phi.get(node).abs() < 1e-6, "n={n} m={m}");
                } else {
                    let low = *eigen_spectrum(&fd_hessian(&phi, node).unwrap())
                        .values
                        .last()
                        .unwrap();
                    assert!(
                        low > 0.3,
                        "n={n} m={m} node {:?}: {low}",
                        g.multi_index(node)
                    );
                }
            }
        }
    }

    #[test]
    fn initial_guess_is_a_supersolution_for_monge_ampere() {
        // Positive definite but far from diagonal ψ with p = 1 in 3D.
        let prob = problem(
            3,
            1,
            17,
            "quadratic:0.9,0.19,-0.47,1.28,-0.72,1.07",
            "0.3",
            0.3,
        );
        let (u0, amp) = initial_guess(&prob, &SolverConfig::default()).unwrap();
        let r = assemble_residual(&u0, &prob).unwrap();
        assert!(r.iter().all(|&v| v >= 0.0));
        assert!(amp >= 1.0);
    }

    #[test]
    fn config_validation() {
        let cfg = SolverConfig {
            backtrack: 1.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        assert!(SolverConfig::default().validate().is_ok());
    }
}
