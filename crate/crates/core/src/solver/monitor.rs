//! Barrier construction and the interior-estimate monitors.

use serde::Serialize;

use super::grid::{fd_hessian, GridField};
use super::newton::{newton_solve, SolverConfig, SolverReport};
use super::problem::{DirichletProblem, Source};
use crate::error::{Error, Result};

/// Slack allowed in `w ≥ u`.
pub const BARRIER_TOL: f64 = 1e-8;

/// Solve the same Dirichlet problem with the constant source
/// `cfg.barrier_factor · f0` and check that the result lies above `u`.
pub fn compute_barrier(
    prob: &DirichletProblem,
    u: &GridField,
    cfg: &SolverConfig,
) -> Result<(GridField, SolverReport)> {
    cfg.validate()?;
    let c = cfg.barrier_factor * prob.f0;
    let barrier = prob.with_source(Source::constant(c), c)?;
    let (w, report) = newton_solve(&barrier, cfg)?;
    if !report.converged {
        return Err(Error::LineSearch(format!(
            "barrier solve stopped at residual {} after {} iterations",
            report.residual, report.iterations
        )));
    }
    check_barrier(u, &w)?;
    Ok((w, report))
}

/// `w ≥ u − 1e-8` everywhere and `w > u + 1e-8` at deep interior nodes,
/// those at least a quarter of the smallest axis length from the boundary.
pub fn check_barrier(u: &GridField, w: &GridField) -> Result<()> {
    u.check_same_grid(w)?;
    let grid = u.grid();
    let deep = (grid.shape().iter().min().copied().unwrap_or(0) / 4).max(1);
    for node in 0..grid.len() {
        let gap = w.get(node) - u.get(node);
        let strict = grid.depth(node) >= deep;
        if gap < -BARRIER_TOL || (strict && gap <= BARRIER_TOL) {
            return Err(Error::BarrierOrdering {
                node: grid.multi_index(node),
                gap,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientMonitor {
    /// `max |D_h u| · r / N` over the ball.
    pub value: f64,
    pub node: Vec<usize>,
    pub radius: f64,
    /// `4 · sup |u|` over the ball.
    pub normalizer: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorReport {
    pub delta: f64,
    /// `max (w − u)^{1+δ} · ‖D²_h u‖₂` over interior nodes.
    pub pogorelov: f64,
    pub pogorelov_node: Vec<usize>,
    /// Present for constant sources only.
    pub gradient: Option<GradientMonitor>,
}

pub fn monitor_estimates(
    u: &GridField,
    w: &GridField,
    prob: &DirichletProblem,
    delta: f64,
) -> Result<MonitorReport> {
    u.check_same_grid(w)?;
    if u.grid() != &prob.grid {
        return Err(Error::GridMismatch(
            "fields and problem grids differ".into(),
        ));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let grid = u.grid();
    let interior = grid.interior_nodes();
    let mut pogorelov = 0.0f64;
    let mut at = interior[0];
    for &node in &interior {
        let gap = (w.get(node) - u.get(node)).max(0.0);
        let v = gap.powf(1.0 + delta) * fd_hessian(u, node)?.spectral_norm();
        if v > pogorelov {
            pogorelov = v;
            at = node;
        }
    }
    let gradient = match prob.source.constant_value() {
        Some(_) => Some(gradient_monitor(u)?),
        None => None,
    };
    Ok(MonitorReport {
        delta,
        pogorelov,
        pogorelov_node: grid.multi_index(at),
        gradient,
    })
}

/// Ball of radius half the smallest half-extent around the box center.
fn gradient_monitor(u: &GridField) -> Result<GradientMonitor> {
    let grid = u.grid();
    let center = grid.center();
    let radius = 0.5
        * grid
            .lower()
            .iter()
            .zip(grid.upper())
            .map(|(a, b)| 0.5 * (b - a))
            .fold(f64::INFINITY, f64::min);
    let ball: Vec<usize> = grid
        .interior_nodes()
        .into_iter()
        .filter(|&node| {
            let x = grid.coords(node);
            let d2: f64 = x.iter().zip(&center).map(|(a, c)| (a - c) * (a - c)).sum();
            d2 <= radius * radius * (1.0 + 1e-12)
        })
        .collect();
    let normalizer = 4.0 * ball.iter().map(|&i| u.get(i).abs()).fold(0.0, f64::max);
    let mut value = 0.0f64;
    let mut at = ball.first().copied().unwrap_or(0);
    for &node in &ball {
        let g: f64 = u
            .fd_gradient(node)?
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        let v = if normalizer > 0.0 {
            g * radius / normalizer
        } else {
            0.0
        };
        if v > value {
            value = v;
            at = node;
        }
    }
    Ok(GradientMonitor {
        value,
        node: grid.multi_index(at),
        radius,
        normalizer,
    })
}
