//! Finite-difference Newton solver for `M_p(D²u) = f(x, u)` on boxes.
//!
//! The equation is solved in the concave form `ṼM_p(D²_h u) = f̃` with
//! `f̃ = f^(1/C(n,p))`, on a uniform grid with Dirichlet data `ψ`.

mod grid;
mod monitor;
mod newton;
mod problem;

pub use grid::{fd_hessian, Grid, GridField};
pub use monitor::{
    check_barrier, compute_barrier, monitor_estimates, GradientMonitor, MonitorReport, BARRIER_TOL,
};
pub use newton::{
    assemble_residual, boundary_bump, initial_guess, newton_solve, SolverConfig, SolverReport,
};
pub use problem::{
    BoundaryData, DirichletProblem, ProblemSpec, Quadratic, SolverOverrides, Source,
};

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// One row per node: coordinates, `u`, `w` (when given), and at interior
/// nodes the cone margin and spectral norm of `D²_h u`.
pub fn solution_csv(u: &GridField, w: Option<&GridField>, p: usize) -> Result<String> {
    if let Some(w) = w {
        u.check_same_grid(w)?;
    }
    let grid = u.grid();
    let n = grid.n();
    let mut out = String::new();
    for k in 1..=n {
        let _ = write!(out, "x{k},");
    }
    out.push_str("u,w,margin,hessian_norm\n");
    for node in 0..grid.len() {
        for x in grid.coords(node) {
            let _ = write!(out, "{x},");
        }
        let _ = write!(out, "{},", u.get(node));
        if let Some(w) = w {
            let _ = write!(out, "{}", w.get(node));
        }
        if u.is_boundary(node) {
            out.push_str(",,\n");
        } else {
            let h = fd_hessian(u, node)?;
            let margin = crate::cone::margin(&h, p)?;
            let _ = writeln!(out, ",{margin},{}", h.spectral_norm());
        }
    }
    Ok(out)
}

/// Read the `u` and `w` columns of [`solution_csv`] output back onto `grid`.
pub fn read_solution_csv(text: &str, grid: &Grid) -> Result<(GridField, Option<GridField>)> {
    let bad =
        |line: usize, msg: &str| Error::InvalidProblem(format!("solution csv line {line}: {msg}"));
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| bad(1, "empty file"))?
        .split(',')
        .collect();
    let col = |name: &str| header.iter().position(|h| h.trim() == name);
    let cu = col("u").ok_or_else(|| bad(1, "missing 'u' column"))?;
    let cw = col("w");
    let n = grid.n();
    let mut u = Vec::with_capacity(grid.len());
    let mut w = Vec::with_capacity(grid.len());
    let mut has_w = cw.is_some();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 2;
        let cells: Vec<&str> = line.split(',').collect();
        let num = |c: usize| -> Result<f64> {
            cells
                .get(c)
                .ok_or_else(|| bad(lineno, "short row"))?
                .trim()
                .parse::<f64>()
                .map_err(|_| bad(lineno, "bad number"))
        };
        let node = u.len();
        if node >= grid.len() {
            return Err(bad(lineno, "more rows than grid nodes"));
        }
        let x = grid.coords(node);
        for (k, xk) in x.iter().enumerate().take(n) {
            if (num(k)? - xk).abs() > 1e-9 * (1.0 + xk.abs()) {
                return Err(bad(lineno, "coordinates do not match the problem grid"));
            }
        }
        u.push(num(cu)?);
        if let Some(c) = cw {
            match cells.get(c).map(|s| s.trim()) {
                Some("") | None => has_w = false,
                Some(_) => w.push(num(c)?),
            }
        }
    }
    if u.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "{} rows for {} nodes",
            u.len(),
            grid.len()
        )));
    }
    let u = GridField::new(grid.clone(), u)?;
    let w = if has_w {
        Some(GridField::new(grid.clone(), w)?)
    } else {
        None
    };
    Ok((u, w))
}
