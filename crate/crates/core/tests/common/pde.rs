//! Independent oracles for solver tests.

use ppsh_core::cone::sample_cone;
use ppsh_core::operator::{mp, SymMatrix};
use ppsh_core::solver::{
    fd_hessian, BoundaryData, DirichletProblem, Grid, GridField, Quadratic, Source,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Matrix-free conjugate gradients for the discrete Dirichlet Poisson
/// problem `Δ_h u = f` with `u = ψ` on the boundary.
pub fn poisson_cg(grid: &Grid, f: impl Fn(&[f64]) -> f64, psi: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let len = grid.len();
    let n = grid.n();
    let h2 = grid.h() * grid.h();
    let interior: Vec<bool> = (0..len).map(|i| !grid.is_boundary(i)).collect();
    let mut known = vec![0.0; len];
    for i in 0..len {
        if !interior[i] {
            known[i] = psi(&grid.coords(i));
        }
    }
    // -Δ_h restricted to interior unknowns is symmetric positive definite.
    let apply = |v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; len];
        for i in 0..len {
            if !interior[i] {
                continue;
            }
            let mut acc = 2.0 * n as f64 * v[i];
            for k in 0..n {
                let s = grid.stride(k);
                for j in [i + s, i - s] {
                    if interior[j] {
                        acc -= v[j];
                    }
                }
            }
            out[i] = acc / h2;
        }
        out
    };
    let mut b = vec![0.0; len];
    for i in 0..len {
        if !interior[i] {
            continue;
        }
        let mut acc = -f(&grid.coords(i));
        for k in 0..n {
            let s = grid.stride(k);
            for j in [i + s, i - s] {
                if !interior[j] {
                    acc += known[j] / h2;
                }
            }
        }
        b[i] = acc;
    }
    let dot = |a: &[f64], c: &[f64]| a.iter().zip(c).map(|(x, y)| x * y).sum::<f64>();
    let mut x = vec![0.0; len];
    let mut r = b.clone();
    let mut d = r.clone();
    let mut rr = dot(&r, &r);
    let target = 1e-28 * dot(&b, &b);
    for _ in 0..10 * len {
        if rr <= target {
            break;
        }
        let ad = apply(&d);
        let alpha = rr / dot(&d, &ad);
        for i in 0..len {
            x[i] += alpha * d[i];
            r[i] -= alpha * ad[i];
        }
        let next = dot(&r, &r);
        let beta = next / rr;
        rr = next;
        for i in 0..len {
            d[i] = r[i] + beta * d[i];
        }
    }
    (0..len)
        .map(|i| if interior[i] { x[i] } else { known[i] })
        .collect()
}

/// A seeded quadratic `½xᵀQx + b·x + c` with `Q` strictly inside the cone,
/// and the constant source `M_p(Q)` that makes it an exact solution.
pub fn quadratic_problem(n: usize, p: usize, m: usize, seed: u64) -> (DirichletProblem, Quadratic) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = sample_cone(n, p, rng.random(), 1.0).unwrap();
    let linear: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let quad = Quadratic::new(q.clone(), linear, rng.random_range(-1.0..1.0)).unwrap();
    let f = mp(&q, p).unwrap().mp;
    let grid = Grid::cube(n, 0.0, 1.0, m).unwrap();
    let prob = DirichletProblem::new(
        p,
        grid,
        BoundaryData::Quadratic(quad.clone()),
        Source::constant(f),
        f,
    )
    .unwrap();
    (prob, quad)
}

pub fn exact_field(grid: &Grid, u: impl Fn(&[f64]) -> f64) -> GridField {
    GridField::from_fn(grid.clone(), u).unwrap()
}

/// Largest entrywise deviation of interior FD Hessians from their mean.
pub fn hessian_spread(u: &GridField) -> f64 {
    let grid = u.grid();
    let n = grid.n();
    let hs: Vec<SymMatrix> = grid
        .interior_nodes()
        .into_iter()
        .map(|i| fd_hessian(u, i).unwrap())
        .collect();
    let mut mean = vec![0.0; n * n];
    for h in &hs {
        for k in 0..n {
            for l in 0..n {
                mean[k * n + l] += h.get(k, l) / hs.len() as f64;
            }
        }
    }
    hs.iter()
        .flat_map(|h| (0..n * n).map(move |i| (i, h.get(i / n, i % n))))
        .fold(0.0, |m, (i, v)| f64::max(m, (v - mean[i]).abs()))
}

/// `u* = x⁴+y⁴+z⁴+x²+y²+z²` on `[−1,1]³` with `M_2(D²u*)` as source.
pub fn quartic_problem(m: usize) -> DirichletProblem {
    let grid = Grid::cube(3, -1.0, 1.0, m).unwrap();
    let psi = BoundaryData::parse("x^4 + y^4 + z^4 + x^2 + y^2 + z^2", 3).unwrap();
    let f = Source::parse("(12*x^2+12*y^2+4)*(12*x^2+12*z^2+4)*(12*y^2+12*z^2+4)").unwrap();
    DirichletProblem::new(2, grid, psi, f, 64.0).unwrap()
}

pub fn quartic_exact(x: &[f64]) -> f64 {
    x.iter().map(|v| v.powi(4) + v * v).sum()
}

/// `f ≡ 8`, `ψ = (x²+y²+z²)/2` on `[0,1]³`, `p = 2`.
pub fn model_problem(m: usize) -> DirichletProblem {
    let grid = Grid::cube(3, 0.0, 1.0, m).unwrap();
    let psi = BoundaryData::parse("quadratic:1,0,0,1,0,1", 3).unwrap();
    DirichletProblem::new(2, grid, psi, Source::constant(8.0), 8.0).unwrap()
}
