mod common;

use common::pde::{exact_field, model_problem, quadratic_problem};
use ppsh_core::error::Error;
use ppsh_core::solver::{
    assemble_residual, check_barrier, compute_barrier, newton_solve, DirichletProblem, ProblemSpec,
    SolverConfig, Source,
};

fn tight() -> SolverConfig {
    SolverConfig {
        tol: Some(1e-11),
        ..SolverConfig::default()
    }
}

#[test]
fn larger_source_gives_smaller_solution() {
    let prob = model_problem(9);
    let bigger = prob.with_source(Source::constant(8.8), 8.8).unwrap();
    let (u, _) = newton_solve(&prob, &tight()).unwrap();
    let (v, _) = newton_solve(&bigger, &tight()).unwrap();
    let mut strict = 0;
    for node in 0..u.grid().len() {
        assert!(v.get(node) <= u.get(node) + 1e-8);
        if v.get(node) < u.get(node) - 1e-6 {
            strict += 1;
        }
    }
    assert!(strict > 0);
}

#[test]
fn quadratics_are_exact_at_every_resolution() {
    for (n, p) in [(2, 1), (2, 2), (3, 2)] {
        for m in [5, 9, 13] {
            let (prob, q) = quadratic_problem(n, p, m, 1000 + m as u64);
            let (u, report) = newton_solve(&prob, &tight()).unwrap();
            assert!(report.converged);
            let exact = exact_field(&prob.grid, |x| q.eval(x));
            let err = u.sup_diff(&exact).unwrap();
            assert!(err < 1e-9, "n={n} p={p} m={m}: {err}");
        }
    }
}

#[test]
fn u_dependent_source_converges() {
    let spec = ProblemSpec::parse(
        r#"
        n = 2
        p = 1
        box = [[-1.0, 1.0], [-1.0, 1.0]]
        shape = 17
        boundary = "x^2 + y^2"
        f = "4 * exp(u / 2) + x^2"
        f0 = 1.0
        "#,
    )
    .unwrap();
    let (u, report) = newton_solve(&spec.problem, &tight()).unwrap();
    assert!(report.converged, "{report:?}");
    let r = assemble_residual(&u, &spec.problem).unwrap();
    assert!(r.iter().all(|v| v.abs() <= report.tolerance));
    // Quadratic convergence shows in the last steps.
    let h = &report.history;
    assert!(h.len() >= 3);
    let k = h.len() - 1;
    assert!(h[k] <= 10.0 * h[k - 1] * h[k - 1] / h[k - 2].max(1e-300) + 1e-13);
}

#[test]
fn json_and_toml_problems_solve_identically() {
    let toml = r#"
        n = 2
        p = 2
        box = [[0.0, 1.0], [0.0, 2.0]]
        shape = [9, 17]
        boundary = "quadratic:2,0.5,1,0,0,0"
        f = 3.0
        [solver]
        max_iter = 40
    "#;
    let json = r#"{"n": 2, "p": 2, "box": [[0.0, 1.0], [0.0, 2.0]], "shape": [9, 17],
        "boundary": "quadratic:2,0.5,1,0,0,0", "f": 3.0, "solver": {"max_iter": 40}}"#;
    let a = ProblemSpec::parse(toml).unwrap();
    let b = ProblemSpec::parse(json).unwrap();
    let cfg_a = a.overrides.apply(SolverConfig::default());
    assert_eq!(cfg_a.max_iter, 40);
    let (ua, _) = newton_solve(&a.problem, &cfg_a).unwrap();
    let (ub, _) = newton_solve(&b.problem, &b.overrides.apply(SolverConfig::default())).unwrap();
    assert_eq!(ua, ub);
}

#[test]
fn barrier_with_larger_source_is_rejected() {
    let prob = model_problem(9);
    let (u, _) = newton_solve(&prob, &tight()).unwrap();
    let cfg = SolverConfig {
        barrier_factor: 2.0,
        ..tight()
    };
    assert!(matches!(
        compute_barrier(&prob, &u, &cfg),
        Err(Error::InvalidConfig(_))
    ));
    let above = prob.with_source(Source::constant(16.0), 16.0).unwrap();
    let (v, _) = newton_solve(&above, &tight()).unwrap();
    assert!(matches!(
        check_barrier(&u, &v),
        Err(Error::BarrierOrdering { .. })
    ));
}

#[test]
fn barrier_gap_grows_inward() {
    let prob = model_problem(13);
    let (u, _) = newton_solve(&prob, &tight()).unwrap();
    let (w, _) = compute_barrier(&prob, &u, &tight()).unwrap();
    check_barrier(&u, &w).unwrap();
    let grid = u.grid();
    let gap = |node: usize| w.get(node) - u.get(node);
    let center = grid.node(&[6, 6, 6]);
    let near_edge = grid.node(&[1, 6, 6]);
    assert!(gap(center) > gap(near_edge));
    assert!(gap(near_edge) > 0.0);
}

#[test]
fn invalid_problems_are_rejected() {
    let grid = model_problem(5).grid;
    let psi = model_problem(5).boundary;
    // f decreasing in u
    let bad = Source::parse("8 - u").unwrap();
    assert!(DirichletProblem::new(2, grid.clone(), psi.clone(), bad, 1.0).is_err());
    // f below its declared floor
    assert!(
        DirichletProblem::new(2, grid.clone(), psi.clone(), Source::constant(0.5), 1.0).is_err()
    );
    assert!(DirichletProblem::new(4, grid, psi, Source::constant(8.0), 8.0).is_err());
}
