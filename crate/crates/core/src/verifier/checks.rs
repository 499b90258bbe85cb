use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::floors::arrowhead_floor;
use super::{CheckName, CheckResult, Ctx, Tally, VerifierConfig, DEFAULT_TOL, EQUALITY_TOL};
use crate::calculus::{
    grad_mp_adjugate, grad_mp_diagonal, grad_tilde_mp, hess_mp_diagonal, tilde_chain,
};
use crate::cone::{cone_report, sample_arrowhead, sample_cone};
use crate::error::{Error, Result};
use crate::operator::{eigen_spectrum, mp_from_values, tilde_mp, SymMatrix};
use crate::ptuples::binomial;

/// Cone matrix used by the checks, regenerated from its seed.
///
/// Half of the seeds give [`sample_cone`] output at a random scale in
/// `[0.1, 10]`; the other half are shifted so the margin is only
/// `10^[-6, -1]` times the scale, to probe the cone boundary.
pub fn cone_sample(n: usize, p: usize, seed: u64) -> Result<SymMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 10f64.powf(rng.random_range(-1.0..1.0));
    let base = sample_cone(n, p, seed, scale)?;
    if rng.random_bool(0.5) {
        return Ok(base);
    }
    let b = SymMatrix::from_upper(n, |_, _| rng.random_range(-scale..=scale))?;
    let m = cone_report(&b, p)?.margin;
    let target = 10f64.powf(rng.random_range(-6.0..-1.0)) * scale;
    Ok(b.shifted((target - m) / p as f64))
}

/// `δ / (16 p (p - 1))`; `None` for `p = 1`, where the inequality needs
/// no smallness condition.
pub fn offdiag_epsilon(p: usize, delta: f64) -> Option<f64> {
    (p >= 2).then(|| delta / (16.0 * p as f64 * (p - 1) as f64))
}

/// Rejection sampler for decreasing `λ ∈ 𝒫_p` with `λ_{n-p+1} <= ε λ_1`.
///
/// `λ_1 ∈ [1, 10]` and the other entries lie in
/// `[-0.9 ε λ_1/(p-1), ε λ_1]`. With `wide`, the entries `λ_2..λ_{n-p}`,
/// which the smallness condition leaves free, range up to `λ_1` instead.
/// Returns `None` when the set is empty (`p = n`) or after 1000 rejections.
pub fn offdiag_spectrum(
    n: usize,
    p: usize,
    eps: Option<f64>,
    wide: bool,
    seed: u64,
) -> Option<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let Some(eps) = eps else {
        let a = cone_sample(n, p, seed).ok()?;
        return Some(eigen_spectrum(&a).values);
    };
    if p >= n {
        return None;
    }
    for _ in 0..1000 {
        let l1 = rng.random_range(1.0..10.0);
        let lo = -0.9 * eps * l1 / (p - 1) as f64;
        let hi = eps * l1;
        let mut lambda = vec![l1];
        for i in 1..n {
            let top = if wide && i < n - p { l1 } else { hi };
            lambda.push(rng.random_range(lo..=top));
        }
        lambda.sort_by(|a, b| b.total_cmp(a));
        let margin: f64 = lambda[n - p..].iter().sum();
        if lambda[n - p] <= eps * lambda[0] && margin > 1e-10 * (1.0 + lambda[0]) {
            return Some(lambda);
        }
    }
    None
}

fn ctx<'a>(n: usize, p: usize, seed: u64, matrix: &'a SymMatrix, detail: String) -> Ctx<'a> {
    Ctx {
        n,
        p,
        seed,
        matrix,
        detail,
    }
}

fn tilde(a: &SymMatrix, p: usize) -> Result<f64> {
    Ok(tilde_mp(a, p)?.tilde.expect("closed cone"))
}

pub fn run_check(cfg: &VerifierConfig, check: CheckName) -> Result<CheckResult> {
    cfg.validate()?;
    let mut tally = Tally::new(cfg, check);
    for &(n, p) in &cfg.dims {
        let mut rng = cfg.rng(check, n, p);
        match check {
            CheckName::Concavity => concavity(cfg, &mut tally, &mut rng, n, p)?,
            CheckName::InfRepresentation => inf_representation(cfg, &mut tally, &mut rng, n, p)?,
            CheckName::TraceBound => trace_bound(
                cfg,
                &mut tally,
                &mut rng,
                n,
                p,
                binomial(n - 1, p - 1) as u64,
            )?,
            CheckName::TraceBoundSharp => trace_bound(cfg, &mut tally, &mut rng, n, p, p as u64)?,
            CheckName::DominantMinor => dominant_minor(cfg, &mut tally, &mut rng, n, p)?,
            CheckName::Arrowhead => arrowhead(cfg, &mut tally, &mut rng, n, p)?,
            CheckName::TopEigen => top_eigen(cfg, &mut tally, &mut rng, n, p)?,
            CheckName::OffdiagHessian => offdiag(cfg, &mut tally, &mut rng, n, p, false)?,
            CheckName::OffdiagHessianWide => offdiag(cfg, &mut tally, &mut rng, n, p, true)?,
        }
    }
    Ok(tally.finish())
}

fn concavity(
    cfg: &VerifierConfig,
    t: &mut Tally,
    rng: &mut ChaCha8Rng,
    n: usize,
    p: usize,
) -> Result<()> {
    for _ in 0..cfg.samples {
        let (sa, sb): (u64, u64) = (rng.random(), rng.random());
        let a = cone_sample(n, p, sa)?;
        let b = cone_sample(n, p, sb)?;
        let mid = a.add(&b).scaled(0.5);
        let lhs = tilde(&mid, p)?;
        let rhs = 0.5 * (tilde(&a, p)? + tilde(&b, p)?);
        let scale = a.scale().max(b.scale());
        t.ge_scaled(
            ctx(n, p, sa, &a, format!("pair seed {sb}")),
            lhs,
            rhs,
            scale,
        );
    }
    Ok(())
}

/// Random matrices `C` drawn per sample for the inf-representation.
const INF_REP_C_PER_SAMPLE: usize = 8;

/// Rescales `c` into `{M_p = N^{-N/(N-1)}}`; the identity when `N = 1`.
fn normalize(c: &SymMatrix, p: usize) -> Result<SymMatrix> {
    let big_n = binomial(c.n(), p) as f64;
    if big_n == 1.0 {
        return Ok(c.clone());
    }
    let s = eigen_spectrum(c);
    let table = crate::ptuples::enumerate_tuples(c.n(), p)?;
    let log_m: f64 = table
        .tuples()
        .iter()
        .map(|t| t.sum_of(&s.values).ln())
        .sum();
    let log_target = -big_n / (big_n - 1.0) * big_n.ln();
    Ok(c.scaled(((log_target - log_m) / big_n).exp()))
}

fn inf_representation(
    cfg: &VerifierConfig,
    t: &mut Tally,
    rng: &mut ChaCha8Rng,
    n: usize,
    p: usize,
) -> Result<()> {
    for _ in 0..cfg.samples {
        let sa: u64 = rng.random();
        let a = cone_sample(n, p, sa)?;
        let value = tilde(&a, p)?;

        let c = normalize(&a, p)?;
        let bound = grad_mp_adjugate(&c, p)?.contract(&a);
        let ok = (bound - value).abs() <= EQUALITY_TOL * value.abs() + DEFAULT_TOL * a.scale();
        t.outcome(
            ctx(n, p, sa, &a, "equality case C = rescaled A".into()),
            ok,
            bound,
            value,
        );

        for _ in 0..INF_REP_C_PER_SAMPLE {
            let sc: u64 = rng.random();
            let c = normalize(&cone_sample(n, p, sc)?, p)?;
            let bound = grad_mp_adjugate(&c, p)?.contract(&a);
            t.ge_scaled(
                ctx(n, p, sa, &a, format!("C seed {sc}")),
                bound,
                value,
                a.scale(),
            );
        }
    }
    Ok(())
}

fn trace_bound(
    cfg: &VerifierConfig,
    t: &mut Tally,
    rng: &mut ChaCha8Rng,
    n: usize,
    p: usize,
    bound: u64,
) -> Result<()> {
    for _ in 0..cfg.samples {
        let s: u64 = rng.random();
        let a = cone_sample(n, p, s)?;
        let lhs = grad_tilde_mp(&a, p)?.trace();
        t.ge(
            ctx(n, p, s, &a, format!("bound {bound}")),
            lhs,
            bound as f64,
        );
    }
    Ok(())
}

fn dominant_minor(
    cfg: &VerifierConfig,
    t: &mut Tally,
    rng: &mut ChaCha8Rng,
    n: usize,
    p: usize,
) -> Result<()> {
    let theta = theta_star(n, p);
    for _ in 0..cfg.samples {
        let s: u64 = rng.random();
        let lambda = eigen_spectrum(&cone_sample(n, p, s)?).values;
        let d = SymMatrix::diag(&lambda)?;
        let g = grad_mp_diagonal(&lambda, p)?;
        let total = g.trace();
        for j in n - p..n {
            t.ge(
                ctx(n, p, s, &d, format!("j = {}", j + 1)),
                g.get(j, j),
                theta * total,
            );
        }
    }
    Ok(())
}

fn theta_star(n: usize, p: usize) -> f64 {
    1.0 / (p as f64 * binomial(n, p) as f64)
}

fn arrowhead(
    cfg: &VerifierConfig,
    t: &mut Tally,
    rng: &mut ChaCha8Rng,
    n: usize,
    p: usize,
) -> Result<()> {
    if p == 1 || n < 2 {
        t.vacuous(n, p, "no matrix in the cone has a negative diagonal entry");
        return Ok(());
    }
    let floor = arrowhead_floor(n, p, cfg.c);
    if floor.is_none() {
        t.note(format!(
            "(n={n}, p={p}, c={}) has no pinned floor; only M^11 > 0 is checked",
            cfg.c
        ));
    }
    let floor = floor.map_or(0.0, |f| f.floor);
    let mut strong = 0;
    for _ in 0..cfg.samples {
        let s: u64 = rng.random();
        let sample = sample_arrowhead(n, p, cfg.c, s)?;
        if !sample.strong {
            continue;
        }
        strong += 1;
        let a = sample.matrix.matrix();
        let g = grad_mp_adjugate(a, p)?;
        let ratio = g.get(0, 0) / g.trace();
        t.observe_ratio(ratio);
        let ok = g.get(0, 0) > 0.0 && ratio >= floor;
        t.outcome(
            ctx(n, p, s, a, "M^11 / Σ M^ll against the pinned floor".into()),
            ok,
            ratio,
            floor,
        );
    }
    t.note(format!(
        "(n={n}, p={p}): {strong} of {} samples strong",
        cfg.samples
    ));
    Ok(())
}

fn top_eigen(
    cfg: &VerifierConfig,
    t: &mut Tally,
    rng: &mut ChaCha8Rng,
    n: usize,
    p: usize,
) -> Result<()> {
    let big_n = binomial(n, p) as f64;
    for _ in 0..cfg.samples {
        let s: u64 = rng.random();
        let lambda = eigen_spectrum(&cone_sample(n, p, s)?).values;
        let m = mp_from_values(&lambda, p)?.mp;
        let g = tilde_chain(grad_mp_diagonal(&lambda, p)?, m);
        let lhs = g.get(0, 0) * lambda[0];
        let rhs = m.powf(1.0 / big_n) / n as f64;
        let d = SymMatrix::diag(&lambda)?;
        t.ge_scaled(ctx(n, p, s, &d, String::new()), lhs, rhs, d.scale());
    }
    Ok(())
}

fn offdiag(
    cfg: &VerifierConfig,
    t: &mut Tally,
    rng: &mut ChaCha8Rng,
    n: usize,
    p: usize,
    wide: bool,
) -> Result<()> {
    if n < 2 {
        t.vacuous(n, p, "needs an index i >= 2");
        return Ok(());
    }
    if p == n {
        t.vacuous(n, p, "λ_1 <= ε λ_1 leaves no point of the cone");
        return Ok(());
    }
    let eps = offdiag_epsilon(p, cfg.delta);
    if eps.is_none() {
        t.note(format!("(n={n}, p=1) run without the smallness condition"));
    }
    let factor = 2.0 * (cfg.delta + 1.0) / (cfg.delta + 2.0);
    let mut drawn = 0;
    for _ in 0..cfg.samples {
        let s: u64 = rng.random();
        let Some(lambda) = offdiag_spectrum(n, p, eps, wide, s) else {
            continue;
        };
        drawn += 1;
        let d = SymMatrix::diag(&lambda)?;
        let g = grad_mp_diagonal(&lambda, p)?;
        let h = hess_mp_diagonal(&lambda, p)?;
        for i in 1..n {
            let lhs = -factor * h.get(0, i, i, 0);
            let rhs = g.get(i, i) / lambda[0];
            t.ge(ctx(n, p, s, &d, format!("i = {}", i + 1)), lhs, rhs);
        }
    }
    if drawn < cfg.samples {
        t.note(format!(
            "(n={n}, p={p}): sampler rejected {} of {} draws",
            cfg.samples - drawn,
            cfg.samples
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaValidation {
    pub n: usize,
    pub p: usize,
    pub points: usize,
    pub theta_star: f64,
    /// Smallest `M^{jj} / Σ M^{ll}` over sampled points and `j >= n-p+1`.
    pub observed_min: f64,
    pub pass: bool,
}

/// Brute-force minimum of the dominant-minor ratio over random diagonal
/// cone points, compared against `θ* = 1/(p C(n,p))`.
pub fn validate_theta_star(
    n: usize,
    p: usize,
    points: usize,
    seed: u64,
) -> Result<ThetaValidation> {
    crate::ptuples::check_dims(n, p)?;
    if points == 0 {
        return Err(Error::InvalidConfig("points must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut observed_min = f64::INFINITY;
    for _ in 0..points {
        let lambda = eigen_spectrum(&cone_sample(n, p, rng.random())?).values;
        let g = grad_mp_diagonal(&lambda, p)?;
        let total = g.trace();
        for j in n - p..n {
            observed_min = observed_min.min(g.get(j, j) / total);
        }
    }
    let theta = theta_star(n, p);
    Ok(ThetaValidation {
        n,
        p,
        points,
        theta_star: theta,
        observed_min,
        pass: observed_min >= theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(check_dims: Vec<(usize, usize)>) -> VerifierConfig {
        VerifierConfig {
            dims: check_dims,
            samples: 40,
            ..Default::default()
        }
    }

    #[test]
    fn concavity_example_values() {
        let a = SymMatrix::diag(&[3.0, 2.0, 1.0]).unwrap();
        let b = SymMatrix::identity(3);
        let mid = tilde(&a.add(&b).scaled(0.5), 2).unwrap();
        assert!((mid - (3.5f64 * 3.0 * 2.5).powf(1.0 / 3.0)).abs() < 1e-12);
        assert!((mid - 2.97196).abs() < 1e-5);
        let avg = 0.5 * (tilde(&a, 2).unwrap() + 2.0);
        assert!((avg - 2.9574).abs() < 1e-4);
    }

    #[test]
    fn inf_representation_identity_example() {
        let t = 3f64.powf(-0.5) / 2.0;
        let c = normalize(&SymMatrix::identity(3), 2).unwrap();
        assert!((c.get(0, 0) - t).abs() < 1e-14);
        let bound = grad_mp_adjugate(&c, 2)
            .unwrap()
            .contract(&SymMatrix::identity(3));
        assert!((bound - 24.0 * t * t).abs() < 1e-12);
        assert!((bound - 2.0).abs() < 1e-12);
    }

    #[test]
    fn top_eigen_example() {
        let lambda = [3.0, 2.0, 1.0];
        let g = tilde_chain(grad_mp_diagonal(&lambda, 2).unwrap(), 60.0);
        assert!((g.get(0, 0) * 3.0 - 1.7617).abs() < 1e-4);
        assert!((60f64.powf(1.0 / 3.0) / 3.0 - 1.3050).abs() < 1e-4);
    }

    #[test]
    fn offdiag_example() {
        let lambda = [64.0, 1.0, -0.5];
        assert_eq!(offdiag_epsilon(2, 0.5), Some(1.0 / 64.0));
        let h = hess_mp_diagonal(&lambda, 2).unwrap();
        assert!((h.get(0, 1, 1, 0) + 65.0).abs() < 1e-9);
        let g = grad_mp_diagonal(&lambda, 2).unwrap();
        let lhs = -1.2 * h.get(0, 1, 1, 0);
        let rhs = g.get(1, 1) / 64.0;
        assert!((lhs - 78.0).abs() < 1e-9);
        assert!((rhs - 64.99).abs() < 0.01);
    }

    #[test]
    fn offdiag_inequality_fails_with_a_large_second_eigenvalue() {
        let factor = 2.0 * 1.5 / 2.5;
        let t = 1e-6;
        let lambda = [1.0, 1.0, t, t];
        let eps = offdiag_epsilon(2, 0.5).unwrap();
        assert!(lambda[2] <= eps * lambda[0]);
        let h = hess_mp_diagonal(&lambda, 2).unwrap();
        let g = grad_mp_diagonal(&lambda, 2).unwrap();
        let m = mp_from_values(&lambda, 2).unwrap().mp;
        let lhs = -factor * h.get(0, 1, 1, 0) / m;
        let rhs = g.get(1, 1) / lambda[0] / m;
        assert!((lhs - 2.4).abs() < 1e-4 && (rhs - 2.5).abs() < 1e-4);
        assert!(lhs < rhs);
    }

    #[test]
    fn trace_bound_identity_counterexample() {
        let g = grad_tilde_mp(&SymMatrix::identity(4), 2).unwrap();
        assert!((g.trace() - 2.0).abs() < 1e-12);
        assert!(g.trace() < binomial(3, 1) as f64);
        for (n, p) in VerifierConfig::all_dims(6) {
            let tr = grad_tilde_mp(&SymMatrix::identity(n), p).unwrap().trace();
            assert!((tr - p as f64).abs() < 1e-9, "({n},{p})");
        }
    }

    #[test]
    fn dominant_minor_example() {
        let g = grad_mp_diagonal(&[3.0, 2.0, 1.0], 2).unwrap();
        assert!((g.get(2, 2) - 35.0).abs() < 1e-12);
        assert!((g.trace() - 94.0).abs() < 1e-12);
        assert!(g.get(2, 2) >= theta_star(3, 2) * g.trace());
    }

    #[test]
    fn samplers_are_deterministic_and_admissible() {
        for seed in 0..200 {
            let a = cone_sample(4, 2, seed).unwrap();
            assert_eq!(a, cone_sample(4, 2, seed).unwrap());
            assert!(cone_report(&a, 2).unwrap().is_strict());
        }
        let eps = offdiag_epsilon(2, 0.5);
        let e = eps.unwrap();
        let mut wide = 0;
        for seed in 0..200 {
            let l = offdiag_spectrum(5, 2, eps, false, seed).unwrap();
            assert!(l.windows(2).all(|w| w[0] >= w[1]));
            assert!(l[1..].iter().all(|&x| x <= e * l[0]));
            assert!(l[3] + l[4] > 0.0);
            let l = offdiag_spectrum(5, 2, eps, true, seed).unwrap();
            assert!(l[3] <= e * l[0] && l[3] + l[4] > 0.0);
            if l[1] > e * l[0] {
                wide += 1;
            }
        }
        assert!(wide > 100);
        assert_eq!(
            offdiag_spectrum(3, 3, offdiag_epsilon(3, 0.5), false, 1),
            None
        );
    }

    #[test]
    fn small_suites_pass() {
        let cfg = small_cfg(vec![(3, 2), (4, 2), (4, 3), (5, 1)]);
        for c in CheckName::DEFAULT {
            let r = run_check(&cfg, c).unwrap();
            assert!(r.pass, "{c}: {:?}", r.failures.first());
            assert!(r.extremal_ratio.is_some());
        }
    }

    #[test]
    fn deterministic_reports() {
        let cfg = small_cfg(vec![(4, 2)]);
        for c in CheckName::DEFAULT {
            assert_eq!(run_check(&cfg, c).unwrap(), run_check(&cfg, c).unwrap());
        }
    }

    #[test]
    fn theta_star_holds() {
        let v = validate_theta_star(4, 2, 500, 7).unwrap();
        assert!(v.pass);
        assert!(v.observed_min >= v.theta_star);
    }
}
