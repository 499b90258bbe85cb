//! Dirichlet problems `M_p(D²u) = f(x, u)` in `Ω`, `u = ψ` on `∂Ω`.

use serde::Deserialize;

use super::grid::Grid;
use super::newton::SolverConfig;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::operator::SymMatrix;
use crate::ptuples::{binomial, check_dims};

/// `ψ(x) = ½ xᵀHx + b·x + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    pub hessian: SymMatrix,
    pub linear: Vec<f64>,
    pub constant: f64,
}

impl Quadratic {
    pub fn new(hessian: SymMatrix, linear: Vec<f64>, constant: f64) -> Result<Self> {
        if linear.len() != hessian.n() {
            return Err(Error::InvalidProblem(format!(
                "quadratic has {} linear coefficients for n = {}",
                linear.len(),
                hessian.n()
            )));
        }
        Ok(Self {
            hessian,
            linear,
            constant,
        })
    }

    /// Parse `quadratic:h11,h12,…,hnn[,b1,…,bn[,c]]`, where the `h` are the
    /// upper triangle of the Hessian in row-major order.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let body = text
            .strip_prefix("quadratic:")
            .ok_or_else(|| Error::InvalidProblem("expected 'quadratic:' prefix".into()))?;
        let coeffs: Vec<f64> = body
            .split(',')
            .map(|s| {
                s.trim().parse::<f64>().map_err(|_| {
                    Error::InvalidProblem(format!("boundary: bad coefficient '{}'", s.trim()))
                })
            })
            .collect::<Result<_>>()?;
        let tri = n * (n + 1) / 2;
        if coeffs.len() != tri && coeffs.len() != tri + n && coeffs.len() != tri + n + 1 {
            return Err(Error::InvalidProblem(format!(
                "boundary: quadratic in {n} variables takes {tri}, {} or {} coefficients, got {}",
                tri + n,
                tri + n + 1,
                coeffs.len()
            )));
        }
        let mut upper = coeffs[..tri].iter();
        let mut entries = vec![vec![0.0; n]; n];
        for k in 0..n {
            for l in k..n {
                let v = *upper.next().expect("counted above");
                entries[k][l] = v;
                entries[l][k] = v;
            }
        }
        let hessian = SymMatrix::from_rows(&entries)?;
        let linear = if coeffs.len() > tri {
            coeffs[tri..tri + n].to_vec()
        } else {
            vec![0.0; n]
        };
        let constant = coeffs.get(tri + n).copied().unwrap_or(0.0);
        Self::new(hessian, linear, constant)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let a = self.hessian.as_matrix();
        let n = self.linear.len();
        let mut q = 0.0;
        for k in 0..n {
            for l in 0..n {
                q += x[k] * a[(k, l)] * x[l];
            }
        }
        0.5 * q + self.linear.iter().zip(x).map(|(b, xi)| b * xi).sum::<f64>() + self.constant
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryData {
    Expr(Expr),
    Quadratic(Quadratic),
}

impl BoundaryData {
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        if text.trim_start().starts_with("quadratic:") {
            Ok(Self::Quadratic(Quadratic::parse(text.trim(), n)?))
        } else {
            let e = Expr::parse(text)?;
            if e.depends_on_u() {
                return Err(Error::InvalidProblem(
                    "boundary: ψ cannot depend on u".into(),
                ));
            }
            Ok(Self::Expr(e))
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Self::Expr(e) => e.eval(x, 0.0),
            Self::Quadratic(q) => q.eval(x),
        }
    }

    fn dimension(&self) -> usize {
        match self {
            Self::Expr(e) => e.dimension(),
            Self::Quadratic(q) => q.linear.len(),
        }
    }
}

/// Source term `f(x, u)` together with its symbolic `∂f/∂u`.
#[derive(Debug, Clone, PartialEq)]
pub struct Source {
    f: Expr,
    df_du: Expr,
}

impl Source {
    pub fn new(f: Expr) -> Self {
        let df_du = f.derivative_u();
        Self { f, df_du }
    }

    pub fn constant(value: f64) -> Self {
        Self::new(Expr::Num(value))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self::new(Expr::parse(text)?))
    }

    pub fn expr(&self) -> &Expr {
        &self.f
    }

    pub fn eval(&self, x: &[f64], u: f64) -> f64 {
        self.f.eval(x, u)
    }

    pub fn du(&self, x: &[f64], u: f64) -> f64 {
        self.df_du.eval(x, u)
    }

    pub fn constant_value(&self) -> Option<f64> {
        self.f.constant()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirichletProblem {
    pub p: usize,
    pub grid: Grid,
    pub boundary: BoundaryData,
    pub source: Source,
    pub f0: f64,
}

/// Values of `u` probed when sampling `f` for positivity and monotonicity.
const U_SAMPLES: usize = 7;

impl DirichletProblem {
    /// Validate and build. `f ≥ f0` and `∂f/∂u ≥ 0` are checked at every
    /// node for `u` spread over `[min ψ − span, max ψ]`, `span` being the
    /// boundary oscillation (at least 1).
    pub fn new(
        p: usize,
        grid: Grid,
        boundary: BoundaryData,
        source: Source,
        f0: f64,
    ) -> Result<Self> {
        let n = grid.n();
        check_dims(n, p)?;
        if !(f0 > 0.0 && f0.is_finite()) {
            return Err(Error::InvalidProblem(format!(
                "f0: must be positive, got {f0}"
            )));
        }
        if boundary.dimension() > n {
            return Err(Error::InvalidProblem(format!(
                "boundary: uses coordinates beyond n = {n}"
            )));
        }
        if source.f.dimension() > n {
            return Err(Error::InvalidProblem(format!(
                "f: uses coordinates beyond n = {n}"
            )));
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for node in 0..grid.len() {
            if grid.is_boundary(node) {
                let v = boundary.eval(&grid.coords(node));
                if !v.is_finite() {
                    return Err(Error::InvalidProblem(format!(
                        "boundary: ψ is not finite at node {:?}",
                        grid.multi_index(node)
                    )));
                }
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        let span = (hi - lo).max(1.0);
        for node in 0..grid.len() {
            let x = grid.coords(node);
            for s in 0..U_SAMPLES {
                let u = lo - span + (hi - lo + span) * s as f64 / (U_SAMPLES - 1) as f64;
                let f = source.eval(&x, u);
                if !(f >= f0 * (1.0 - 1e-12)) {
                    return Err(Error::InvalidProblem(format!(
                        "f: f(x, u) = {f} < f0 = {f0} at x = {x:?}, u = {u}"
                    )));
                }
                let d = source.du(&x, u);
                if !(d >= -1e-12 * f.abs()) {
                    return Err(Error::InvalidProblem(format!(
                        "f: ∂f/∂u = {d} < 0 at x = {x:?}, u = {u}"
                    )));
                }
            }
        }
        Ok(Self {
            p,
            grid,
            boundary,
            source,
            f0,
        })
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    /// `C(n, p)`, the homogeneity degree of `M_p`.
    pub fn degree(&self) -> usize {
        binomial(self.n(), self.p)
    }

    /// `f̃ = f^(1/N)` and `∂f̃/∂u`.
    pub fn tilde_source(&self, x: &[f64], u: f64) -> (f64, f64) {
        let big_n = self.degree() as f64;
        let f = self.source.eval(x, u);
        let ft = f.powf(1.0 / big_n);
        let dft = ft / (big_n * f) * self.source.du(x, u);
        (ft, dft)
    }

    /// Same boundary data and grid with a new source.
    pub fn with_source(&self, source: Source, f0: f64) -> Result<Self> {
        Self::new(self.p, self.grid.clone(), self.boundary.clone(), source, f0)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ShapeSpec {
    Uniform(usize),
    PerAxis(Vec<usize>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum SourceSpec {
    Constant(f64),
    Expr(String),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOverrides {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub backtrack: Option<f64>,
    pub min_step: Option<f64>,
    pub margin: Option<f64>,
    pub init_amplitude: Option<f64>,
    pub barrier_factor: Option<f64>,
}

impl SolverOverrides {
    pub fn apply(&self, mut cfg: SolverConfig) -> SolverConfig {
        if self.tol.is_some() {
            cfg.tol = self.tol;
        }
        if let Some(v) = self.max_iter {
            cfg.max_iter = v;
        }
        if let Some(v) = self.backtrack {
            cfg.backtrack = v;
        }
        if let Some(v) = self.min_step {
            cfg.min_step = v;
        }
        if let Some(v) = self.margin {
            cfg.margin = v;
        }
        if let Some(v) = self.init_amplitude {
            cfg.init_amplitude = v;
        }
        if let Some(v) = self.barrier_factor {
            cfg.barrier_factor = v;
        }
        cfg
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    n: usize,
    p: usize,
    #[serde(rename = "box")]
    bounds: Vec<[f64; 2]>,
    shape: ShapeSpec,
    boundary: String,
    f: SourceSpec,
    f0: Option<f64>,
    #[serde(default)]
    solver: SolverOverrides,
}

/// A problem read from a TOML or JSON file, with its solver overrides.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub problem: DirichletProblem,
    pub overrides: SolverOverrides,
}

impl ProblemSpec {
    /// Parse a problem file; JSON when the text starts with `{`, TOML
    /// otherwise.
    pub fn parse(text: &str) -> Result<Self> {
        let file: ProblemFile = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::InvalidProblem(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| Error::InvalidProblem(e.to_string()))?
        };
        file.build()
    }
}

impl ProblemFile {
    fn build(self) -> Result<ProblemSpec> {
        let n = self.n;
        if self.bounds.len() != n {
            return Err(Error::InvalidProblem(format!(
                "box: {} intervals for n = {n}",
                self.bounds.len()
            )));
        }
        let shape = match self.shape {
            ShapeSpec::Uniform(m) => vec![m; n],
            ShapeSpec::PerAxis(v) if v.len() == n => v,
            ShapeSpec::PerAxis(v) => {
                return Err(Error::InvalidProblem(format!(
                    "shape: {} entries for n = {n}",
                    v.len()
                )))
            }
        };
        let lower: Vec<f64> = self.bounds.iter().map(|b| b[0]).collect();
        let upper: Vec<f64> = self.bounds.iter().map(|b| b[1]).collect();
        let grid = Grid::new(&lower, &upper, &shape)?;
        let boundary = BoundaryData::parse(&self.boundary, n)?;
        let source = match self.f {
            SourceSpec::Constant(v) => Source::constant(v),
            SourceSpec::Expr(s) => Source::parse(&s)?,
        };
        let f0 = match (self.f0, source.constant_value()) {
            (Some(v), _) => v,
            (None, Some(c)) => c,
            (None, None) => {
                return Err(Error::InvalidProblem(
                    "f0: required when f is not constant".into(),
                ))
            }
        };
        Ok(ProblemSpec {
            problem: DirichletProblem::new(self.p, grid, boundary, source, f0)?,
            overrides: self.solver,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_coefficients() {
        let q = Quadratic::parse("quadratic:1,0.5,0,2,0,3,1,2,3,4", 3).unwrap();
        let x = [1.0, -1.0, 2.0];
        // ½(1 + 2 + 12 - 1) + (1 - 2 + 6) + 4
        assert!((q.eval(&x) - 16.0).abs() < 1e-12);
        assert!(Quadratic::parse("quadratic:1,2", 2).is_err());
        assert!(Quadratic::parse("quadratic:1,0,1,x", 2).is_err());
    }

    #[test]
    fn toml_and_json_agree() {
        let toml_text = r#"
n = 3
p = 2
box = [[0, 1], [0, 1], [0, 1]]
shape = 9
boundary = "quadratic:1,0,0,1,0,1"
f = 8

[solver]
max_iter = 30
"#;
        let json_text = r#"{"n": 3, "p": 2, "box": [[0,1],[0,1],[0,1]], "shape": [9,9,9],
            "boundary": "(x^2 + y^2 + z^2)/2", "f": "8", "f0": 8, "solver": {"max_iter": 30}}"#;
        let a = ProblemSpec::parse(toml_text).unwrap();
        let b = ProblemSpec::parse(json_text).unwrap();
        assert_eq!(a.problem.grid, b.problem.grid);
        assert_eq!(a.problem.f0, 8.0);
        assert_eq!(a.overrides.max_iter, Some(30));
        for node in [0, 17, 300] {
            let x = a.problem.grid.coords(node);
            assert!((a.problem.boundary.eval(&x) - b.problem.boundary.eval(&x)).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_sources() {
        let g = Grid::cube(2, 0.0, 1.0, 5).unwrap();
        let psi = BoundaryData::parse("x^2 + y^2", 2).unwrap();
        let err = DirichletProblem::new(
            2,
            g.clone(),
            psi.clone(),
            Source::parse("1 - u").unwrap(),
            0.5,
        );
        assert!(
            matches!(err, Err(Error::InvalidProblem(m)) if m.contains("∂f/∂u") || m.contains("f0"))
        );
        let err = DirichletProblem::new(2, g.clone(), psi.clone(), Source::constant(1.0), 2.0);
        assert!(matches!(err, Err(Error::InvalidProblem(m)) if m.starts_with("f:")));
        assert!(
            DirichletProblem::new(2, g.clone(), psi.clone(), Source::constant(1.0), 0.0).is_err()
        );
        assert!(
            DirichletProblem::new(2, g, psi, Source::parse("4 + exp(u)").unwrap(), 4.0).is_ok()
        );
    }

    #[test]
    fn file_errors_name_the_field() {
        let text =
            "n = 2\np = 1\nbox = [[0,1],[0,1]]\nshape = 5\nboundary = \"quadratic:1,0\"\nf = 1\n";
        let err = ProblemSpec::parse(text).unwrap_err().to_string();
        assert!(err.contains("boundary"), "{err}");
        let text = "n = 2\np = 1\nbox = [[0,1]]\nshape = 5\nboundary = \"x\"\nf = 1\n";
        assert!(ProblemSpec::parse(text)
            .unwrap_err()
            .to_string()
            .contains("box"));
        let text =
            "n = 2\np = 1\nbox = [[0,1],[0,1]]\nshape = 5\nboundary = \"x\"\nf = \"1 + x\"\n";
        assert!(ProblemSpec::parse(text)
            .unwrap_err()
            .to_string()
            .contains("f0"));
    }
}
