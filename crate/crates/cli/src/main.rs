//! `ppsh`: evaluate `M_p`, run the lemma verifier, print σ-reductions,
//! and solve Dirichlet problems.
//!
//! Exit codes: 0 success, 1 a check or solve failed, 2 bad usage or input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ppsh_core::calculus::{grad_mp_adjugate, grad_tilde_mp};
use ppsh_core::cone::{cone_report, ConeStatus};
use ppsh_core::operator::{mp, tilde_mp, SymMatrix};
use ppsh_core::solver::{
    check_barrier, compute_barrier, monitor_estimates, newton_solve, read_solution_csv,
    solution_csv, ProblemSpec, SolverConfig,
};
use ppsh_core::sympoly::mp_sigma;
use ppsh_core::verifier::{run_checks, CheckName, VerifierConfig};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "ppsh",
    version,
    about = "The p-plurisubharmonic Monge–Ampère operator M_p"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate M_p, its normalized root, the cone report and the gradient.
    Eval(EvalArgs),
    /// Run the seeded lemma checks and print a JSON report.
    Verify(VerifyArgs),
    /// Print the σ-basis representation of M_p.
    Reduce(ReduceArgs),
    /// Solve a Dirichlet problem and its barrier; write the solution CSV.
    Solve(SolveArgs),
    /// Compute the interior-estimate monitors for a solution and barrier.
    Monitor(MonitorArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args)]
struct Common {
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Leave the timestamp out of JSON output.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// `diag:3,2,1`, `full:a11,a12,…` (row-major), or a CSV file.
    #[arg(long)]
    matrix: String,
    #[arg(long)]
    p: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct VerifyArgs {
    /// Comma-separated `n:p` pairs; every p ≤ n ≤ 6 when absent.
    #[arg(long)]
    dims: Option<String>,
    #[arg(long, default_value_t = 500)]
    samples: usize,
    #[arg(long, env = "PPSH_SEED", default_value_t = 42)]
    seed: u64,
    /// Comma-separated check names; the default suite when absent.
    #[arg(long)]
    checks: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    /// Arrowhead strength constant.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SolveArgs {
    /// Problem file, TOML or JSON.
    #[arg(long)]
    problem: PathBuf,
    /// Where to write the JSON solver report; stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Skip the barrier solve (the CSV `w` column stays empty).
    #[arg(long)]
    no_barrier: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct MonitorArgs {
    #[arg(long)]
    problem: PathBuf,
    /// Solution CSV from `solve`, with `u` and `w` columns. Solved afresh
    /// when absent.
    #[arg(long)]
    solution: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[command(flatten)]
    common: Common,
}

enum CliError {
    /// Bad arguments or input files.
    Usage(String),
    /// A check failed or a solve did not converge.
    Failed(String),
}

type CliResult<T> = Result<T, CliError>;

fn usage(field: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("{field}: {e}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval(a) => eval(a),
        Command::Verify(a) => verify(a),
        Command::Reduce(a) => reduce(a),
        Command::Solve(a) => solve(a),
        Command::Monitor(a) => monitor(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Failed(msg)) => {
            eprintln!("ppsh: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("ppsh: {msg}");
            ExitCode::from(2)
        }
    }
}

fn emit(common: &Common, text: &str) -> CliResult<()> {
    match &common.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| usage("--out", format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn with_timestamp(common: &Common, mut v: Value) -> Value {
    if !common.no_timestamp {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        v["generated_at_unix"] = json!(secs);
    }
    v
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn read(path: &Path, field: &str) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| usage(field, format!("{}: {e}", path.display())))
}

fn parse_list(field: &str, body: &str) -> CliResult<Vec<f64>> {
    body.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| usage(field, format!("bad number '{s}'")))
        })
        .collect()
}

/// `diag:…`, `full:…` or a CSV file with one matrix row per line.
fn parse_matrix(spec: &str) -> CliResult<SymMatrix> {
    let field = "--matrix";
    if let Some(body) = spec.strip_prefix("diag:") {
        return SymMatrix::diag(&parse_list(field, body)?).map_err(|e| usage(field, e));
    }
    let rows: Vec<Vec<f64>> = if let Some(body) = spec.strip_prefix("full:") {
        let v = parse_list(field, body)?;
        let n = (v.len() as f64).sqrt().round() as usize;
        if n == 0 || n * n != v.len() {
            return Err(usage(
                field,
                format!("{} entries is not a square count", v.len()),
            ));
        }
        v.chunks(n).map(<[f64]>::to_vec).collect()
    } else {
        read(Path::new(spec), field)?
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| parse_list(field, l))
            .collect::<CliResult<_>>()?
    };
    SymMatrix::from_rows(&rows).map_err(|e| usage(field, e))
}

fn eval(a: EvalArgs) -> CliResult<()> {
    let m = parse_matrix(&a.matrix)?;
    let n = m.n();
    let value = mp(&m, a.p).map_err(|e| usage("--p", e))?;
    let report = cone_report(&m, a.p).map_err(|e| usage("--p", e))?;
    let tilde = tilde_mp(&m, a.p).ok().and_then(|v| v.tilde);
    let grad = grad_mp_adjugate(&m, a.p).map_err(|e| usage("--matrix", e))?;
    let rows = |g: &ppsh_core::calculus::GradientMatrix| -> Vec<Vec<f64>> {
        (0..n)
            .map(|k| (0..n).map(|l| g.get(k, l)).collect())
            .collect()
    };
    let tilde_grad = grad_tilde_mp(&m, a.p).ok().map(|g| rows(&g));
    let status = match report.status {
        ConeStatus::StrictInterior => "strict-interior",
        ConeStatus::ClosureBoundary => "closure-boundary",
        ConeStatus::Outside => "outside",
    };
    match a.common.format.unwrap_or(Format::Text) {
        Format::Text => {
            let mut s = format!("n={n}\np={}\nmp={}\n", a.p, value.mp);
            match tilde {
                Some(t) => s.push_str(&format!("tilde={t}\n")),
                None => s.push_str("tilde=undefined\n"),
            }
            s.push_str(&format!(
                "margin={}\nstatus={status}\nwitness={:?}\n",
                report.margin,
                report.witness.indices()
            ));
            for (k, row) in rows(&grad).iter().enumerate() {
                let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                s.push_str(&format!("gradient[{}]={}\n", k + 1, cells.join(",")));
            }
            emit(&a.common, &s)
        }
        Format::Json => {
            let v = json!({
                "n": n,
                "p": a.p,
                "mp": value.mp,
                "tilde": tilde,
                "margin": report.margin,
                "status": status,
                "witness": report.witness.indices(),
                "gradient": rows(&grad),
                "tilde_gradient": tilde_grad,
            });
            emit(&a.common, &pretty(&with_timestamp(&a.common, v)))
        }
        Format::Csv => Err(usage("--format", "eval supports json or text")),
    }
}

fn parse_dims(text: &str) -> CliResult<Vec<(usize, usize)>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (n, p) = pair
                .trim()
                .split_once(':')
                .ok_or_else(|| usage("--dims", format!("expected n:p, got '{pair}'")))?;
            let n = n
                .parse()
                .map_err(|_| usage("--dims", format!("bad n in '{pair}'")))?;
            let p = p
                .parse()
                .map_err(|_| usage("--dims", format!("bad p in '{pair}'")))?;
            Ok((n, p))
        })
        .collect()
}

fn verify(a: VerifyArgs) -> CliResult<()> {
    let mut cfg = VerifierConfig {
        samples: a.samples,
        seed: a.seed,
        delta: a.delta,
        c: a.c,
        ..VerifierConfig::default()
    };
    if let Some(d) = &a.dims {
        cfg.dims = parse_dims(d)?;
    }
    cfg.validate().map_err(|e| usage("config", e))?;
    let checks: Vec<CheckName> = match &a.checks {
        Some(list) => list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<CheckName>()
                    .map_err(|e| usage("--checks", e))
            })
            .collect::<CliResult<_>>()?,
        None => CheckName::DEFAULT.to_vec(),
    };
    let results = run_checks(&cfg, &checks).map_err(|e| usage("config", e))?;
    let pass = results.values().all(|r| r.pass);
    match a.common.format.unwrap_or(Format::Json) {
        Format::Json => {
            let v = json!({ "config": cfg, "pass": pass, "results": results });
            emit(&a.common, &pretty(&with_timestamp(&a.common, v)))?;
        }
        Format::Text => {
            let mut s = String::new();
            for (name, r) in &results {
                s.push_str(&format!(
                    "{name}: {} ({} cases, {} failures)\n",
                    if r.pass { "pass" } else { "FAIL" },
                    r.cases,
                    r.failure_count
                ));
            }
            emit(&a.common, &s)?;
        }
        Format::Csv => return Err(usage("--format", "verify supports json or text")),
    }
    if pass {
        Ok(())
    } else {
        let failed: Vec<&str> = results
            .values()
            .filter(|r| !r.pass)
            .map(|r| r.check.as_str())
            .collect();
        Err(CliError::Failed(format!(
            "checks failed: {}",
            failed.join(", ")
        )))
    }
}

fn reduce(a: ReduceArgs) -> CliResult<()> {
    let poly = mp_sigma(a.n, a.p).map_err(|e| usage("--n/--p", e))?;
    match a.common.format.unwrap_or(Format::Text) {
        Format::Text => emit(&a.common, &format!("{}\n", poly.to_canonical_string())),
        Format::Json => {
            let v = json!({
                "n": a.n,
                "p": a.p,
                "canonical": poly.to_canonical_string(),
                "polynomial": poly.to_json(),
            });
            emit(&a.common, &pretty(&with_timestamp(&a.common, v)))
        }
        Format::Csv => Err(usage("--format", "reduce supports json or text")),
    }
}

fn load_problem(path: &Path) -> CliResult<(ProblemSpec, SolverConfig)> {
    let spec = ProblemSpec::parse(&read(path, "--problem")?).map_err(|e| usage("--problem", e))?;
    let cfg = spec.overrides.apply(SolverConfig::default());
    cfg.validate().map_err(|e| usage("--problem", e))?;
    Ok((spec, cfg))
}

fn solve(a: SolveArgs) -> CliResult<()> {
    let (spec, cfg) = load_problem(&a.problem)?;
    let prob = &spec.problem;
    let (u, report) =
        newton_solve(prob, &cfg).map_err(|e| CliError::Failed(format!("solve: {e}")))?;
    let mut summary = json!({ "solution": report, "config": cfg });
    let mut w = None;
    if report.converged && !a.no_barrier {
        let (field, barrier) = compute_barrier(prob, &u, &cfg)
            .map_err(|e| CliError::Failed(format!("barrier: {e}")))?;
        summary["barrier"] = json!(barrier);
        w = Some(field);
    }
    let summary = with_timestamp(&a.common, summary);
    match a.common.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let csv = solution_csv(&u, w.as_ref(), prob.p)
                .map_err(|e| CliError::Failed(e.to_string()))?;
            emit(&a.common, &csv)?;
            match &a.report {
                Some(path) => fs::write(path, pretty(&summary))
                    .map_err(|e| usage("--report", format!("{}: {e}", path.display())))?,
                None if a.common.out.is_some() => print!("{}", pretty(&summary)),
                None => eprint!("{}", pretty(&summary)),
            }
        }
        Format::Json => emit(&a.common, &pretty(&summary))?,
        Format::Text => return Err(usage("--format", "solve supports csv or json")),
    }
    if report.converged {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "no convergence: residual {} after {} iterations",
            report.residual, report.iterations
        )))
    }
}

fn monitor(a: MonitorArgs) -> CliResult<()> {
    let (spec, cfg) = load_problem(&a.problem)?;
    let prob = &spec.problem;
    let (u, w) = match &a.solution {
        Some(path) => {
            let (u, w) = read_solution_csv(&read(path, "--solution")?, &prob.grid)
                .map_err(|e| usage("--solution", e))?;
            let w = w.ok_or_else(|| usage("--solution", "no barrier column 'w'"))?;
            check_barrier(&u, &w).map_err(|e| CliError::Failed(e.to_string()))?;
            (u, w)
        }
        None => {
            let (u, report) =
                newton_solve(prob, &cfg).map_err(|e| CliError::Failed(format!("solve: {e}")))?;
            if !report.converged {
                return Err(CliError::Failed("solve did not converge".into()));
            }
            let (w, _) = compute_barrier(prob, &u, &cfg)
                .map_err(|e| CliError::Failed(format!("barrier: {e}")))?;
            (u, w)
        }
    };
    let r = monitor_estimates(&u, &w, prob, a.delta).map_err(|e| usage("--delta", e))?;
    match a.common.format.unwrap_or(Format::Json) {
        Format::Json => emit(&a.common, &pretty(&with_timestamp(&a.common, json!(r)))),
        Format::Text => {
            let mut s = format!(
                "delta={}\npogorelov={}\npogorelov_node={:?}\n",
                r.delta, r.pogorelov, r.pogorelov_node
            );
            if let Some(g) = &r.gradient {
                s.push_str(&format!(
                    "gradient={}\ngradient_node={:?}\nradius={}\n",
                    g.value, g.node, g.radius
                ));
            }
            emit(&a.common, &s)
        }
        Format::Csv => Err(usage("--format", "monitor supports json or text")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_parse() {
        assert!(matches!(parse_dims("3:2, 4:1"), Ok(d) if d == vec![(3, 2), (4, 1)]));
        assert!(parse_dims("3:x").is_err());
        assert!(parse_dims("3").is_err());
    }

    #[test]
    fn inline_matrices() {
        let a = parse_matrix("full:1,2,2,5").ok().unwrap();
        assert_eq!(a.get(0, 1), 2.0);
        assert_eq!(parse_matrix("diag:4 5").ok().unwrap().get(1, 1), 5.0);
        assert!(parse_matrix("full:1,2,3,4").is_err());
        assert!(parse_matrix("/nonexistent/matrix.csv").is_err());
    }
}
