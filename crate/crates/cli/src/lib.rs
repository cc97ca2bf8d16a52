//! Command-line front end for the linkage-problem solvers: run a solver on a
//! built-in or file-defined problem and emit a trace, certify (μ, ρ)
//! semimonotonicity of a matrix across a subspace, plan admissible
//! stepsizes, sweep a relaxation parameter over a grid, and cross-check the
//! equivalence of the three iterations.
//!
//! Exit codes follow the solver status mapping: 0 = Converged, 2 = MaxIter,
//! 3 = Diverged, 1 = any error (including parse and I/O failures). The
//! `PROGDEC_LOG` environment variable (`error|warn|info|debug`) controls
//! diagnostic verbosity on standard error.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use rayon::prelude::*;
use serde_json::json;

use progdec_core::io as core_io;
use progdec_core::{
    certify, partial_inverse, problems, solvers, Error, IterateTrace, LinkageProblem, PppaConfig,
    Result, RunOptions, RunStatus, SolverConfig,
};

/// Pairwise trace deviation accepted by `compare`.
pub const COMPARE_TOL: f64 = 1e-8;

#[derive(Parser, Debug)]
#[command(
    name = "progdec",
    version,
    about = "Solvers and certification tools for linkage problems on linear subspaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a solver on a problem and write the iterate trace.
    Solve(SolveArgs),
    /// Check (mu, rho)-semimonotonicity of a matrix across a subspace.
    Certify(CertifyArgs),
    /// Print admissible stepsize ranges for a (mu, rho) certificate.
    Plan(PlanArgs),
    /// Run a solver over a grid of one parameter and tabulate outcomes.
    Sweep(SweepArgs),
    /// Cross-check the decoupling, proximal and splitting iterations.
    Compare(CompareArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SolverKind {
    Progdec,
    Pppa,
    Drs,
    Spingarn,
    ProgdecClassic,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SweepParam {
    Lambda,
    Gamma,
}

/// Problem source: exactly one of a built-in label or a matrix file.
#[derive(Args, Debug, Clone, Default)]
struct ProblemArgs {
    /// Built-in problem: tightness | linear-system | rosenbrock |
    /// double-well | consensus.
    #[arg(long)]
    problem: Option<String>,
    /// Parameter a of the tightness family (default 1).
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Parameter b of the rosenbrock coupling (default 1).
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    /// Matrix CSV file (repeat the flag for consensus blocks).
    #[arg(long)]
    matrix: Vec<PathBuf>,
    /// Shift vector CSV file (the operator is x -> Mx - shift).
    #[arg(long)]
    shift: Option<PathBuf>,
    /// Subspace CSV file whose rows are basis vectors.
    #[arg(long)]
    subspace: Option<PathBuf>,
}

/// Solver selection and stepsizes, shared by solve/sweep/compare.
#[derive(Args, Debug, Clone, Default)]
struct SolverOpts {
    /// Iteration to run (default progdec).
    #[arg(long, value_enum)]
    solver: Option<SolverKind>,
    /// Proximal stepsize gamma (default 1).
    #[arg(long)]
    gamma: Option<f64>,
    /// Sets both relaxation parameters at once.
    #[arg(long)]
    lambda: Option<f64>,
    /// Primal relaxation (default 1, or --lambda).
    #[arg(long = "lambda-x")]
    lambda_x: Option<f64>,
    /// Multiplier relaxation (default 1, or --lambda).
    #[arg(long = "lambda-y")]
    lambda_y: Option<f64>,
    /// Iteration cap (default 10000).
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    /// Residual tolerance; terminate when res <= tol^2 (default 1e-9).
    #[arg(long)]
    tol: Option<f64>,
    /// Certified mu, overriding the problem's certificate.
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    /// Certified rho, overriding the problem's certificate.
    #[arg(long, allow_negative_numbers = true)]
    rho: Option<f64>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    solver: SolverOpts,
    /// Initial primal point, comma-separated (default: projection of ones).
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Initial multiplier, comma-separated (default: projection of ones).
    #[arg(long, allow_hyphen_values = true)]
    y0: Option<String>,
    /// Trace destination (default: standard output).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Trace format (default csv).
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Sampling seed for problem construction (reserved; default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Key=value config file; command-line flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Coefficient on the X-complement displacement.
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    /// Coefficient on the X-projected output displacement.
    #[arg(long, allow_negative_numbers = true)]
    rho: Option<f64>,
    /// Derive mu on the complement from --mu-on-x via the elicitation bound.
    #[arg(long)]
    auto: bool,
    /// Hypothesized mu on X itself (required with --auto).
    #[arg(long = "mu-on-x", allow_negative_numbers = true)]
    mu_on_x: Option<f64>,
    /// Size of the sampled gamma grid in the report (default 5).
    #[arg(long)]
    points: Option<usize>,
    /// Report destination (default: standard output).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Key=value config file; command-line flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PlanArgs {
    /// Certified mu.
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    /// Certified rho.
    #[arg(long, allow_negative_numbers = true)]
    rho: Option<f64>,
    /// Size of the sampled gamma grid (default 5).
    #[arg(long)]
    points: Option<usize>,
    /// Report destination (default: standard output).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Key=value config file; command-line flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    solver: SolverOpts,
    /// Swept parameter (default lambda).
    #[arg(long, value_enum)]
    param: Option<SweepParam>,
    /// First grid value.
    #[arg(long, allow_negative_numbers = true)]
    from: Option<f64>,
    /// Last grid value.
    #[arg(long, allow_negative_numbers = true)]
    to: Option<f64>,
    /// Grid size, at least 2 (default 11).
    #[arg(long)]
    points: Option<usize>,
    /// Table destination (default: standard output).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Key=value config file; command-line flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    solver: SolverOpts,
    /// Initial primal point, comma-separated (default: projection of ones).
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Initial multiplier, comma-separated (default: projection of ones).
    #[arg(long, allow_hyphen_values = true)]
    y0: Option<String>,
    /// Report destination (default: standard output).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Key=value config file; command-line flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Parsed `key = value` config file. Flags take precedence over entries.
#[derive(Debug, Default)]
struct ConfigMap(HashMap<String, String>);

const CONFIG_KEYS: &[&str] = &[
    "problem", "a", "b", "matrix", "shift", "subspace", "solver", "gamma", "lambda", "lambda-x",
    "lambda-y", "max-iter", "tol", "mu", "rho", "mu-on-x", "x0", "y0", "format", "seed", "param",
    "from", "to", "points",
];

impl ConfigMap {
    fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)?;
        let mut map = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(Error::Parse(format!(
                    "{}:{}: expected `key = value`, got `{trimmed}`",
                    path.display(),
                    lineno + 1
                )));
            };
            let key = key.trim().to_ascii_lowercase();
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(Error::Parse(format!(
                    "{}:{}: unknown config key `{key}`",
                    path.display(),
                    lineno + 1
                )));
            }
            map.insert(key, value.trim().to_string());
        }
        Ok(Self(map))
    }

    fn get_str(&self, key: &str) -> Option<String> {
        self.0.get(key).cloned()
    }

    fn get_parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::Parse(format!("config key `{key}`: cannot parse `{raw}`"))),
        }
    }
}

fn pick<T: std::str::FromStr + Copy>(
    flag: Option<T>,
    cfg: &ConfigMap,
    key: &str,
) -> Result<Option<T>> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => cfg.get_parsed(key),
    }
}

fn pick_string(flag: Option<&str>, cfg: &ConfigMap, key: &str) -> Option<String> {
    flag.map(str::to_string).or_else(|| cfg.get_str(key))
}

fn parse_enum<E: ValueEnum>(raw: &str, what: &str) -> Result<E> {
    E::from_str(raw, true).map_err(|_| Error::Parse(format!("invalid {what} `{raw}`")))
}

/// Effective solver settings after merging flags, config entries and
/// defaults.
#[derive(Debug, Clone, Copy)]
struct ResolvedSolver {
    kind: SolverKind,
    gamma: f64,
    lambda_x: f64,
    lambda_y: f64,
    max_iter: usize,
    tol: f64,
    mu: Option<f64>,
    rho: Option<f64>,
}

impl SolverOpts {
    fn resolve(&self, cfg: &ConfigMap) -> Result<ResolvedSolver> {
        let kind = match (self.solver, cfg.get_str("solver")) {
            (Some(k), _) => k,
            (None, Some(raw)) => parse_enum(&raw, "solver")?,
            (None, None) => SolverKind::Progdec,
        };
        let gamma = pick(self.gamma, cfg, "gamma")?.unwrap_or(1.0);
        let lambda = pick(self.lambda, cfg, "lambda")?;
        let lambda_x = pick(self.lambda_x, cfg, "lambda-x")?
            .or(lambda)
            .unwrap_or(1.0);
        let lambda_y = pick(self.lambda_y, cfg, "lambda-y")?
            .or(lambda)
            .unwrap_or(1.0);
        let max_iter = pick(self.max_iter, cfg, "max-iter")?.unwrap_or(10_000);
        let tol = pick(self.tol, cfg, "tol")?.unwrap_or(1e-9);
        Ok(ResolvedSolver {
            kind,
            gamma,
            lambda_x,
            lambda_y,
            max_iter,
            tol,
            mu: pick(self.mu, cfg, "mu")?,
            rho: pick(self.rho, cfg, "rho")?,
        })
    }
}

impl ProblemArgs {
    fn build(&self, cfg: &ConfigMap) -> Result<LinkageProblem> {
        let label = pick_string(self.problem.as_deref(), cfg, "problem");
        let matrices: Vec<PathBuf> = if self.matrix.is_empty() {
            cfg.get_str("matrix")
                .map(|raw| raw.split(',').map(|p| PathBuf::from(p.trim())).collect())
                .unwrap_or_default()
        } else {
            self.matrix.clone()
        };
        let shift = self
            .shift
            .clone()
            .or_else(|| cfg.get_str("shift").map(PathBuf::from));
        let subspace_path = self
            .subspace
            .clone()
            .or_else(|| cfg.get_str("subspace").map(PathBuf::from));

        match label.as_deref() {
            Some(name) if name != "consensus" && !matrices.is_empty() => Err(Error::Parse(
                format!("exactly one problem source: drop --matrix or --problem {name}"),
            )),
            Some("tightness") => {
                let a = pick(self.a, cfg, "a")?.unwrap_or(1.0);
                problems::tightness_problem(a)
            }
            Some("linear-system") => Ok(problems::linear_system_problem()),
            Some("rosenbrock") => {
                let b = pick(self.b, cfg, "b")?.unwrap_or(1.0);
                problems::rosenbrock_problem(b)
            }
            Some("double-well") => Ok(problems::double_well_problem()),
            Some("consensus") => {
                if matrices.is_empty() {
                    return Err(Error::Parse(
                        "consensus needs at least one --matrix file of blocks".into(),
                    ));
                }
                let blocks = matrices
                    .iter()
                    .map(core_io::read_matrix_csv)
                    .collect::<Result<Vec<_>>>()?;
                let b = match &shift {
                    Some(path) => core_io::read_vector_csv(path)?,
                    None => DVector::zeros(blocks[0].nrows()),
                };
                problems::consensus_splitting_problem(&blocks, &b)
            }
            Some(other) => Err(Error::Parse(format!(
                "unknown problem `{other}`; expected tightness | linear-system | rosenbrock \
                 | double-well | consensus"
            ))),
            None => {
                if matrices.len() != 1 {
                    return Err(Error::Parse(
                        "provide exactly one problem source: --problem <label> or one \
                         --matrix with --subspace"
                            .into(),
                    ));
                }
                let subspace_path = subspace_path
                    .ok_or_else(|| Error::Parse("file-defined problems need --subspace".into()))?;
                let matrix = core_io::read_matrix_csv(&matrices[0])?;
                let shift_vec = match &shift {
                    Some(path) => core_io::read_vector_csv(path)?,
                    None => DVector::zeros(matrix.nrows()),
                };
                let subspace = core_io::read_subspace_csv(&subspace_path)?;
                let op = progdec_core::Operator::affine(matrix, shift_vec)?;
                if op.dim() != subspace.dim_ambient() {
                    return Err(Error::DimensionMismatch {
                        context: "matrix vs subspace",
                        expected: subspace.dim_ambient(),
                        got: op.dim(),
                    });
                }
                Ok(LinkageProblem {
                    label: format!("file:{}", matrices[0].display()),
                    op,
                    subspace,
                    known_solutions: Vec::new(),
                    certificate: None,
                    anchored: false,
                    region: None,
                })
            }
        }
    }
}

fn parse_point(raw: &str, dim: usize, what: &str) -> Result<DVector<f64>> {
    let values = raw
        .split(',')
        .map(|f| {
            f.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("{what}: cannot parse `{}`", f.trim())))
        })
        .collect::<Result<Vec<f64>>>()?;
    if values.len() != dim {
        return Err(Error::DimensionMismatch {
            context: "initial point",
            expected: dim,
            got: values.len(),
        });
    }
    Ok(DVector::from_vec(values))
}

/// Initial pair: explicit values when given, otherwise the projections of
/// the all-ones vector onto X and X⊥.
fn initial_pair(
    problem: &LinkageProblem,
    x0: Option<&str>,
    y0: Option<&str>,
    cfg: &ConfigMap,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let n = problem.dim();
    let ones = DVector::from_element(n, 1.0);
    let x0 = match pick_string(x0, cfg, "x0") {
        Some(raw) => parse_point(&raw, n, "--x0")?,
        None => problem.subspace.project(&ones)?,
    };
    let y0 = match pick_string(y0, cfg, "y0") {
        Some(raw) => parse_point(&raw, n, "--y0")?,
        None => problem.subspace.project_complement(&ones)?,
    };
    Ok((x0, y0))
}

fn open_sink(output: Option<&Path>) -> Result<Box<dyn Write>> {
    match output {
        Some(path) => Ok(Box::new(fs::File::create(path)?)),
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

fn write_json(output: Option<&Path>, doc: &serde_json::Value) -> Result<()> {
    let mut sink = open_sink(output)?;
    serde_json::to_writer_pretty(&mut sink, doc)
        .map_err(|e| Error::Parse(format!("json serialization: {e}")))?;
    writeln!(sink)?;
    Ok(())
}

fn run_options<'a>(problem: &'a LinkageProblem, oblique: Option<(f64, f64)>) -> RunOptions<'a> {
    RunOptions {
        known_solution: problem.solution().map(|g| (&g.primal, &g.dual)),
        oblique,
        region: problem.region.as_ref(),
    }
}

fn run_one(
    problem: &LinkageProblem,
    rs: &ResolvedSolver,
    x0: DVector<f64>,
    y0: DVector<f64>,
) -> Result<IterateTrace> {
    let oblique = match (rs.mu, rs.rho) {
        (Some(mu), Some(rho)) => Some((mu, rho)),
        _ => problem.oblique(),
    };
    let opts = run_options(problem, oblique);
    let base =
        SolverConfig::new(rs.gamma, rs.lambda_x, rs.lambda_y).with_termination(rs.max_iter, rs.tol);
    let trace = match rs.kind {
        SolverKind::Progdec => {
            solvers::run_progdec(&problem.op, &problem.subspace, &base, x0, y0, &opts)
        }
        SolverKind::Spingarn => {
            let cfg = SolverConfig::new(1.0, 1.0, 1.0).with_termination(rs.max_iter, rs.tol);
            solvers::run_progdec(&problem.op, &problem.subspace, &cfg, x0, y0, &opts)
        }
        SolverKind::ProgdecClassic => {
            let (mu, rho) = oblique.ok_or_else(|| {
                Error::Parse(
                    "the classic preset needs --mu and --rho (or a certified problem)".into(),
                )
            })?;
            let cfg = certify::progdec_classic_preset(rs.gamma, mu, rho)?
                .with_termination(rs.max_iter, rs.tol);
            solvers::run_progdec(&problem.op, &problem.subspace, &cfg, x0, y0, &opts)
        }
        SolverKind::Drs => {
            let s0 = &x0 - &y0 / rs.gamma;
            if rs.lambda_x != rs.lambda_y {
                log::warn!(
                    "drs uses a single relaxation; taking lambda = {}",
                    rs.lambda_x
                );
            }
            solvers::run_drs(
                &problem.op,
                &problem.subspace,
                rs.gamma,
                rs.lambda_x,
                s0,
                rs.max_iter,
                rs.tol,
                &opts,
            )
        }
        SolverKind::Pppa => {
            if problem.op.as_affine().is_some() {
                let pcfg = PppaConfig::structured(&problem.subspace, &base, oblique);
                let t = partial_inverse::partial_inverse_affine(&problem.op, &problem.subspace)?;
                let z0 = &x0 + &y0;
                let zstar = problem.solution().map(|g| &g.primal + &g.dual);
                solvers::run_pppa(&t, &pcfg, z0, zstar.as_ref())
            } else {
                log::info!(
                    "nonlinear operator: running the preconditioned proximal step in \
                     decoupling coordinates"
                );
                solvers::run_progdec(&problem.op, &problem.subspace, &base, x0, y0, &opts)
            }
        }
    };
    Ok(trace)
}

fn cmd_solve(args: &SolveArgs) -> Result<i32> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let problem = args.problem.build(&cfg)?;
    let rs = args.solver.resolve(&cfg)?;
    let format = match (args.format, cfg.get_str("format")) {
        (Some(f), _) => f,
        (None, Some(raw)) => parse_enum(&raw, "format")?,
        (None, None) => OutputFormat::Csv,
    };
    let (x0, y0) = initial_pair(&problem, args.x0.as_deref(), args.y0.as_deref(), &cfg)?;
    let trace = run_one(&problem, &rs, x0, y0)?;
    let mut sink = open_sink(args.output.as_deref())?;
    match format {
        OutputFormat::Csv => core_io::write_trace_csv(&mut sink, &trace)?,
        OutputFormat::Json => core_io::write_trace_json(&mut sink, &trace)?,
    }
    if let Some(err) = &trace.error {
        eprintln!("error: {err}");
    }
    Ok(trace.status.exit_code())
}

/// Gamma grid for reports: interior points of a bounded interval, or an
/// arithmetic ladder above the lower endpoint when unbounded.
fn gamma_grid(plan: &certify::StepsizePlan, points: usize) -> Vec<f64> {
    let (lo, hi) = plan.gamma_interval();
    if hi.is_finite() {
        (1..=points)
            .map(|i| lo + (hi - lo) * i as f64 / (points + 1) as f64)
            .collect()
    } else {
        let step = (plan.suggested_gamma() - lo).max(1.0);
        (1..=points).map(|i| lo + step * i as f64).collect()
    }
}

fn plan_json(plan: &certify::StepsizePlan, points: usize) -> serde_json::Value {
    let (lo, hi) = plan.gamma_interval();
    let grid: Vec<serde_json::Value> = gamma_grid(plan, points)
        .into_iter()
        .map(|g| {
            json!({
                "gamma": g,
                "lambda_x_sup": plan.lambda_x_sup(g),
                "lambda_y_sup": plan.lambda_y_sup(g),
            })
        })
        .collect();
    let suggested = plan.suggested_config(0.5);
    json!({
        "gamma_interval": [lo, hi],
        "suggested_gamma": plan.suggested_gamma(),
        "suggested_config": {
            "gamma": suggested.gamma,
            "lambda_x": suggested.lambda_x,
            "lambda_y": suggested.lambda_y,
        },
        "grid": grid,
    })
}

fn cmd_certify(args: &CertifyArgs) -> Result<i32> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let problem = args.problem.build(&cfg)?;
    let (matrix, _) = problem.op.as_affine().ok_or(Error::NotAffine)?;
    let points = pick(args.points, &cfg, "points")?.unwrap_or(5);
    let flag_mu = pick(args.mu, &cfg, "mu")?;
    let flag_rho = pick(args.rho, &cfg, "rho")?;

    let mut elicitation = None;
    let (mu, rho) = if args.auto {
        let mu_on_x = pick(args.mu_on_x, &cfg, "mu-on-x")?
            .ok_or_else(|| Error::Parse("--auto requires --mu-on-x".into()))?;
        let rho = flag_rho.unwrap_or(0.0);
        let report = certify::elicitation_bound(&matrix, &problem.subspace, mu_on_x, rho)?;
        let mu = report.mu_out;
        elicitation = Some(json!({
            "mu_on_x": mu_on_x,
            "beta": report.beta,
            "sigma": report.sigma,
            "mu_out": report.mu_out,
        }));
        (mu, rho)
    } else {
        let fallback = problem.oblique();
        let mu = flag_mu.or(fallback.map(|o| o.0)).ok_or_else(|| {
            Error::Parse("provide --mu and --rho (or a certified built-in problem)".into())
        })?;
        let rho = flag_rho.or(fallback.map(|o| o.1)).ok_or_else(|| {
            Error::Parse("provide --mu and --rho (or a certified built-in problem)".into())
        })?;
        (mu, rho)
    };

    let cert = certify::check_semimonotone_linear(&matrix, &problem.subspace, mu, rho)?;
    let plan = match certify::stepsize_plan(mu, rho) {
        Ok(plan) => plan_json(&plan, points),
        Err(Error::EmptyPlan { .. }) => json!("empty"),
        Err(e) => return Err(e),
    };
    let mut doc = json!({
        "label": problem.label,
        "mu": mu,
        "rho": rho,
        "margin": cert.margin,
        "feasible": cert.feasible,
        "plan": plan,
    });
    if let Some(el) = elicitation {
        doc["elicitation"] = el;
    }
    write_json(args.output.as_deref(), &doc)?;
    Ok(0)
}

fn cmd_plan(args: &PlanArgs) -> Result<i32> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let mu = pick(args.mu, &cfg, "mu")?.ok_or_else(|| Error::Parse("plan requires --mu".into()))?;
    let rho =
        pick(args.rho, &cfg, "rho")?.ok_or_else(|| Error::Parse("plan requires --rho".into()))?;
    let points = pick(args.points, &cfg, "points")?.unwrap_or(5);
    let doc = match certify::stepsize_plan(mu, rho) {
        Ok(plan) => {
            let mut doc = plan_json(&plan, points);
            doc["mu"] = json!(mu);
            doc["rho"] = json!(rho);
            doc["empty"] = json!(false);
            doc
        }
        Err(Error::EmptyPlan { product }) => json!({
            "mu": mu,
            "rho": rho,
            "empty": true,
            "product": product,
        }),
        Err(e) => return Err(e),
    };
    write_json(args.output.as_deref(), &doc)?;
    Ok(0)
}

fn cmd_sweep(args: &SweepArgs) -> Result<i32> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let problem = args.problem.build(&cfg)?;
    let rs = args.solver.resolve(&cfg)?;
    let param = match (args.param, cfg.get_str("param")) {
        (Some(p), _) => p,
        (None, Some(raw)) => parse_enum(&raw, "param")?,
        (None, None) => SweepParam::Lambda,
    };
    let from = pick(args.from, &cfg, "from")?
        .ok_or_else(|| Error::Parse("sweep requires --from".into()))?;
    let to =
        pick(args.to, &cfg, "to")?.ok_or_else(|| Error::Parse("sweep requires --to".into()))?;
    let points = pick(args.points, &cfg, "points")?.unwrap_or(11);
    if points < 2 {
        return Err(Error::Parse(format!(
            "sweep needs --points >= 2, got {points}"
        )));
    }

    let (x0, y0) = initial_pair(&problem, None, None, &cfg)?;
    let oblique = match (rs.mu, rs.rho) {
        (Some(mu), Some(rho)) => Some((mu, rho)),
        _ => problem.oblique(),
    };
    let opts = run_options(&problem, oblique);
    let values: Vec<f64> = (0..points)
        .map(|i| from + (to - from) * i as f64 / (points - 1) as f64)
        .collect();

    // grid points are independent runs; order is preserved by collection
    let rows: Vec<(f64, RunStatus, Option<f64>, Option<f64>)> = values
        .par_iter()
        .map(|&value| {
            let (gamma, lx, ly) = match param {
                SweepParam::Lambda => (rs.gamma, value, value),
                SweepParam::Gamma => (value, rs.lambda_x, rs.lambda_y),
            };
            let mut run_cfg =
                SolverConfig::new(gamma, lx, ly).with_termination(rs.max_iter, rs.tol);
            run_cfg.record_diagnostics = false;
            let trace = solvers::run_progdec(
                &problem.op,
                &problem.subspace,
                &run_cfg,
                x0.clone(),
                y0.clone(),
                &opts,
            );
            let radius =
                solvers::spectral_radius_linear(&problem.op, &problem.subspace, &run_cfg).ok();
            (value, trace.status, trace.final_res(), radius)
        })
        .collect();

    let mut sink = open_sink(args.output.as_deref())?;
    writeln!(sink, "value,status,final_res,spectral_radius")?;
    for (value, status, final_res, radius) in rows {
        writeln!(
            sink,
            "{},{},{},{}",
            core_io::csv_cell(Some(value)),
            status,
            core_io::csv_cell(final_res),
            core_io::csv_cell(radius),
        )?;
    }
    Ok(0)
}

/// Per-iteration (x, y) pairs of one solver, mapped to decoupling
/// coordinates.
struct MappedTrace {
    name: &'static str,
    rows: Vec<(DVector<f64>, DVector<f64>)>,
}

fn cmd_compare(args: &CompareArgs) -> Result<i32> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let problem = args.problem.build(&cfg)?;
    let rs = args.solver.resolve(&cfg)?;
    let iterations = pick(args.solver.max_iter, &cfg, "max-iter")?.unwrap_or(200);

    if iterations == 0 {
        let doc = json!({
            "solvers": ["progdec"],
            "iterations": 0,
            "pairs": {},
            "max_deviation": 0.0,
        });
        write_json(args.output.as_deref(), &doc)?;
        return Ok(0);
    }

    let (x0, y0) = initial_pair(&problem, args.x0.as_deref(), args.y0.as_deref(), &cfg)?;
    let oblique = match (rs.mu, rs.rho) {
        (Some(mu), Some(rho)) => Some((mu, rho)),
        _ => problem.oblique(),
    };
    let opts = run_options(&problem, oblique);
    // tol = 0 runs every solver to the same iteration cap so rows align
    let mut base =
        SolverConfig::new(rs.gamma, rs.lambda_x, rs.lambda_y).with_termination(iterations, 0.0);
    base.record_diagnostics = false;

    let mut traces: Vec<MappedTrace> = Vec::new();

    let progdec = solvers::run_progdec(
        &problem.op,
        &problem.subspace,
        &base,
        x0.clone(),
        y0.clone(),
        &opts,
    );
    if progdec.status == RunStatus::Error {
        return Err(Error::Parse(format!(
            "progdec failed: {}",
            progdec.error.unwrap_or_default()
        )));
    }
    traces.push(MappedTrace {
        name: "progdec",
        rows: progdec
            .rows
            .iter()
            .map(|r| (r.x.clone(), r.y.clone()))
            .collect(),
    });

    if problem.op.as_affine().is_some() {
        let pcfg = PppaConfig::structured(&problem.subspace, &base, oblique);
        let t = partial_inverse::partial_inverse_affine(&problem.op, &problem.subspace)?;
        let z0 = &x0 + &y0;
        let zstar = problem.solution().map(|g| &g.primal + &g.dual);
        let pppa = solvers::run_pppa(&t, &pcfg, z0, zstar.as_ref());
        if pppa.status == RunStatus::Error {
            return Err(Error::Parse(format!(
                "pppa failed: {}",
                pppa.error.unwrap_or_default()
            )));
        }
        traces.push(MappedTrace {
            name: "pppa",
            rows: pppa
                .rows
                .iter()
                .map(|r| {
                    let x = problem.subspace.projector() * &r.x;
                    let y = &r.x - &x;
                    (x, y)
                })
                .collect(),
        });
    } else {
        log::info!("nonlinear operator: the z-space proximal run is skipped");
    }

    if rs.lambda_x == rs.lambda_y {
        let s0 = &x0 - &y0 / rs.gamma;
        let drs = solvers::run_drs(
            &problem.op,
            &problem.subspace,
            rs.gamma,
            rs.lambda_x,
            s0,
            iterations,
            0.0,
            &opts,
        );
        if drs.status == RunStatus::Error {
            return Err(Error::Parse(format!(
                "drs failed: {}",
                drs.error.unwrap_or_default()
            )));
        }
        traces.push(MappedTrace {
            name: "drs",
            rows: drs
                .rows
                .iter()
                .map(|r| (r.x.clone(), r.y.clone()))
                .collect(),
        });
    } else {
        log::info!("lambda_x != lambda_y: splitting run skipped");
    }

    let compared = traces.iter().map(|t| t.rows.len()).min().unwrap_or(0);
    let mut pairs = serde_json::Map::new();
    let mut max_deviation: f64 = 0.0;
    for i in 0..traces.len() {
        for j in (i + 1)..traces.len() {
            let mut dev: f64 = 0.0;
            for k in 0..compared {
                let (xa, ya) = &traces[i].rows[k];
                let (xb, yb) = &traces[j].rows[k];
                dev = dev.max((xa - xb).norm()).max((ya - yb).norm());
            }
            pairs.insert(format!("{}/{}", traces[i].name, traces[j].name), json!(dev));
            max_deviation = max_deviation.max(dev);
        }
    }

    let doc = json!({
        "solvers": traces.iter().map(|t| t.name).collect::<Vec<_>>(),
        "iterations": compared,
        "pairs": pairs,
        "max_deviation": max_deviation,
    });
    write_json(args.output.as_deref(), &doc)?;
    Ok(if max_deviation <= COMPARE_TOL { 0 } else { 1 })
}

fn init_logging() {
    use std::sync::Once;
    static ONCE: Once = Once::new();
    ONCE.call_once(|| {
        let env = env_logger::Env::new().filter_or("PROGDEC_LOG", "warn");
        let _ = env_logger::Builder::from_env(env)
            .format_timestamp(None)
            .try_init();
    });
}

/// Parse arguments and dispatch; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Plan(args) => cmd_plan(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Compare(args) => cmd_compare(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
