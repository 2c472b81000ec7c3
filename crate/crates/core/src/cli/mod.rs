//! The `regtan` command line: fit, tangent, influence, query, cv,
//! lissa-check and repro. Every run writes a `<subcommand>.manifest.json`
//! next to its outputs.

mod io;
mod repro;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde::Serialize;
use serde_json::value::RawValue;

use crate::active::{Heuristic, HeuristicKind, Scorer};
use crate::cv::{log_grid, objective_table, optimize_s, SObjective, SOptConfig};
use crate::error::{Error, Result};
use crate::influence::{influence_report, regularity_tangent, InverseHessian, TangentMethod};
use crate::model::{noise_variance, synthetic, FeatureMap, Problem, RawInput, Regularizer};
use crate::optimize::{fit_normal_equations, lissa_sgdf_deviation, run_sgd, TrainConfig};

pub use io::{csv_float, json_float, read_candidates, read_dataset, RunManifest};
pub use repro::{masked_relative_gap, repro_curves, ReproConfig, ReproCurves};

/// Largest LiSSA/SGDF deviation accepted by `lissa-check`.
pub const LISSA_CHECK_TOLERANCE: f64 = 1e-12;

/// Largest `‖Hθ̇ + ρ‖/‖ρ‖` accepted from `tangent --tangent-method sgdf`.
pub const SGDF_RESIDUAL_LIMIT: f64 = 1e-2;

#[derive(Parser, Debug)]
#[command(name = "regtan", version, about = "Regularity tangents, influence functions and query heuristics")]
struct Cli {
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Train θ* and write it as JSON.
    Fit(FitArgs),
    /// Compute the regularity tangent θ̇ = dθ*/ds.
    Tangent(TangentArgs),
    /// Per-point influence table for the training set.
    Influence(InfluenceArgs),
    /// Score and rank query candidates.
    Query(QueryArgs),
    /// Tabulate LOOCV and Gpert over a log-grid of s.
    Cv(CvArgs),
    /// Compare LiSSA and frozen-parameter SGDF tangent streams.
    LissaCheck(LissaArgs),
    /// Regenerate the curve data of the gapped polynomial example.
    Repro(ReproArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum RegArg {
    L2,
    Masked,
    SharedMean,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum FitMethod {
    Normal,
    Sgd,
    Adam,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum TangentArg {
    Direct,
    Cg,
    Sgdf,
}

#[derive(Args, Debug, Serialize)]
struct ModelArgs {
    /// Training CSV with header `x,y`.
    data: PathBuf,
    #[arg(long, default_value_t = 5)]
    degree: usize,
    #[arg(long, value_enum, default_value_t = RegArg::L2)]
    reg: RegArg,
    /// Penalized parameter indices for `--reg masked`.
    #[arg(long, value_delimiter = ',')]
    mask: Vec<usize>,
    /// Center θ₀ for `--reg shared-mean`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    center: Vec<f64>,
    #[arg(long, default_value_t = 0.05)]
    s: f64,
}

impl ModelArgs {
    fn problem(&self) -> Result<Problem> {
        let map = FeatureMap::Polynomial { degree: self.degree };
        let reg = match self.reg {
            RegArg::L2 => Regularizer::L2,
            RegArg::Masked => Regularizer::masked(self.mask.iter().copied()),
            RegArg::SharedMean => {
                let center = if self.center.is_empty() { vec![0.0; map.dim()] } else { self.center.clone() };
                Regularizer::SharedMeanL2 { center: DVector::from_vec(center) }
            }
        };
        Problem::new(read_dataset(&self.data)?, map, reg, self.s)
    }
}

#[derive(Args, Debug, Serialize)]
struct SgdArgs {
    #[arg(long, default_value_t = 5e-4)]
    eta: f64,
    #[arg(long, default_value_t = 200_000)]
    epochs: usize,
}

#[derive(Args, Debug, Serialize)]
struct FitArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value_t = FitMethod::Normal)]
    method: FitMethod,
    #[command(flatten)]
    sgd: SgdArgs,
}

#[derive(Args, Debug, Serialize)]
struct TangentArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value_t = TangentArg::Direct)]
    tangent_method: TangentArg,
    #[command(flatten)]
    sgd: SgdArgs,
}

#[derive(Args, Debug, Serialize)]
struct InfluenceArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Labeled test CSV; adds the total I_up,loss on it.
    #[arg(long)]
    test: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct QueryArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Candidate CSV with header `x` (optional `y`).
    #[arg(long)]
    candidates: PathBuf,
    #[arg(long, default_value = "sld-unlabeled")]
    heuristic: String,
    /// `all` or comma-separated training indices.
    #[arg(long, default_value = "all")]
    reference_set: String,
}

#[derive(Args, Debug, Serialize)]
struct CvArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 20)]
    grid: usize,
    /// `lo,hi` bounds of s.
    #[arg(long, value_delimiter = ',', default_values_t = [1e-3, 1e1])]
    bounds: Vec<f64>,
}

#[derive(Args, Debug, Serialize)]
struct LissaArgs {
    #[arg(long, default_value_t = 1e-3)]
    eta: f64,
    #[arg(long, default_value_t = 100)]
    iterations: usize,
    #[arg(long, default_value_t = synthetic::REFERENCE_REGULARITY)]
    s: f64,
}

#[derive(Args, Debug, Serialize)]
struct ReproArgs {
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long, default_value_t = 20)]
    grid: usize,
}

/// Parse `argv` (program name first), run, and return the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    std::fs::create_dir_all(&cli.out_dir)?;
    let (name, inputs) = match &cli.command {
        Command::Fit(a) => ("fit", vec![a.model.data.clone()]),
        Command::Tangent(a) => ("tangent", vec![a.model.data.clone()]),
        Command::Influence(a) => ("influence", [Some(a.model.data.clone()), a.test.clone()].into_iter().flatten().collect()),
        Command::Query(a) => ("query", vec![a.model.data.clone(), a.candidates.clone()]),
        Command::Cv(a) => ("cv", vec![a.model.data.clone()]),
        Command::LissaCheck(_) => ("lissa-check", Vec::new()),
        Command::Repro(_) => ("repro", Vec::new()),
    };
    let config = serde_json::to_value(&cli.command)?;
    let mut manifest = RunManifest::new(name, cli.seed, config);
    manifest.inputs = inputs;
    let out = Output { dir: &cli.out_dir };

    let (outputs, code) = match &cli.command {
        Command::Fit(a) => (fit(a, cli.seed, &out)?, 0),
        Command::Tangent(a) => (tangent(a, cli.seed, &out)?, 0),
        Command::Influence(a) => (influence(a, &out)?, 0),
        Command::Query(a) => (query(a, &out)?, 0),
        Command::Cv(a) => (cv(a, &out)?, 0),
        Command::LissaCheck(a) => lissa_check(a, cli.seed, &out)?,
        Command::Repro(a) => (repro(a, cli.seed, &out)?, 0),
    };
    manifest.outputs = outputs;
    io::write_json(&cli.out_dir.join(manifest.file_name()), &manifest)?;
    for p in &manifest.outputs {
        println!("{}", p.display());
    }
    Ok(code)
}

struct Output<'a> {
    dir: &'a Path,
}

impl Output<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }
}

#[derive(Serialize)]
struct ParamsJson {
    theta: Vec<Box<RawValue>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta_dot: Option<Vec<Box<RawValue>>>,
    s: Box<RawValue>,
    converged: bool,
}

fn fit(a: &FitArgs, seed: u64, out: &Output) -> Result<Vec<PathBuf>> {
    let problem = a.model.problem()?;
    let (theta, converged) = match a.method {
        FitMethod::Normal => (fit_normal_equations(&problem)?, true),
        FitMethod::Sgd | FitMethod::Adam => {
            let cfg = match a.method {
                FitMethod::Adam => TrainConfig::adam(a.sgd.eta, a.sgd.epochs, seed),
                _ => TrainConfig::sgd(a.sgd.eta, a.sgd.epochs, seed),
            };
            let r = run_sgd(&problem, &cfg, &DVector::zeros(problem.dim()))?;
            (r.theta, r.converged)
        }
    };
    let path = out.path("fit.json");
    io::write_json(
        &path,
        &ParamsJson { theta: io::json_floats(theta.iter())?, theta_dot: None, s: json_float(problem.regularity())?, converged },
    )?;
    Ok(vec![path])
}

fn tangent(a: &TangentArgs, seed: u64, out: &Output) -> Result<Vec<PathBuf>> {
    let problem = a.model.problem()?;
    let theta = fit_normal_equations(&problem)?;
    let method = match a.tangent_method {
        TangentArg::Direct => TangentMethod::Direct,
        TangentArg::Cg => TangentMethod::Cg { tol: 1e-12, max_iter: 10_000 },
        TangentArg::Sgdf => TangentMethod::Sgdf(TrainConfig::sgd(a.sgd.eta, a.sgd.epochs, seed)),
    };
    let result = regularity_tangent(&problem, &theta, &method)?;
    // SGDF runs to its epoch budget; judge it by the linear-system residual.
    let ok = match a.tangent_method {
        TangentArg::Sgdf => result.relative_residual <= SGDF_RESIDUAL_LIMIT,
        _ => result.converged,
    };
    if !ok {
        return Err(Error::NotConverged(format!("tangent relative residual {:e}", result.relative_residual)));
    }
    let path = out.path("tangent.json");
    io::write_json(
        &path,
        &ParamsJson {
            theta: io::json_floats(theta.iter())?,
            theta_dot: Some(io::json_floats(result.tangent.iter())?),
            s: json_float(problem.regularity())?,
            converged: ok,
        },
    )?;
    Ok(vec![path])
}

fn scalar_x(x: &RawInput) -> String {
    match x {
        RawInput::Scalar(v) => csv_float(*v),
        RawInput::Vector(v) => v.iter().map(|c| csv_float(*c)).collect::<Vec<_>>().join(" "),
    }
}

fn influence(a: &InfluenceArgs, out: &Output) -> Result<Vec<PathBuf>> {
    let problem = a.model.problem()?;
    let theta = fit_normal_equations(&problem)?;
    let tangent = regularity_tangent(&problem, &theta, &TangentMethod::Direct)?.tangent;
    let inv = InverseHessian::auto(&problem, &theta)?;
    let test = a.test.as_deref().map(read_dataset).transpose()?;
    let name = a.test.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
    let report = influence_report(&inv, &tangent, test.as_ref().map(|d| (name.as_str(), d)))?;
    let mut header = vec!["index", "x", "y", "i_up_reg", "self_influence"];
    if test.is_some() {
        header.push("i_up_loss");
    }
    let rows = report.points.iter().map(|p| {
        let (x, y) = problem.dataset().point(p.index);
        let mut row = vec![p.index.to_string(), scalar_x(x), csv_float(y), csv_float(p.i_up_reg), csv_float(p.self_influence)];
        if let Some(v) = p.i_up_loss {
            row.push(csv_float(v));
        }
        row
    });
    let path = out.path("influence.csv");
    io::write_csv(&path, &header, rows)?;
    Ok(vec![path])
}

fn parse_reference(spec: &str, n: usize) -> Result<Vec<usize>> {
    if spec.trim() == "all" {
        return Ok((0..n).collect());
    }
    spec.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| Error::InvalidInput(format!("reference set '{spec}': {e}"))))
        .collect()
}

fn query(a: &QueryArgs, out: &Output) -> Result<Vec<PathBuf>> {
    let problem = a.model.problem()?;
    let theta = fit_normal_equations(&problem)?;
    let tangent = regularity_tangent(&problem, &theta, &TangentMethod::Direct)?.tangent;
    let kind = HeuristicKind::parse(&a.heuristic)?;
    let reference = if kind.needs_reference() { parse_reference(&a.reference_set, problem.n())? } else { Vec::new() };
    let scorer = Scorer::new(&problem, &theta, &tangent, noise_variance(&problem, &theta)?)?;
    let scores = scorer.score_all(&read_candidates(&a.candidates)?, &Heuristic::new(kind, reference))?;
    let rows = scores.ranking.iter().enumerate().map(|(rank, &i)| {
        vec![
            rank.to_string(),
            i.to_string(),
            scalar_x(&scores.candidates[i].x),
            csv_float(scores.raw[i]),
            csv_float(scores.normalized[i]),
        ]
    });
    let path = out.path("query.csv");
    io::write_csv(&path, &["rank", "index", "x", "raw", "normalized"], rows)?;
    Ok(vec![path])
}

fn bounds_pair(b: &[f64]) -> Result<(f64, f64)> {
    match b {
        [lo, hi] => Ok((*lo, *hi)),
        _ => Err(Error::InvalidInput(format!("--bounds takes two values, got {}", b.len()))),
    }
}

fn cv(a: &CvArgs, out: &Output) -> Result<Vec<PathBuf>> {
    let problem = a.model.problem()?;
    let cfg = SOptConfig::golden(bounds_pair(&a.bounds)?, a.grid);
    cfg.validate()?;
    let grid = log_grid(cfg.bounds, cfg.grid_size);
    let loocv = objective_table(&problem, SObjective::Loocv, &grid)?;
    let gpert = objective_table(&problem, SObjective::Gpert, &grid)?;
    let (s_star, value) = optimize_s(&problem, &cfg, SObjective::Loocv)?;
    eprintln!("LOOCV optimum s* = {s_star:e} (value {value:e})");
    let path = out.path("cv.csv");
    let rows = loocv.iter().zip(&gpert).map(|(l, g)| vec![csv_float(l.0), csv_float(l.1), csv_float(g.1)]);
    io::write_csv(&path, &["s", "loocv", "gpert"], rows)?;
    Ok(vec![path])
}

#[derive(Serialize)]
struct LissaJson {
    max_deviation: Box<RawValue>,
    tolerance: Box<RawValue>,
    iterations: usize,
    pass: bool,
}

fn lissa_check(a: &LissaArgs, seed: u64, out: &Output) -> Result<(Vec<PathBuf>, i32)> {
    let problem = synthetic::reference_problem(seed, a.s)?;
    let theta = fit_normal_equations(&problem)?;
    let dev = lissa_sgdf_deviation(&problem, &theta, a.eta, seed, a.iterations)?;
    let pass = dev <= LISSA_CHECK_TOLERANCE;
    println!("max per-step deviation: {dev:e} ({})", if pass { "ok" } else { "exceeds tolerance" });
    let path = out.path("lissa_check.json");
    io::write_json(
        &path,
        &LissaJson {
            max_deviation: json_float(dev)?,
            tolerance: json_float(LISSA_CHECK_TOLERANCE)?,
            iterations: a.iterations,
            pass,
        },
    )?;
    Ok((vec![path], if pass { 0 } else { 2 }))
}

fn repro(a: &ReproArgs, seed: u64, out: &Output) -> Result<Vec<PathBuf>> {
    let cfg = ReproConfig { points: a.points, grid_size: a.grid, ..ReproConfig::new(seed) };
    let c = repro_curves(&cfg)?;
    eprintln!("s* = {:e} by LOOCV; second response at s = {:e}", c.s_star, c.s_scaled);

    let data = out.path("repro_data.csv");
    io::write_csv(
        &data,
        &["x", "y"],
        c.dataset.inputs().iter().zip(c.dataset.labels()).map(|(x, &y)| vec![scalar_x(x), csv_float(y)]),
    )?;

    let resp = out.path("repro_responses.csv");
    io::write_csv(
        &resp,
        &["x", "response", "response_scaled"],
        (0..c.x.len()).map(|i| vec![csv_float(c.x[i]), csv_float(c.response[i]), csv_float(c.response_scaled[i])]),
    )?;

    let tan = out.path("repro_tangent.csv");
    io::write_csv(
        &tan,
        &["x", "tangent_response", "tangent_squared", "fd_squared", "secant_squared"],
        (0..c.x.len()).map(|i| {
            vec![
                csv_float(c.x[i]),
                csv_float(c.tangent_response[i]),
                csv_float(c.tangent_squared[i]),
                csv_float(c.fd_squared[i]),
                csv_float(c.secant_squared[i]),
            ]
        }),
    )?;

    let heur = out.path("repro_heuristics.csv");
    let mut header = vec!["x"];
    header.extend(c.heuristics.iter().map(|(k, _)| k.name()));
    io::write_csv(
        &heur,
        &header,
        (0..c.x.len()).map(|i| {
            std::iter::once(csv_float(c.x[i])).chain(c.heuristics.iter().map(|(_, v)| csv_float(v[i]))).collect()
        }),
    )?;

    let cvp = out.path("repro_cv.csv");
    io::write_csv(
        &cvp,
        &["s", "loocv", "gpert"],
        c.cv_table.iter().map(|(s, l, g)| vec![csv_float(*s), csv_float(*l), csv_float(*g)]),
    )?;
    Ok(vec![data, resp, tan, heur, cvp])
}
