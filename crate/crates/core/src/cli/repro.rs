//! Curve data for the gapped polynomial example.

use crate::active::{rms_normalize, Candidate, Heuristic, HeuristicKind, Scorer};
use crate::cv::{log_grid, objective_table, optimize_s, SObjective, SOptConfig};
use crate::error::{Error, Result};
use crate::influence::{regularity_tangent, TangentMethod};
use crate::model::synthetic::{gapped_dataset, GappedSpec, REFERENCE_DEGREE};
use crate::model::{noise_variance, Dataset, FeatureMap, Problem, RawInput, Regularizer};
use crate::optimize::fit_normal_equations;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ReproConfig {
    pub seed: u64,
    /// Search interval for `s*`.
    pub bounds: (f64, f64),
    pub grid_size: usize,
    /// Number of points on the response curves.
    pub points: usize,
    /// Curve domain.
    pub domain: (f64, f64),
    /// Ratio between the second regularity and `s*`.
    pub scale: f64,
    /// Relative half-width of the central difference in `s`.
    pub fd_step: f64,
}

impl ReproConfig {
    pub fn new(seed: u64) -> Self {
        Self { seed, bounds: (1e-4, 1e1), grid_size: 20, points: 200, domain: (-1.1, 1.1), scale: 1.75, fd_step: 1e-4 }
    }
}

#[derive(Debug, Clone)]
pub struct ReproCurves {
    pub dataset: Dataset,
    pub s_star: f64,
    pub s_scaled: f64,
    /// `(s, loocv, gpert)` over the search grid.
    pub cv_table: Vec<(f64, f64, f64)>,
    pub x: Vec<f64>,
    pub response: Vec<f64>,
    pub response_scaled: Vec<f64>,
    /// `φ(x)ᵀθ̇` at `s*`.
    pub tangent_response: Vec<f64>,
    pub tangent_squared: Vec<f64>,
    /// Squared central difference of the response in `s` around `s*`.
    pub fd_squared: Vec<f64>,
    /// Squared secant `(ŷ(scale·s*) − ŷ(s*)) / ((scale − 1)s*)`.
    pub secant_squared: Vec<f64>,
    /// RMS-normalized heuristic curves, `T` = training set (SI: point 0).
    pub heuristics: Vec<(HeuristicKind, Vec<f64>)>,
}

fn responses(problem: &Problem, s: f64, xs: &[f64]) -> Result<Vec<f64>> {
    let theta = fit_normal_equations(&problem.with_regularity(s)?)?;
    xs.iter().map(|&x| Ok(problem.featurize(&RawInput::Scalar(x))?.dot(&theta))).collect()
}

pub fn repro_curves(cfg: &ReproConfig) -> Result<ReproCurves> {
    if cfg.points < 2 || !(cfg.scale > 1.0) || !(cfg.fd_step > 0.0 && cfg.fd_step < 1.0) {
        return Err(Error::InvalidInput(format!("invalid repro configuration {cfg:?}")));
    }
    let dataset = gapped_dataset(cfg.seed, GappedSpec::default());
    let base = Problem::new(dataset.clone(), FeatureMap::Polynomial { degree: REFERENCE_DEGREE }, Regularizer::L2, 1.0)?;

    let s_cfg = SOptConfig::golden(cfg.bounds, cfg.grid_size);
    let (s_star, _) = optimize_s(&base, &s_cfg, SObjective::Loocv)?;
    let grid = log_grid(cfg.bounds, cfg.grid_size);
    let loocv = objective_table(&base, SObjective::Loocv, &grid)?;
    let gpert = objective_table(&base, SObjective::Gpert, &grid)?;
    let cv_table = loocv.iter().zip(&gpert).map(|(a, b)| (a.0, a.1, b.1)).collect();

    let (lo, hi) = cfg.domain;
    let x: Vec<f64> = (0..cfg.points).map(|i| lo + (hi - lo) * i as f64 / (cfg.points - 1) as f64).collect();
    let problem = base.with_regularity(s_star)?;
    let theta = fit_normal_equations(&problem)?;
    let tangent = regularity_tangent(&problem, &theta, &TangentMethod::Direct)?.tangent;

    let s_scaled = cfg.scale * s_star;
    let response = responses(&problem, s_star, &x)?;
    let response_scaled = responses(&problem, s_scaled, &x)?;
    let up = responses(&problem, s_star * (1.0 + cfg.fd_step), &x)?;
    let down = responses(&problem, s_star * (1.0 - cfg.fd_step), &x)?;

    let mut tangent_response = Vec::with_capacity(x.len());
    for &xi in &x {
        tangent_response.push(problem.featurize(&RawInput::Scalar(xi))?.dot(&tangent));
    }
    let tangent_squared = tangent_response.iter().map(|v| v * v).collect();
    let fd_squared = up
        .iter()
        .zip(&down)
        .map(|(u, d)| ((u - d) / (2.0 * cfg.fd_step * s_star)).powi(2))
        .collect();
    let secant_squared = response_scaled
        .iter()
        .zip(&response)
        .map(|(a, b)| ((a - b) / (s_scaled - s_star)).powi(2))
        .collect();

    let noise = noise_variance(&problem, &theta)?;
    let scorer = Scorer::new(&problem, &theta, &tangent, noise)?;
    let candidates: Vec<Candidate> = x.iter().map(|&v| Candidate::unlabeled(v)).collect();
    let mut heuristics = Vec::new();
    for kind in HeuristicKind::ALL {
        let heuristic = match kind {
            HeuristicKind::SldLabeled => continue,
            HeuristicKind::SldUnlabeled => Heuristic::sld_unlabeled(),
            HeuristicKind::Si => Heuristic::new(kind, vec![0]),
            _ => Heuristic::over_training_set(kind, &problem),
        };
        let raw = candidates
            .iter()
            .map(|c| scorer.score(c, &heuristic))
            .collect::<Result<Vec<f64>>>()?;
        heuristics.push((kind, rms_normalize(&raw)));
    }

    Ok(ReproCurves {
        dataset,
        s_star,
        s_scaled,
        cv_table,
        x,
        response,
        response_scaled,
        tangent_response,
        tangent_squared,
        fd_squared,
        secant_squared,
        heuristics,
    })
}

/// Largest relative gap between two curves where `reference ≥ floor·max(reference)`.
pub fn masked_relative_gap(curve: &[f64], reference: &[f64], floor: f64) -> f64 {
    let peak = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    curve
        .iter()
        .zip(reference)
        .filter(|(_, r)| r.abs() >= floor * peak)
        .map(|(c, r)| (c - r).abs() / r.abs())
        .fold(0.0, f64::max)
}

