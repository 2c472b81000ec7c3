//! LiSSA estimates of `H⁻¹v` and their correspondence with SGDF.
//!
//! The scaled update is `h ← h + η(v − Ĥ_t h)` where `Ĥ_t` is either the full
//! objective Hessian or the single-point estimate `n·∇²L(z_{u_t}) + ∇²R`,
//! whose expectation over `u_t` is `H`. The classic recursion
//! `h ← v + (I − Ĥ_t)h` is the same update with `η = 1`.

use nalgebra::DVector;

use super::config::EpochOrder;
use super::sgd::DIVERGENCE_LIMIT;
use crate::diffkit::{objective_hvp, Dual, DualParams};
use crate::error::{check_dim, Error, Result};
use crate::model::{loss_grad_generic, Problem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LissaVariant {
    /// `h ← v + (I − Ĥ)h`; requires `‖I − Ĥ‖ < 1` from the caller.
    Classic,
    #[default]
    Scaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HessianSampling {
    #[default]
    PerPoint,
    FullBatch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LissaConfig {
    pub v: DVector<f64>,
    pub eta: f64,
    pub iterations: usize,
    pub seed: u64,
    pub variant: LissaVariant,
    pub sampling: HessianSampling,
    /// Relative residual `‖Hh − v‖/‖v‖` below which the result is flagged converged.
    pub tolerance: f64,
}

impl LissaConfig {
    pub fn new(v: DVector<f64>, eta: f64, iterations: usize, seed: u64) -> Self {
        Self {
            v,
            eta,
            iterations,
            seed,
            variant: LissaVariant::Scaled,
            sampling: HessianSampling::PerPoint,
            tolerance: 1e-2,
        }
    }

    fn step(&self) -> f64 {
        match self.variant {
            LissaVariant::Classic => 1.0,
            LissaVariant::Scaled => self.eta,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidInput("LiSSA needs at least one iteration".into()));
        }
        if self.variant == LissaVariant::Scaled && !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::InvalidInput(format!("LiSSA step must lie in (0, 1], got {}", self.eta)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LissaOutcome {
    pub h: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub relative_residual: f64,
}

/// Single-point Hessian estimate applied to `h`.
fn sampled_hvp(problem: &Problem, i: usize, h: &DVector<f64>) -> DVector<f64> {
    let phi = problem.features(i);
    let n = problem.n() as f64;
    &phi * (2.0 * n * phi.dot(h)) + problem.regularizer().hvp(problem.regularity(), h)
}

/// Every iterate `h_1 … h_T`, starting from `h_0 = 0`.
pub fn lissa_iterates(problem: &Problem, theta: &DVector<f64>, cfg: &LissaConfig) -> Result<Vec<DVector<f64>>> {
    cfg.validate()?;
    check_dim(problem.dim(), theta.len())?;
    check_dim(problem.dim(), cfg.v.len())?;
    if cfg.sampling == HessianSampling::PerPoint && problem.n() == 0 {
        return Err(Error::Precondition("per-point sampling needs data".into()));
    }
    let eta = cfg.step();
    let mut order = EpochOrder::new(problem.n(), cfg.seed).stream();
    let mut h = DVector::zeros(problem.dim());
    let mut out = Vec::with_capacity(cfg.iterations);
    for _ in 0..cfg.iterations {
        let hh = match cfg.sampling {
            HessianSampling::PerPoint => sampled_hvp(problem, order.next().expect("endless stream"), &h),
            HessianSampling::FullBatch => objective_hvp(problem, theta, &h)?,
        };
        h += (&cfg.v - hh) * eta;
        let norm = h.norm();
        if !(norm <= DIVERGENCE_LIMIT) {
            return Err(Error::Divergence { what: "LiSSA iterate", norm });
        }
        out.push(h.clone());
    }
    Ok(out)
}

/// LiSSA estimate `h ≈ H⁻¹v` at trained parameters `theta`.
pub fn run_lissa(problem: &Problem, theta: &DVector<f64>, cfg: &LissaConfig) -> Result<LissaOutcome> {
    let h = lissa_iterates(problem, theta, cfg)?.pop().expect("at least one iteration");
    let v_norm = cfg.v.norm();
    let relative_residual = if v_norm == 0.0 {
        objective_hvp(problem, theta, &h)?.norm()
    } else {
        (objective_hvp(problem, theta, &h)? - &cfg.v).norm() / v_norm
    };
    Ok(LissaOutcome { converged: relative_residual <= cfg.tolerance, h, iterations: cfg.iterations, relative_residual })
}

/// Tangent stream of SGDF with the parameters held at `theta` and the
/// regularizer folded into every update.
///
/// Each update pushes `θ + θ̇·ds` through the single-point objective estimate
/// `n·L(z_{u_t}, ·) + R(s, ·)` with `s` a dual variable, and steps the tangent
/// by `−η` times the tangent of that gradient:
/// `θ̇ ← θ̇ − η(n∇²L_t θ̇ + ρ + ∇²R θ̇)`.
/// With the same seed, step and `v = ρ`, this is LiSSA's stream under `θ̇ = −h`.
pub fn sgdf_frozen_tangents(problem: &Problem, theta: &DVector<f64>, eta: f64, seed: u64, steps: usize) -> Result<Vec<DVector<f64>>> {
    check_dim(problem.dim(), theta.len())?;
    if problem.n() == 0 {
        return Err(Error::Precondition("SGDF needs data".into()));
    }
    let n = Dual::from(problem.n() as f64);
    let s = Dual::variable(problem.regularity());
    let mut order = EpochOrder::new(problem.n(), seed).stream();
    let mut dual = DualParams::primal(theta.clone());
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let i = order.next().expect("endless stream");
        let phi = problem.features(i);
        let x = dual.to_duals();
        let (_, loss_grad) = loss_grad_generic(phi.as_slice(), problem.labels()[i], &x);
        let reg_grad = problem.regularizer().grad_generic(s, &x);
        for k in 0..dual.dim() {
            let g = n * loss_grad[k] + reg_grad[k];
            dual.tangent[k] -= eta * g.eps;
        }
        out.push(dual.tangent.clone());
    }
    Ok(out)
}

/// Largest per-step relative deviation between `−h_t` (LiSSA, `v = ρ`) and
/// the frozen-parameter SGDF tangent `θ̇_t`.
pub fn lissa_sgdf_deviation(problem: &Problem, theta: &DVector<f64>, eta: f64, seed: u64, steps: usize) -> Result<f64> {
    let rho = problem.complexity_gradient(theta)?;
    let cfg = LissaConfig::new(rho, eta, steps, seed);
    let lissa = lissa_iterates(problem, theta, &cfg)?;
    let sgdf = sgdf_frozen_tangents(problem, theta, eta, seed, steps)?;
    Ok(lissa
        .iter()
        .zip(&sgdf)
        .map(|(h, t)| {
            let scale = t.norm().max(f64::MIN_POSITIVE);
            (t + h).norm() / scale
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Dataset, FeatureMap, Regularizer};

    fn single() -> Problem {
        Problem::new(Dataset::from_scalars(&[1.0], &[0.3]).unwrap(), FeatureMap::Identity { dim: 1 }, Regularizer::L2, 0.0)
            .unwrap()
    }

    #[test]
    fn geometric_iterates() {
        let p = single();
        let cfg = LissaConfig::new(DVector::from_element(1, 1.0), 0.25, 3, 0);
        let hs = lissa_iterates(&p, &DVector::zeros(1), &cfg).unwrap();
        let got: Vec<f64> = hs.iter().map(|h| h[0]).collect();
        assert_eq!(got, vec![0.25, 0.375, 0.4375]);
        let out = run_lissa(&p, &DVector::zeros(1), &LissaConfig { iterations: 200, ..cfg }).unwrap();
        assert!((out.h[0] - 0.5).abs() < 1e-12);
        assert!(out.converged);
    }

    #[test]
    fn zero_rhs_stays_zero() {
        let cfg = LissaConfig::new(DVector::zeros(1), 0.5, 10, 1);
        for h in lissa_iterates(&single(), &DVector::zeros(1), &cfg).unwrap() {
            assert_eq!(h[0], 0.0);
        }
    }

    #[test]
    fn classic_diverges_when_spectrum_too_large() {
        let p = Problem::new(Dataset::from_scalars(&[3.0], &[0.0]).unwrap(), FeatureMap::Identity { dim: 1 }, Regularizer::L2, 0.0)
            .unwrap();
        let cfg = LissaConfig { variant: LissaVariant::Classic, ..LissaConfig::new(DVector::from_element(1, 1.0), 1.0, 100, 0) };
        assert!(matches!(run_lissa(&p, &DVector::zeros(1), &cfg), Err(Error::Divergence { .. })));
    }

    #[test]
    fn rejects_bad_step() {
        let cfg = LissaConfig::new(DVector::zeros(1), 1.5, 10, 0);
        assert!(run_lissa(&single(), &DVector::zeros(1), &cfg).is_err());
    }
}
