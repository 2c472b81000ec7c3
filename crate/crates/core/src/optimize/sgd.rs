//! Stochastic trainers. The plain and dual-number variants share one
//! generic engine, so the value stream of SGDF is the SGD stream.

use nalgebra::DVector;

use super::config::{EpochOrder, OptimizerKind, TrainConfig};
use crate::diffkit::{Dual, DualParams, Scalar};
use crate::error::{check_dim, Error, Result};
use crate::model::{loss_grad_generic, Problem};

/// Norm beyond which a trainer reports divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub theta: DVector<f64>,
    pub epochs: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct DualOutcome {
    pub params: DualParams,
    pub epochs: usize,
    pub converged: bool,
}

/// SGD (or Adam, per `cfg.optimizer`) with one regularizer step per epoch.
pub fn run_sgd(problem: &Problem, cfg: &TrainConfig, theta0: &DVector<f64>) -> Result<TrainOutcome> {
    check_dim(problem.dim(), theta0.len())?;
    let init: Vec<f64> = theta0.iter().copied().collect();
    let (theta, epochs, converged) = train(problem, cfg, init, problem.regularity(), &mut no_hook)?;
    Ok(TrainOutcome { theta: DVector::from_vec(theta), epochs, converged })
}

/// SGDF: the same trainer run on dual numbers `θ + θ̇·ds`.
///
/// Per point the tangent follows `θ̇ ← θ̇ − η(∂²L/∂θ²)θ̇`; at the end of each
/// epoch `θ̇ ← θ̇ − η(ρ + (∂²R/∂θ²)θ̇)`, which for L2 is `(1 − 2ηs)θ̇ − 2ηθ`.
/// A converged tangent satisfies `Hθ̇ = −ρ`.
pub fn run_sgdf(problem: &Problem, cfg: &TrainConfig, start: &DualParams) -> Result<DualOutcome> {
    if !cfg.track_tangent {
        return Err(Error::Precondition("run_sgdf requires track_tangent".into()));
    }
    check_dim(problem.dim(), start.dim())?;
    let (duals, epochs, converged) =
        train(problem, cfg, start.to_duals(), Dual::variable(problem.regularity()), &mut no_hook)?;
    Ok(DualOutcome { params: DualParams::from_duals(&duals), epochs, converged })
}

/// SGDF with a callback after every epoch that may adjust the regularity.
///
/// The callback sees the epoch index, the current dual parameters and the
/// dual regularity. Leaving `s` untouched reproduces [`run_sgdf`] exactly.
pub fn run_sgdf_with<F>(problem: &Problem, cfg: &TrainConfig, start: &DualParams, mut on_epoch: F) -> Result<(DualOutcome, f64)>
where
    F: FnMut(usize, &[Dual], &mut Dual) -> Result<()>,
{
    if !cfg.track_tangent {
        return Err(Error::Precondition("run_sgdf requires track_tangent".into()));
    }
    check_dim(problem.dim(), start.dim())?;
    let mut s_final = problem.regularity();
    let mut hook = |epoch: usize, theta: &[Dual], s: &mut Dual| {
        on_epoch(epoch, theta, s)?;
        s_final = s.re;
        Ok(())
    };
    let (duals, epochs, converged) =
        train(problem, cfg, start.to_duals(), Dual::variable(problem.regularity()), &mut hook)?;
    Ok((DualOutcome { params: DualParams::from_duals(&duals), epochs, converged }, s_final))
}

fn no_hook<T>(_: usize, _: &[T], _: &mut T) -> Result<()> {
    Ok(())
}

struct AdamState<T> {
    m: Vec<T>,
    v: Vec<f64>,
    t: i32,
}

fn train<T: Scalar>(
    problem: &Problem,
    cfg: &TrainConfig,
    mut theta: Vec<T>,
    mut s: T,
    on_epoch: &mut dyn FnMut(usize, &[T], &mut T) -> Result<()>,
) -> Result<(Vec<T>, usize, bool)> {
    cfg.validate()?;
    let n = problem.n();
    if n == 0 {
        return Err(Error::Precondition("training needs at least one data point".into()));
    }
    let p = theta.len();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| problem.features(i).iter().copied().collect()).collect();
    let labels = problem.labels();
    let reg = problem.regularizer();
    let mut order = EpochOrder::new(n, cfg.seed);
    let mut adam = match cfg.optimizer {
        OptimizerKind::Adam(_) => Some(AdamState { m: vec![T::from(0.0); p], v: vec![0.0; p], t: 0 }),
        OptimizerKind::Sgd => None,
    };

    for epoch in 0..cfg.epochs {
        let eta = cfg.step.at(epoch);
        let before = theta.clone();
        for i in order.next_epoch() {
            let (_, grad) = loss_grad_generic(&rows[i], labels[i], &theta);
            match (&mut adam, cfg.optimizer) {
                (Some(state), OptimizerKind::Adam(params)) => {
                    state.t += 1;
                    let c1 = 1.0 / (1.0 - params.beta1.powi(state.t));
                    let c2 = 1.0 / (1.0 - params.beta2.powi(state.t));
                    for k in 0..p {
                        let g = grad[k];
                        state.m[k] = T::from(params.beta1) * state.m[k] + T::from(1.0 - params.beta1) * g;
                        state.v[k] = params.beta2 * state.v[k] + (1.0 - params.beta2) * g.value() * g.value();
                        let step = eta / ((state.v[k] * c2).sqrt() + params.eps);
                        theta[k] = theta[k] - T::from(step) * (state.m[k] * T::from(c1));
                    }
                }
                _ => {
                    for k in 0..p {
                        theta[k] = theta[k] - T::from(eta) * grad[k];
                    }
                }
            }
        }

        let reg_grad = reg.grad_generic(s, &theta);
        match (&adam, cfg.optimizer) {
            (Some(state), OptimizerKind::Adam(params)) => {
                let c2 = 1.0 / (1.0 - params.beta2.powi(state.t));
                for k in 0..p {
                    let step = eta / ((state.v[k] * c2).sqrt() + params.eps);
                    theta[k] = theta[k] - T::from(step) * reg_grad[k];
                }
            }
            _ => {
                for k in 0..p {
                    theta[k] = theta[k] - T::from(eta) * reg_grad[k];
                }
            }
        }

        check_divergence(&theta)?;
        on_epoch(epoch, &theta, &mut s)?;
        let change = theta
            .iter()
            .zip(&before)
            .map(|(a, b)| (a.value() - b.value()).abs().max((a.tangent() - b.tangent()).abs()))
            .fold(0.0, f64::max);
        if change < cfg.tolerance {
            return Ok((theta, epoch + 1, true));
        }
    }
    Ok((theta, cfg.epochs, false))
}

fn check_divergence<T: Scalar>(theta: &[T]) -> Result<()> {
    let value = theta.iter().map(|t| t.value() * t.value()).sum::<f64>().sqrt();
    if !(value <= DIVERGENCE_LIMIT) {
        return Err(Error::Divergence { what: "parameter", norm: value });
    }
    let tangent = theta.iter().map(|t| t.tangent() * t.tangent()).sum::<f64>().sqrt();
    if !(tangent <= DIVERGENCE_LIMIT) {
        return Err(Error::Divergence { what: "tangent", norm: tangent });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Dataset, FeatureMap, Regularizer};

    fn one_point(s: f64) -> Problem {
        Problem::new(Dataset::from_scalars(&[1.0], &[1.0]).unwrap(), FeatureMap::Identity { dim: 1 }, Regularizer::L2, s)
            .unwrap()
    }

    fn scalar(x: f64) -> DVector<f64> {
        DVector::from_element(1, x)
    }

    #[test]
    fn single_update_without_regularity() {
        let cfg = TrainConfig { tolerance: 0.0, ..TrainConfig::sgd(0.25, 1, 0) };
        let out = run_sgd(&one_point(0.0), &cfg, &scalar(0.0)).unwrap();
        assert_eq!(out.theta[0], 0.5);
    }

    #[test]
    fn batch_end_shrinkage() {
        // No data gradient: y equals the prediction of θ = 1 at x = 1.
        let p = one_point(0.1);
        let cfg = TrainConfig { tolerance: 0.0, ..TrainConfig::sgd(0.5, 1, 0).with_tangent() };
        let out = run_sgdf(&p, &cfg, &DualParams::primal(scalar(1.0))).unwrap();
        assert!((out.params.value[0] - 0.9).abs() < 1e-15);
        assert!((out.params.tangent[0] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn sgdf_one_point_fixed_point() {
        let cfg = TrainConfig::sgd(0.01, 100_000, 3).with_tangent();
        let out = run_sgdf(&one_point(1.0), &cfg, &DualParams::primal(scalar(0.0))).unwrap();
        assert!(out.converged);
        // Cyclic updates settle at (1 − 2η)/(2(1 − η)) rather than exactly 1/2.
        let eta = 0.01;
        assert!((out.params.value[0] - (1.0 - 2.0 * eta) / (2.0 * (1.0 - eta))).abs() < 1e-9);
        assert!((out.params.tangent[0] + 0.25).abs() < 0.01);
    }

    #[test]
    fn adam_steady_state_is_still() {
        // θ = 1 fits the point exactly and s = 0, so every gradient is zero.
        let cfg = TrainConfig { tolerance: 0.0, ..TrainConfig::adam(1e-2, 5, 0) };
        let out = run_sgd(&one_point(0.0), &cfg, &scalar(1.0)).unwrap();
        assert_eq!(out.theta[0], 1.0);
    }

    #[test]
    fn divergence_detected() {
        let p = Problem::new(
            Dataset::from_scalars(&[10.0], &[1.0]).unwrap(),
            FeatureMap::Identity { dim: 1 },
            Regularizer::L2,
            0.0,
        )
        .unwrap();
        let err = run_sgd(&p, &TrainConfig::sgd(1.0, 100, 0), &scalar(0.0)).unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }));
    }

    #[test]
    fn sgdf_requires_tracking() {
        let err = run_sgdf(&one_point(1.0), &TrainConfig::sgd(0.1, 1, 0), &DualParams::primal(scalar(0.0))).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }
}
