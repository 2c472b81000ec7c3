use nalgebra::DVector;

use crate::diffkit::{Dual, DualParams};
use crate::error::{Error, Result};
use crate::model::Problem;
use crate::optimize::{run_sgdf_with, EpochOrder, TrainConfig, DIVERGENCE_LIMIT};

/// Alternating θ/s optimization: SGDF epochs on the training split, then a
/// `log s` step along `−s·σ_testᵀθ̇` for one test point.
#[derive(Debug, Clone, PartialEq)]
pub struct JointConfig {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    /// θ trainer; `epochs` is the iteration budget. Tangent tracking is forced on.
    pub theta: TrainConfig,
    /// Step on `log s`; keep it far below the θ step.
    pub eta_s: f64,
    /// Training epochs per `s` update.
    pub cadence: usize,
    pub s0: f64,
    /// Optional projection interval for `s`.
    pub bounds: Option<(f64, f64)>,
}

impl JointConfig {
    pub fn new(train: Vec<usize>, test: Vec<usize>, theta: TrainConfig, eta_s: f64, s0: f64) -> Self {
        Self { train, test, theta: theta.with_tangent(), eta_s, cadence: 1, s0, bounds: None }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for &i in self.train.iter().chain(&self.test) {
            if i >= n || seen[i] {
                return Err(Error::InvalidInput(format!("split index {i} is out of range or repeated")));
            }
            seen[i] = true;
        }
        if seen.iter().any(|v| !v) {
            return Err(Error::InvalidInput("split must cover the dataset".into()));
        }
        if self.train.is_empty() || self.test.is_empty() {
            return Err(Error::InvalidInput("both sides of the split need points".into()));
        }
        if !(self.eta_s.is_finite() && self.eta_s >= 0.0) {
            return Err(Error::InvalidInput(format!("invalid s step {}", self.eta_s)));
        }
        if self.cadence == 0 {
            return Err(Error::InvalidInput("cadence must be at least 1".into()));
        }
        if !(self.s0.is_finite() && self.s0 > 0.0) {
            return Err(Error::InvalidInput(format!("initial s must be positive, got {}", self.s0)));
        }
        if let Some((lo, hi)) = self.bounds {
            if !(lo > 0.0 && lo < hi) {
                return Err(Error::InvalidInput(format!("invalid s bounds ({lo}, {hi})")));
            }
        }
        Ok(())
    }
}

/// One `s` update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointTraceEntry {
    pub epoch: usize,
    /// Norm of the training-objective gradient at the current θ.
    pub grad_norm: f64,
    /// Regularity after the update.
    pub s: f64,
    pub dl_ds: f64,
}

#[derive(Debug, Clone)]
pub struct JointOutcome {
    pub params: DualParams,
    pub s: f64,
    pub epochs: usize,
    pub converged: bool,
    pub trace: Vec<JointTraceEntry>,
}

/// The training-split problem the θ updates run on.
pub fn joint_training_problem(problem: &Problem, cfg: &JointConfig) -> Result<Problem> {
    problem.with_dataset(problem.dataset().subset(&cfg.train))?.with_regularity(cfg.s0)
}

/// Joint θ/s hyperoptimization from `θ = θ̇ = 0`.
pub fn joint_hyperopt(problem: &Problem, cfg: &JointConfig) -> Result<JointOutcome> {
    cfg.validate(problem.n())?;
    let train_problem = joint_training_problem(problem, cfg)?;
    let test_rows: Vec<(DVector<f64>, f64)> = cfg.test.iter().map(|&j| (problem.features(j), problem.labels()[j])).collect();
    let mut test_order = EpochOrder::new(test_rows.len(), cfg.theta.seed ^ 0x5eed_7e57);
    let mut pending: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    let mut theta_cfg = cfg.theta.clone();
    theta_cfg.track_tangent = true;

    let start = DualParams::new(DVector::zeros(problem.dim()), DVector::zeros(problem.dim()))?;
    let (outcome, s) = run_sgdf_with(&train_problem, &theta_cfg, &start, |epoch, theta, s: &mut Dual| {
        if (epoch + 1) % cfg.cadence != 0 {
            return Ok(());
        }
        if pending.is_empty() {
            pending = test_order.next_epoch();
            pending.reverse();
        }
        let j = pending.pop().expect("refilled");
        let (phi, y) = &test_rows[j];
        let (value, tangent) = (
            DVector::from_iterator(theta.len(), theta.iter().map(|t| t.re)),
            DVector::from_iterator(theta.len(), theta.iter().map(|t| t.eps)),
        );
        let residual = phi.dot(&value) - y;
        let dl_ds = 2.0 * residual * phi.dot(&tangent);
        let mut log_s = s.re.ln() - cfg.eta_s * s.re * dl_ds;
        if let Some((lo, hi)) = cfg.bounds {
            log_s = log_s.clamp(lo.ln(), hi.ln());
        }
        if !log_s.is_finite() || log_s.abs() > DIVERGENCE_LIMIT.ln() {
            return Err(Error::Divergence { what: "regularity", norm: log_s.exp() });
        }
        if cfg.eta_s != 0.0 {
            *s = Dual::variable(log_s.exp());
        }
        let grad_norm = train_problem.gradient_at(s.re, &value)?.norm();
        trace.push(JointTraceEntry { epoch, grad_norm, s: s.re, dl_ds });
        Ok(())
    })?;
    Ok(JointOutcome { params: outcome.params, s, epochs: outcome.epochs, converged: outcome.converged, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Dataset, FeatureMap, Regularizer};
    use crate::optimize::run_sgdf;

    fn problem() -> Problem {
        Problem::new(
            Dataset::from_scalars(&[1.0, 2.0, 0.5], &[1.0, 1.5, 2.0]).unwrap(),
            FeatureMap::Identity { dim: 1 },
            Regularizer::L2,
            0.3,
        )
        .unwrap()
    }

    #[test]
    fn frozen_s_matches_sgdf_bitwise() {
        let p = problem();
        let cfg = JointConfig::new(vec![0, 1], vec![2], TrainConfig::sgd(0.05, 200, 9), 0.0, 0.3);
        let out = joint_hyperopt(&p, &cfg).unwrap();
        let tp = joint_training_problem(&p, &cfg).unwrap();
        let start = DualParams::new(DVector::zeros(1), DVector::zeros(1)).unwrap();
        let reference = run_sgdf(&tp, &cfg.theta, &start).unwrap();
        assert_eq!(out.params, reference.params);
        assert_eq!(out.s, 0.3);
    }

    #[test]
    fn s_moves_downhill_on_first_update() {
        // Test label 2 at x=0.5 sits above the shrunk fit, so dL/ds > 0 and s decreases.
        let p = problem();
        let mut cfg = JointConfig::new(vec![0, 1], vec![2], TrainConfig::sgd(0.05, 50, 1), 1e-2, 0.3);
        cfg.theta.tolerance = 0.0;
        let out = joint_hyperopt(&p, &cfg).unwrap();
        let first = out.trace[0];
        assert!(first.dl_ds > 0.0);
        assert!(first.s < 0.3);
    }

    #[test]
    fn exact_fit_keeps_s() {
        // A test point on the fitted line through the origin with zero residual.
        let p = Problem::new(
            Dataset::from_scalars(&[1.0, 0.0], &[1.0, 0.0]).unwrap(),
            FeatureMap::Identity { dim: 1 },
            Regularizer::L2,
            0.5,
        )
        .unwrap();
        let cfg = JointConfig::new(vec![0], vec![1], TrainConfig::sgd(0.1, 100, 0), 1.0, 0.5);
        let out = joint_hyperopt(&p, &cfg).unwrap();
        assert!(out.trace.iter().all(|t| t.dl_ds == 0.0));
        assert_eq!(out.s, 0.5);
    }

    #[test]
    fn rejects_bad_split() {
        let p = problem();
        let cfg = JointConfig::new(vec![0, 1], vec![1], TrainConfig::sgd(0.05, 10, 0), 0.0, 0.3);
        assert!(joint_hyperopt(&p, &cfg).is_err());
        let cfg = JointConfig::new(vec![0], vec![1], TrainConfig::sgd(0.05, 10, 0), 0.0, 0.3);
        assert!(joint_hyperopt(&p, &cfg).is_err());
    }
}
