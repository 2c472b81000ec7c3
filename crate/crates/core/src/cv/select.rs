use crate::error::{Error, Result};
use crate::influence::gpert;
use crate::model::Problem;

use super::retrain::{kfold_error, loocv_exact};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SOptMethod {
    Grid,
    /// Golden-section refinement around the best grid point.
    GoldenSection,
}

/// Scalar regularity search, carried out in `log s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SOptConfig {
    pub method: SOptMethod,
    pub bounds: (f64, f64),
    pub grid_size: usize,
    /// Width of the final bracket in `log s`.
    pub tolerance: f64,
}

impl Default for SOptConfig {
    fn default() -> Self {
        Self { method: SOptMethod::GoldenSection, bounds: (1e-3, 1e1), grid_size: 20, tolerance: 1e-6 }
    }
}

impl SOptConfig {
    pub fn grid(bounds: (f64, f64), grid_size: usize) -> Self {
        Self { method: SOptMethod::Grid, bounds, grid_size, ..Self::default() }
    }

    pub fn golden(bounds: (f64, f64), grid_size: usize) -> Self {
        Self { method: SOptMethod::GoldenSection, bounds, grid_size, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.bounds;
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::InvalidInput(format!("bounds must satisfy 0 < lo < hi, got ({lo}, {hi})")));
        }
        if self.grid_size < 3 {
            return Err(Error::InvalidInput(format!("grid size must be at least 3, got {}", self.grid_size)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidInput("tolerance must be positive".into()));
        }
        Ok(())
    }

    /// Log-spaced grid including both bounds.
    pub fn grid_points(&self) -> Vec<f64> {
        log_grid(self.bounds, self.grid_size)
    }
}

pub fn log_grid((lo, hi): (f64, f64), size: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..size)
        .map(|i| {
            if i + 1 == size {
                hi
            } else {
                (a + (b - a) * i as f64 / (size - 1) as f64).exp()
            }
        })
        .collect()
}

/// Quantity minimized over `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SObjective {
    Loocv,
    Gpert,
    Kfold { k: usize, seed: u64 },
}

impl SObjective {
    pub fn eval(&self, problem: &Problem, s: f64) -> Result<f64> {
        let value = match *self {
            SObjective::Loocv => loocv_exact(problem, s),
            SObjective::Gpert => gpert(problem, s),
            SObjective::Kfold { k, seed } => kfold_error(problem, s, k, seed),
        };
        value.map_err(|e| Error::ObjectiveAt { s, source: Box::new(e) })
    }
}

/// `(s, objective(s))` over a log-grid.
pub fn objective_table(problem: &Problem, objective: SObjective, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    grid.iter().map(|&s| Ok((s, objective.eval(problem, s)?))).collect()
}

/// Minimize `objective` over `s`; returns `(s*, value)`.
pub fn optimize_s(problem: &Problem, cfg: &SOptConfig, objective: SObjective) -> Result<(f64, f64)> {
    minimize_log(cfg, |s| objective.eval(problem, s))
}

/// Grid search, then optionally golden-section search in `log s` on the
/// bracket formed by the neighbours of the best grid point.
pub fn minimize_log(cfg: &SOptConfig, mut f: impl FnMut(f64) -> Result<f64>) -> Result<(f64, f64)> {
    cfg.validate()?;
    let grid = cfg.grid_points();
    let mut values = Vec::with_capacity(grid.len());
    for &s in &grid {
        values.push(f(s)?);
    }
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("grid is nonempty");
    if cfg.method == SOptMethod::Grid {
        return Ok((grid[best], values[best]));
    }

    let mut a = grid[best.saturating_sub(1)].ln();
    let mut b = grid[(best + 1).min(grid.len() - 1)].ln();
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c.exp())?;
    let mut fd = f(d.exp())?;
    while (b - a).abs() > cfg.tolerance {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c.exp())?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d.exp())?;
        }
    }
    let (s, v) = if fc <= fd { (c.exp(), fc) } else { (d.exp(), fd) };
    // Never return worse than the grid.
    if v <= values[best] {
        Ok((s, v))
    } else {
        Ok((grid[best], values[best]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Dataset, FeatureMap, Regularizer};

    #[test]
    fn grid_endpoints() {
        let g = log_grid((1e-3, 10.0), 5);
        assert_eq!(g.len(), 5);
        assert!((g[0] - 1e-3).abs() < 1e-18);
        assert_eq!(g[4], 10.0);
        assert!((g[2] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(SOptConfig::grid((0.0, 1.0), 5).validate().is_err());
        assert!(SOptConfig::grid((1.0, 1.0), 5).validate().is_err());
        assert!(SOptConfig::grid((0.1, 1.0), 2).validate().is_err());
    }

    #[test]
    fn golden_finds_quadratic_minimum_in_log_space() {
        let cfg = SOptConfig { tolerance: 1e-9, ..SOptConfig::golden((1e-3, 1e3), 7) };
        let (s, v) = minimize_log(&cfg, |s| Ok((s.ln() - 0.7).powi(2))).unwrap();
        assert!((s.ln() - 0.7).abs() < 1e-6, "{s}");
        assert!(v < 1e-12);
    }

    #[test]
    fn one_point_loocv_is_precondition() {
        let p = Problem::new(
            Dataset::from_scalars(&[1.0], &[1.0]).unwrap(),
            FeatureMap::Identity { dim: 1 },
            Regularizer::L2,
            1.0,
        )
        .unwrap();
        let err = optimize_s(&p, &SOptConfig::grid((0.1, 1.0), 3), SObjective::Loocv).unwrap_err();
        match err {
            Error::ObjectiveAt { source, .. } => assert!(matches!(*source, Error::Precondition(_))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn monotone_loocv_picks_lower_bound() {
        // Duplicated point: any shrinkage only hurts the held-out fit.
        let p = Problem::new(
            Dataset::from_scalars(&[1.0, 1.0], &[1.0, 1.0]).unwrap(),
            FeatureMap::Identity { dim: 1 },
            Regularizer::L2,
            0.0,
        )
        .unwrap();
        let cfg = SOptConfig::golden((1e-3, 1e1), 9);
        let (s, _) = optimize_s(&p, &cfg, SObjective::Loocv).unwrap();
        let grid = objective_table(&p, SObjective::Loocv, &cfg.grid_points()).unwrap();
        assert!(grid.windows(2).all(|w| w[0].1 < w[1].1));
        assert!((s - 1e-3).abs() < 1e-3 * 1e-3, "{s}");
    }
}
