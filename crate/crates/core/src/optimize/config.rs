use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self { beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizerKind {
    Sgd,
    Adam(AdamParams),
}

/// Step size as a function of the epoch index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    Constant(f64),
    /// `η0 / (1 + decay·epoch)`
    InverseTime { eta0: f64, decay: f64 },
}

impl StepSchedule {
    pub fn at(&self, epoch: usize) -> f64 {
        match *self {
            StepSchedule::Constant(eta) => eta,
            StepSchedule::InverseTime { eta0, decay } => eta0 / (1.0 + decay * epoch as f64),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            StepSchedule::Constant(eta) => eta.is_finite() && eta > 0.0,
            StepSchedule::InverseTime { eta0, decay } => {
                eta0.is_finite() && eta0 > 0.0 && decay.is_finite() && decay >= 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid step schedule {self:?}")))
        }
    }
}

/// When the regularizer gradient enters the updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RegularizerCadence {
    /// One regularizer step after each pass over the data.
    #[default]
    BatchEnd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub optimizer: OptimizerKind,
    pub step: StepSchedule,
    pub epochs: usize,
    /// Seed of the per-epoch point permutation.
    pub seed: u64,
    pub track_tangent: bool,
    pub cadence: RegularizerCadence,
    /// Stop once the max-norm parameter change over an epoch drops below this.
    pub tolerance: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            optimizer: OptimizerKind::Sgd,
            step: StepSchedule::Constant(1e-3),
            epochs: 1000,
            seed: 0,
            track_tangent: false,
            cadence: RegularizerCadence::BatchEnd,
            tolerance: 1e-10,
        }
    }
}

impl TrainConfig {
    pub fn sgd(eta: f64, epochs: usize, seed: u64) -> Self {
        Self { step: StepSchedule::Constant(eta), epochs, seed, ..Self::default() }
    }

    pub fn adam(lr: f64, epochs: usize, seed: u64) -> Self {
        Self { optimizer: OptimizerKind::Adam(AdamParams::default()), ..Self::sgd(lr, epochs, seed) }
    }

    pub fn with_tangent(mut self) -> Self {
        self.track_tangent = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.step.validate()?;
        if self.epochs == 0 {
            return Err(Error::InvalidInput("epochs must be at least 1".into()));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::InvalidInput("tolerance must be nonnegative".into()));
        }
        if let OptimizerKind::Adam(a) = self.optimizer {
            let ok = (0.0..1.0).contains(&a.beta1) && (0.0..1.0).contains(&a.beta2) && a.eps > 0.0;
            if !ok {
                return Err(Error::InvalidInput(format!("invalid Adam parameters {a:?}")));
            }
        }
        Ok(())
    }
}

/// Seeded point ordering: a fresh random permutation for every epoch.
#[derive(Debug, Clone)]
pub struct EpochOrder {
    rng: ChaCha8Rng,
    n: usize,
}

impl EpochOrder {
    pub fn new(n: usize, seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), n }
    }

    pub fn next_epoch(&mut self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.n).collect();
        idx.shuffle(&mut self.rng);
        idx
    }

    /// Endless stream of indices made of consecutive epochs.
    pub fn stream(mut self) -> impl Iterator<Item = usize> {
        std::iter::from_fn(move || Some(self.next_epoch())).flatten()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_seeded_permutation() {
        let a: Vec<usize> = EpochOrder::new(5, 7).stream().take(20).collect();
        let b: Vec<usize> = EpochOrder::new(5, 7).stream().take(20).collect();
        assert_eq!(a, b);
        for chunk in a.chunks(5) {
            let mut c = chunk.to_vec();
            c.sort_unstable();
            assert_eq!(c, vec![0, 1, 2, 3, 4]);
        }
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::sgd(0.0, 10, 0).validate().is_err());
        assert!(TrainConfig { epochs: 0, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig::adam(1e-3, 10, 0).validate().is_ok());
        assert_eq!(StepSchedule::InverseTime { eta0: 1.0, decay: 1.0 }.at(3), 0.25);
    }
}
