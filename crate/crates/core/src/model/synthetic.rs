//! Seeded toy datasets.
//!
//! The reference problem is a degree-5 polynomial fit to six noisy samples
//! of `sin(πx)`, three on each side of a central gap in `[-1, 1]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::data::{Dataset, FeatureMap};
use super::problem::Problem;
use super::regularizer::Regularizer;
use crate::error::Result;

pub const REFERENCE_POINTS: usize = 6;
pub const REFERENCE_DEGREE: usize = 5;
pub const REFERENCE_REGULARITY: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GappedSpec {
    pub n: usize,
    /// Inputs avoid `(-gap, gap)`.
    pub gap: f64,
    pub noise_std: f64,
}

impl Default for GappedSpec {
    fn default() -> Self {
        Self { n: REFERENCE_POINTS, gap: 0.5, noise_std: 0.1 }
    }
}

/// Noisy `sin(πx)` samples with a hole in the middle of the domain, sorted by x.
pub fn gapped_dataset(seed: u64, spec: GappedSpec) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, spec.noise_std).expect("noise_std is finite and nonnegative");
    let left = spec.n / 2;
    let mut xs: Vec<f64> = (0..spec.n)
        .map(|i| {
            let mag = rng.random_range(spec.gap..=1.0);
            if i < left {
                -mag
            } else {
                mag
            }
        })
        .collect();
    xs.sort_by(f64::total_cmp);
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| (std::f64::consts::PI * x).sin() + noise.sample(&mut rng))
        .collect();
    Dataset::from_scalars(&xs, &ys).expect("generated values are finite")
}

/// The reference L2-regularized degree-5 problem on six gapped points.
pub fn reference_problem(seed: u64, s: f64) -> Result<Problem> {
    Problem::new(
        gapped_dataset(seed, GappedSpec::default()),
        FeatureMap::Polynomial { degree: REFERENCE_DEGREE },
        Regularizer::L2,
        s,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RawInput;

    #[test]
    fn deterministic_and_gapped() {
        let a = gapped_dataset(42, GappedSpec::default());
        let b = gapped_dataset(42, GappedSpec::default());
        assert_eq!(a, b);
        assert_eq!(a.len(), 6);
        for x in a.inputs() {
            let RawInput::Scalar(x) = x else { panic!("scalar inputs") };
            assert!(x.abs() >= 0.5 && x.abs() <= 1.0);
        }
        assert_ne!(a, gapped_dataset(43, GappedSpec::default()));
    }
}
