use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::heuristics::{Candidate, Heuristic, Scorer};
use crate::error::{Error, Result};
use crate::model::{NoiseModel, Problem, RawInput};

/// Minimum sample count for [`Scorer::mc_expected`].
pub const MIN_MC_SAMPLES: usize = 100;

/// Label-dependent quantity averaged over `y ~ N(θ*ᵀφ(x), σ²)`.
#[derive(Debug, Clone, PartialEq)]
pub enum LabelFunctional {
    /// `−σ_TᵀH⁻¹σ_z` with `σ_T` summed over the reference set.
    Influence { reference: Vec<usize> },
    /// Square of [`LabelFunctional::Influence`].
    SquaredInfluence { reference: Vec<usize> },
    /// Any heuristic scored with the sampled label attached to the candidate.
    Heuristic(Heuristic),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√samples`.
    pub stderr: f64,
}

impl Scorer<'_> {
    fn reference_sum(&self, reference: &[usize]) -> Result<DVector<f64>> {
        let problem = self.inverse_hessian().problem();
        if reference.is_empty() {
            return Err(Error::InvalidInput("reference set is empty".into()));
        }
        let mut total = DVector::zeros(problem.dim());
        for &j in reference {
            if j >= problem.n() {
                return Err(Error::InvalidInput(format!("reference index {j} out of range")));
            }
            total += problem.point_gradient(j, self.inverse_hessian().theta());
        }
        Ok(total)
    }

    /// `4σ²(σ_TᵀH⁻¹φ(x))²`, the label expectation of the squared influence.
    pub fn closed_form_expected_sq_influence(&self, x: &RawInput, reference: &[usize]) -> Result<f64> {
        let inv = self.inverse_hessian();
        let sigma_t = self.reference_sum(reference)?;
        let phi = inv.problem().featurize(x)?;
        let v = sigma_t.dot(&inv.solve(&phi)?);
        Ok(4.0 * self.noise().variance() * v * v)
    }

    /// Monte-Carlo label average of `target` at input `x`.
    pub fn mc_expected(&self, x: &RawInput, target: &LabelFunctional, samples: usize, seed: u64) -> Result<McEstimate> {
        if samples < MIN_MC_SAMPLES {
            return Err(Error::Precondition(format!("need at least {MIN_MC_SAMPLES} samples, got {samples}")));
        }
        let inv = self.inverse_hessian();
        let phi = inv.problem().featurize(x)?;
        let mean_label = phi.dot(inv.theta());
        let normal = Normal::new(mean_label, self.noise().std_dev())
            .map_err(|e| Error::InvalidInput(format!("label distribution: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        // σ_z = 2φ(θᵀφ − y), so the influence is linear in the residual.
        let influence_per_residual = match target {
            LabelFunctional::Influence { reference } | LabelFunctional::SquaredInfluence { reference } => {
                let sigma_t = self.reference_sum(reference)?;
                Some(-2.0 * sigma_t.dot(&inv.solve(&phi)?))
            }
            LabelFunctional::Heuristic(_) => None,
        };

        let mut values = Vec::with_capacity(samples);
        for _ in 0..samples {
            let y = normal.sample(&mut rng);
            let v = match target {
                LabelFunctional::Influence { .. } => influence_per_residual.unwrap_or(0.0) * (mean_label - y),
                LabelFunctional::SquaredInfluence { .. } => {
                    (influence_per_residual.unwrap_or(0.0) * (mean_label - y)).powi(2)
                }
                LabelFunctional::Heuristic(h) => self.score(&Candidate { x: x.clone(), y: Some(y) }, h)?,
            };
            values.push(v);
        }
        let n = samples as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Ok(McEstimate { mean, stderr: (var / n).sqrt() })
    }
}

/// Free-function form of [`Scorer::closed_form_expected_sq_influence`].
pub fn closed_form_expected_sq_influence(
    problem: &Problem,
    theta: &DVector<f64>,
    x: &RawInput,
    reference: &[usize],
    noise: NoiseModel,
) -> Result<f64> {
    let zero = DVector::zeros(problem.dim());
    Scorer::new(problem, theta, &zero, noise)?.closed_form_expected_sq_influence(x, reference)
}
