use nalgebra::DVector;

use crate::diffkit::Scalar;
use crate::error::{check_dim, Error, Result};

/// Regularizer family `R(s, θ)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Regularizer {
    /// `s‖θ‖²`
    L2,
    /// `s‖θ_M‖²` over a restricted set of parameter indices.
    MaskedL2 { mask: Vec<usize> },
    /// `s‖θ − θ₀‖²`, pulling parameters toward a shared center.
    SharedMeanL2 { center: DVector<f64> },
    /// `s θᵀv`. Its complexity gradient is the constant `v`, which turns a
    /// regularity tangent computation into a generic `H⁻¹v` solve.
    Linear { direction: DVector<f64> },
}

/// Value, gradient and complexity gradient of a regularizer at `(s, θ)`.
#[derive(Debug, Clone)]
pub struct RegEval<'a> {
    pub value: f64,
    /// ∂R/∂θ
    pub grad: DVector<f64>,
    /// ρ = ∂²R/∂s∂θ
    pub rho: DVector<f64>,
    reg: &'a Regularizer,
    s: f64,
}

impl RegEval<'_> {
    /// (∂²R/∂θ²)v
    pub fn hvp(&self, v: &DVector<f64>) -> DVector<f64> {
        self.reg.hvp(self.s, v)
    }
}

impl Regularizer {
    pub fn masked(mask: impl IntoIterator<Item = usize>) -> Self {
        let mut mask: Vec<usize> = mask.into_iter().collect();
        mask.sort_unstable();
        mask.dedup();
        Regularizer::MaskedL2 { mask }
    }

    /// Check the regularizer against parameter dimension `p`.
    pub fn validate(&self, p: usize) -> Result<()> {
        match self {
            Regularizer::L2 => Ok(()),
            Regularizer::MaskedL2 { mask } => match mask.iter().find(|&&k| k >= p) {
                Some(&k) => Err(Error::InvalidInput(format!(
                    "mask index {k} out of range for {p} parameters"
                ))),
                None => Ok(()),
            },
            Regularizer::SharedMeanL2 { center } => check_dim(p, center.len()),
            Regularizer::Linear { direction } => check_dim(p, direction.len()),
        }
    }

    pub fn eval(&self, s: f64, theta: &DVector<f64>) -> Result<RegEval<'_>> {
        self.validate(theta.len())?;
        let (value, grad, rho) = match self {
            Regularizer::L2 => (s * theta.norm_squared(), theta * (2.0 * s), theta * 2.0),
            Regularizer::MaskedL2 { mask } => {
                let mut masked = DVector::zeros(theta.len());
                for &k in mask {
                    masked[k] = theta[k];
                }
                (s * masked.norm_squared(), &masked * (2.0 * s), masked * 2.0)
            }
            Regularizer::SharedMeanL2 { center } => {
                let d = theta - center;
                (s * d.norm_squared(), &d * (2.0 * s), d * 2.0)
            }
            Regularizer::Linear { direction } => {
                (s * theta.dot(direction), direction * s, direction.clone())
            }
        };
        Ok(RegEval { value, grad, rho, reg: self, s })
    }

    /// (∂²R/∂θ²)v at regularity `s`; independent of θ for every kind.
    pub fn hvp(&self, s: f64, v: &DVector<f64>) -> DVector<f64> {
        match self {
            Regularizer::L2 | Regularizer::SharedMeanL2 { .. } => v * (2.0 * s),
            Regularizer::MaskedL2 { mask } => {
                let mut out = DVector::zeros(v.len());
                for &k in mask {
                    out[k] = 2.0 * s * v[k];
                }
                out
            }
            Regularizer::Linear { .. } => DVector::zeros(v.len()),
        }
    }

    /// Diagonal of ∂²R/∂θ² (every kind has a diagonal Hessian).
    pub fn hessian_diagonal(&self, s: f64, p: usize) -> DVector<f64> {
        self.hvp(s, &DVector::from_element(p, 1.0))
    }

    /// ∂R/∂θ for generic scalars.
    ///
    /// With `s` a dual variable and θ carrying its tangent θ̇, the tangent of the
    /// result is `ρ + (∂²R/∂θ²)θ̇`, which is what the dual-number trainers use.
    /// The caller is responsible for dimension checks.
    pub fn grad_generic<T: Scalar>(&self, s: T, theta: &[T]) -> Vec<T> {
        let two = T::from(2.0);
        match self {
            Regularizer::L2 => theta.iter().map(|&t| two * s * t).collect(),
            Regularizer::MaskedL2 { mask } => {
                let mut out = vec![T::from(0.0); theta.len()];
                for &k in mask {
                    out[k] = two * s * theta[k];
                }
                out
            }
            Regularizer::SharedMeanL2 { center } => theta
                .iter()
                .zip(center.iter())
                .map(|(&t, &c)| two * s * (t - T::from(c)))
                .collect(),
            Regularizer::Linear { direction } => {
                direction.iter().map(|&v| s * T::from(v)).collect()
            }
        }
    }
}

/// `(R, ∂R/∂θ, ρ, hvp)` at `(s, θ)`.
pub fn reg_eval<'a>(reg: &'a Regularizer, s: f64, theta: &DVector<f64>) -> Result<RegEval<'a>> {
    reg.eval(s, theta)
}
