use nalgebra::{DMatrix, DVector};

use super::data::{Dataset, FeatureMap, RawInput};
use super::regularizer::Regularizer;
use crate::diffkit::Scalar;
use crate::error::{check_dim, Error, Result};

/// Residual variance below which the noise estimate is clamped.
pub const NOISE_VARIANCE_FLOOR: f64 = 1e-12;

/// Regularized least-squares problem
/// `f(θ, s) = Σ_i (θᵀφ(x_i) − y_i)² + R(s, θ)`.
///
/// No `1/n` normalizer is applied anywhere; regularity values are on the
/// scale of the summed loss.
#[derive(Debug, Clone)]
pub struct Problem {
    dataset: Dataset,
    map: FeatureMap,
    regularizer: Regularizer,
    s: f64,
    design: DMatrix<f64>,
    labels: DVector<f64>,
}

impl Problem {
    pub fn new(dataset: Dataset, map: FeatureMap, regularizer: Regularizer, s: f64) -> Result<Self> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::InvalidInput(format!("regularity must be finite and nonnegative, got {s}")));
        }
        let p = map.dim();
        regularizer.validate(p)?;
        let n = dataset.len();
        let mut design = DMatrix::zeros(n, p);
        for (i, x) in dataset.inputs().iter().enumerate() {
            let phi = map.featurize(x)?;
            design.set_row(i, &phi.transpose());
        }
        let labels = DVector::from_column_slice(dataset.labels());
        Ok(Self { dataset, map, regularizer, s, design, labels })
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn feature_map(&self) -> &FeatureMap {
        &self.map
    }

    pub fn regularizer(&self) -> &Regularizer {
        &self.regularizer
    }

    pub fn regularity(&self) -> f64 {
        self.s
    }

    /// Number of data points.
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Number of parameters.
    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    /// Design matrix `X`, one featurized point per row.
    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    pub fn labels(&self) -> &DVector<f64> {
        &self.labels
    }

    pub fn features(&self, i: usize) -> DVector<f64> {
        self.design.row(i).transpose()
    }

    pub fn featurize(&self, x: &RawInput) -> Result<DVector<f64>> {
        self.map.featurize(x)
    }

    /// Same data and regularizer at a different regularity.
    pub fn with_regularity(&self, s: f64) -> Result<Problem> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::InvalidInput(format!("regularity must be finite and nonnegative, got {s}")));
        }
        let mut out = self.clone();
        out.s = s;
        Ok(out)
    }

    /// Same model on a different dataset.
    pub fn with_dataset(&self, dataset: Dataset) -> Result<Problem> {
        Problem::new(dataset, self.map, self.regularizer.clone(), self.s)
    }

    pub fn with_regularizer(&self, regularizer: Regularizer) -> Result<Problem> {
        Problem::new(self.dataset.clone(), self.map, regularizer, self.s)
    }

    pub(crate) fn check_params(&self, theta: &DVector<f64>) -> Result<()> {
        check_dim(self.dim(), theta.len())
    }

    /// Residuals `Xθ − y`.
    pub fn residuals(&self, theta: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_params(theta)?;
        Ok(&self.design * theta - &self.labels)
    }

    /// Loss gradient σ_i = ∂L/∂θ(z_i, θ) of training point `i`.
    pub fn point_gradient(&self, i: usize, theta: &DVector<f64>) -> DVector<f64> {
        let phi = self.features(i);
        let r = phi.dot(theta) - self.labels[i];
        phi * (2.0 * r)
    }

    /// Unregularized empirical risk `Σ_i L(z_i, θ)`.
    pub fn empirical_risk(&self, theta: &DVector<f64>) -> Result<f64> {
        Ok(self.residuals(theta)?.norm_squared())
    }

    /// ∂f/∂θ = Σ_i σ_i + ∂R/∂θ.
    pub fn gradient(&self, theta: &DVector<f64>) -> Result<DVector<f64>> {
        self.gradient_at(self.s, theta)
    }

    /// [`Problem::gradient`] with the regularity overridden.
    pub fn gradient_at(&self, s: f64, theta: &DVector<f64>) -> Result<DVector<f64>> {
        let r = self.residuals(theta)?;
        let reg = self.regularizer.eval(s, theta)?;
        Ok(self.design.tr_mul(&r) * 2.0 + reg.grad)
    }

    /// Complexity gradient ρ = ∂²f/∂s∂θ at θ.
    pub fn complexity_gradient(&self, theta: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.regularizer.eval(self.s, theta)?.rho)
    }

    /// Scale `1 + ‖Xᵀy‖` used by stationarity tolerances.
    pub fn gradient_scale(&self) -> f64 {
        1.0 + (self.design.transpose() * &self.labels).norm()
    }
}

/// Squared loss and its gradient for generic scalars, given features φ.
///
/// Computes `r = θᵀφ − y`, `L = r²` and `∂L/∂θ = 2φr`. Written once so that
/// the plain and dual-number trainers share identical value arithmetic.
pub fn loss_grad_generic<T: Scalar>(phi: &[f64], y: f64, theta: &[T]) -> (T, Vec<T>) {
    let mut pred = T::from(0.0);
    for (&f, &t) in phi.iter().zip(theta) {
        pred += T::from(f) * t;
    }
    let r = pred - T::from(y);
    let two_r = T::from(2.0) * r;
    let grad = phi.iter().map(|&f| T::from(f) * two_r).collect();
    (r * r, grad)
}

/// Squared loss `L(z, θ) = (θᵀφ(x) − y)²` and its gradient σ_z.
pub fn loss_and_grad(x: &RawInput, y: f64, theta: &DVector<f64>, map: &FeatureMap) -> Result<(f64, DVector<f64>)> {
    let phi = map.featurize(x)?;
    check_dim(phi.len(), theta.len())?;
    let r = phi.dot(theta) - y;
    Ok((r * r, phi * (2.0 * r)))
}

/// `Σ_i L(z_i, θ) + R(s, θ)`.
pub fn objective(problem: &Problem, theta: &DVector<f64>) -> Result<f64> {
    let risk = problem.empirical_risk(theta)?;
    let reg = problem.regularizer().eval(problem.regularity(), theta)?;
    Ok(risk + reg.value)
}

/// Label noise model `y ~ N(θᵀφ(x), σ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    variance: f64,
}

impl NoiseModel {
    /// A zero variance is accepted and makes label expectations degenerate.
    pub fn new(variance: f64) -> Result<Self> {
        if variance.is_finite() && variance >= 0.0 {
            Ok(Self { variance })
        } else {
            Err(Error::InvalidInput(format!("noise variance must be finite and nonnegative, got {variance}")))
        }
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Scaling constant α of the likelihood `exp(−αL)`, `σ² = 1/(2α)`.
    pub fn alpha(&self) -> f64 {
        1.0 / (2.0 * self.variance)
    }
}

/// Mean squared training residual, clamped to [`NOISE_VARIANCE_FLOOR`].
pub fn noise_variance(problem: &Problem, theta: &DVector<f64>) -> Result<NoiseModel> {
    if problem.n() == 0 {
        return Err(Error::Precondition("noise variance needs at least one point".into()));
    }
    let mse = problem.empirical_risk(theta)? / problem.n() as f64;
    NoiseModel::new(mse.max(NOISE_VARIANCE_FLOOR))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ident(xs: &[f64], ys: &[f64], reg: Regularizer, s: f64) -> Problem {
        Problem::new(Dataset::from_scalars(xs, ys).unwrap(), FeatureMap::Identity { dim: 1 }, reg, s).unwrap()
    }

    fn th(x: f64) -> DVector<f64> {
        DVector::from_element(1, x)
    }

    #[test]
    fn loss_examples() {
        let map = FeatureMap::Identity { dim: 1 };
        let cases = [((1.0, 1.0), 0.0, 0.0), ((1.0, 0.0), 1.0, 2.0), ((2.0, 1.0), 1.0, 4.0)];
        for ((x, y), l, g) in cases {
            let (loss, grad) = loss_and_grad(&RawInput::Scalar(x), y, &th(1.0), &map).unwrap();
            assert_eq!(loss, l);
            assert_eq!(grad[0], g);
        }
    }

    #[test]
    fn objective_examples() {
        assert_eq!(objective(&ident(&[1.0], &[1.0], Regularizer::L2, 1.0), &th(0.0)).unwrap(), 1.0);
        assert_eq!(objective(&ident(&[1.0], &[1.0], Regularizer::L2, 1.0), &th(1.0)).unwrap(), 1.0);
        let two = ident(&[1.0, 1.0], &[1.0, 0.0], Regularizer::L2, 0.0);
        assert_eq!(objective(&two, &th(0.5)).unwrap(), 0.5);
    }

    #[test]
    fn noise_examples() {
        let p = ident(&[1.0, 1.0], &[1.0, 0.0], Regularizer::L2, 0.0);
        assert_eq!(noise_variance(&p, &th(0.5)).unwrap().variance(), 0.25);
        let p = ident(&[1.0], &[1.0], Regularizer::L2, 0.0);
        assert_eq!(noise_variance(&p, &th(1.0)).unwrap().variance(), NOISE_VARIANCE_FLOOR);
        let p = ident(&[1.0, 1.0], &[2.0, 0.0], Regularizer::L2, 0.0);
        assert_eq!(noise_variance(&p, &th(1.0)).unwrap().variance(), 1.0);
    }

    #[test]
    fn rejects_bad_regularity() {
        let d = Dataset::from_scalars(&[1.0], &[1.0]).unwrap();
        assert!(Problem::new(d.clone(), FeatureMap::Identity { dim: 1 }, Regularizer::L2, -1.0).is_err());
        assert!(Problem::new(d, FeatureMap::Identity { dim: 1 }, Regularizer::L2, f64::NAN).is_err());
    }

    #[test]
    fn generic_matches_plain() {
        let phi = [1.0, 0.5, 0.25];
        let theta = DVector::from_column_slice(&[0.2, -0.4, 1.5]);
        let (l, g) = loss_grad_generic(&phi, 0.3, theta.as_slice());
        let (l2, g2) = loss_and_grad(&RawInput::Scalar(0.5), 0.3, &theta, &FeatureMap::Polynomial { degree: 2 }).unwrap();
        assert_eq!(l, l2);
        assert_eq!(g, g2.as_slice());
    }
}
