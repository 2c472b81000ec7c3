use nalgebra::{DMatrix, DVector};

use super::dual::{Dual, DualParams};
use crate::error::{check_dim, Error, Result};
use crate::model::{loss_grad_generic, FeatureMap, Problem, RawInput};

/// Largest parameter count for which dense Hessians are formed.
pub const DENSE_CAP: usize = 512;

/// A symmetric linear operator `v ↦ Hv`.
pub trait HvpOracle {
    fn dim(&self) -> usize;
    fn apply(&self, v: &DVector<f64>) -> DVector<f64>;
}

impl HvpOracle for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        self * v
    }
}

impl<T: HvpOracle + ?Sized> HvpOracle for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        (**self).apply(v)
    }
}

/// Wraps a closure as an oracle.
pub struct FnOracle<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&DVector<f64>) -> DVector<f64>> FnOracle<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&DVector<f64>) -> DVector<f64>> HvpOracle for FnOracle<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        (self.f)(v)
    }
}

/// Hessian of the full objective `∂²f/∂θ²` at a fixed θ, applied matrix-free.
#[derive(Debug, Clone, Copy)]
pub struct ObjectiveHessian<'a> {
    problem: &'a Problem,
}

impl<'a> ObjectiveHessian<'a> {
    /// The squared loss and every regularizer kind are quadratic, so the
    /// Hessian does not depend on θ beyond the dimension check.
    pub fn new(problem: &'a Problem, theta: &DVector<f64>) -> Result<Self> {
        check_dim(problem.dim(), theta.len())?;
        Ok(Self { problem })
    }
}

impl HvpOracle for ObjectiveHessian<'_> {
    fn dim(&self) -> usize {
        self.problem.dim()
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let x = self.problem.design();
        let xv = x * v;
        x.transpose() * xv * 2.0 + self.problem.regularizer().hvp(self.problem.regularity(), v)
    }
}

/// `(∂²L/∂θ²)v = 2φ(φᵀv)` for the squared loss.
pub fn loss_hvp(
    x: &RawInput,
    _y: f64,
    theta: &DVector<f64>,
    v: &DVector<f64>,
    map: &FeatureMap,
) -> Result<DVector<f64>> {
    let phi = map.featurize(x)?;
    check_dim(phi.len(), theta.len())?;
    check_dim(phi.len(), v.len())?;
    Ok(&phi * (2.0 * phi.dot(v)))
}

/// The same product obtained by pushing `θ + v·dt` through the loss gradient
/// and reading off the tangent.
pub fn loss_hvp_dual(
    x: &RawInput,
    y: f64,
    theta: &DVector<f64>,
    v: &DVector<f64>,
    map: &FeatureMap,
) -> Result<DVector<f64>> {
    let phi = map.featurize(x)?;
    let dual = DualParams::new(theta.clone(), v.clone())?;
    check_dim(phi.len(), dual.dim())?;
    let (_, grad) = loss_grad_generic::<Dual>(phi.as_slice(), y, &dual.to_duals());
    Ok(DVector::from_iterator(grad.len(), grad.iter().map(|g| g.eps)))
}

/// `Hv = Σ_i (∂²L_i/∂θ²)v + (∂²R/∂θ²)v`.
pub fn objective_hvp(problem: &Problem, theta: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
    check_dim(problem.dim(), v.len())?;
    Ok(ObjectiveHessian::new(problem, theta)?.apply(v))
}

/// Dense `H = 2XᵀX + ∂²R/∂θ²`.
pub fn assemble_hessian(problem: &Problem, theta: &DVector<f64>) -> Result<DMatrix<f64>> {
    assemble_hessian_capped(problem, theta, DENSE_CAP)
}

pub fn assemble_hessian_capped(problem: &Problem, theta: &DVector<f64>, cap: usize) -> Result<DMatrix<f64>> {
    let p = problem.dim();
    if p > cap {
        return Err(Error::SizeCap { p, cap });
    }
    check_dim(p, theta.len())?;
    let x = problem.design();
    let mut h = x.transpose() * x * 2.0;
    let diag = problem.regularizer().hessian_diagonal(problem.regularity(), p);
    for k in 0..p {
        h[(k, k)] += diag[k];
    }
    Ok(h)
}

/// Solve `Hx = b` for symmetric `H`; Cholesky first, LU as fallback.
pub fn dense_solve(h: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    check_dim(h.nrows(), b.len())?;
    let scale = h.diagonal().amax();
    if let Some(chol) = h.clone().cholesky() {
        let pivot_min = chol.l_dirty().diagonal().iter().fold(f64::INFINITY, |m, &d| m.min(d * d));
        if pivot_min > 1e-14 * scale {
            return Ok(chol.solve(b));
        }
        return Err(Error::Singular(format!(
            "pivot {pivot_min:e} negligible relative to diagonal scale {scale:e}"
        )));
    }
    let lu = h.clone().lu();
    let x = lu
        .solve(b)
        .ok_or_else(|| Error::Singular("matrix is not invertible".into()))?;
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(Error::Singular("solution is not finite".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Dataset, Regularizer};

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn one_d(xs: &[f64], ys: &[f64], s: f64) -> Problem {
        Problem::new(Dataset::from_scalars(xs, ys).unwrap(), FeatureMap::Identity { dim: 1 }, Regularizer::L2, s)
            .unwrap()
    }

    #[test]
    fn loss_hvp_examples() {
        let map = FeatureMap::Identity { dim: 1 };
        let th = v(&[0.7]);
        assert_eq!(loss_hvp(&RawInput::Scalar(1.0), 0.0, &th, &v(&[3.0]), &map).unwrap(), v(&[6.0]));
        assert_eq!(loss_hvp(&RawInput::Scalar(2.0), 0.0, &th, &v(&[1.0]), &map).unwrap(), v(&[8.0]));
        assert_eq!(loss_hvp(&RawInput::Scalar(-4.0), 9.0, &th, &v(&[0.0]), &map).unwrap(), v(&[0.0]));
        assert_eq!(loss_hvp_dual(&RawInput::Scalar(2.0), 5.0, &th, &v(&[1.0]), &map).unwrap(), v(&[8.0]));
    }

    #[test]
    fn objective_hvp_examples() {
        let th = v(&[0.0]);
        assert_eq!(objective_hvp(&one_d(&[1.0], &[1.0], 1.0), &th, &v(&[1.0])).unwrap(), v(&[4.0]));
        assert_eq!(objective_hvp(&one_d(&[1.0, 1.0], &[1.0, 0.0], 0.0), &th, &v(&[1.0])).unwrap(), v(&[4.0]));
        assert_eq!(objective_hvp(&one_d(&[1.0], &[1.0], 1.0), &th, &v(&[0.0])).unwrap(), v(&[0.0]));
    }

    #[test]
    fn hessian_examples() {
        let h = assemble_hessian(&one_d(&[1.0], &[1.0], 1.0), &v(&[0.0])).unwrap();
        assert_eq!(h, DMatrix::from_element(1, 1, 4.0));

        let d = Dataset::new(vec![vec![1.0, 0.0].into(), vec![0.0, 1.0].into()], vec![0.0, 0.0]).unwrap();
        let p = Problem::new(d, FeatureMap::Identity { dim: 2 }, Regularizer::L2, 0.0).unwrap();
        assert_eq!(assemble_hessian(&p, &v(&[0.0, 0.0])).unwrap(), DMatrix::identity(2, 2) * 2.0);

        let lin = p
            .with_regularizer(Regularizer::Linear { direction: v(&[1.0, 1.0]) })
            .unwrap()
            .with_regularity(3.0)
            .unwrap();
        assert_eq!(assemble_hessian(&lin, &v(&[0.0, 0.0])).unwrap(), DMatrix::identity(2, 2) * 2.0);
    }

    #[test]
    fn cap_enforced() {
        let p = one_d(&[1.0], &[1.0], 1.0);
        assert!(matches!(assemble_hessian_capped(&p, &v(&[0.0]), 0), Err(Error::SizeCap { p: 1, cap: 0 })));
    }

    #[test]
    fn dense_solve_detects_singular() {
        let h = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        assert!(matches!(dense_solve(&h, &v(&[1.0, 1.0])), Err(Error::Singular(_))));
        let h = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 2.0]);
        assert!((dense_solve(&h, &v(&[4.0, 2.0])).unwrap() - v(&[1.0, 1.0])).amax() < 1e-15);
    }
}
