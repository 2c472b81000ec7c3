//! Influence functions built on the implicit function theorem: the regularity
//! tangent `θ̇ = −H⁻¹ρ`, `I_up,params`, `I_up,loss`, `I_up,reg`,
//! self-influence, and the perturbative LOOCV estimate `Gpert`.
//!
//! Up-weighting adds `ε·L(z, θ)` to the objective; the Hessian is
//! `H = ∂²f/∂θ² = 2XᵀX + ∂²R/∂θ²`, so for L2 the tangent is
//! `−(XᵀX + sI)⁻¹θ*`.

mod report;

use nalgebra::{linalg::Cholesky, DMatrix, DVector, Dyn};

use crate::diffkit::{
    assemble_hessian, cg_solve, dense_solve, objective_hvp, DualParams, HvpOracle, ObjectiveHessian, DENSE_CAP,
};
use crate::error::{Error, Result};
use crate::model::{loss_and_grad, Problem, RawInput};
use crate::optimize::{fit_normal_equations, run_sgdf, TrainConfig};

pub use report::{influence_report, InfluenceReport, PointInfluence};

/// Relative gradient norm above which θ is reported as non-stationary.
pub const STATIONARITY_TOLERANCE: f64 = 1e-6;

/// How `H⁻¹b` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolveMethod {
    /// Dense factorization, `p ≤ DENSE_CAP`.
    Direct,
    Cg { tol: f64, max_iter: usize },
}

impl SolveMethod {
    pub fn cg() -> Self {
        SolveMethod::Cg { tol: 1e-12, max_iter: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TangentMethod {
    Direct,
    Cg { tol: f64, max_iter: usize },
    /// Run SGDF from `(θ*, 0)` with this configuration.
    Sgdf(TrainConfig),
}

#[derive(Debug, Clone)]
pub struct TangentResult {
    pub tangent: DVector<f64>,
    pub converged: bool,
    /// `‖Hθ̇ + ρ‖ / ‖ρ‖` (absolute when ρ = 0).
    pub relative_residual: f64,
}

/// Warn when `θ` is not a stationary point of `problem`.
pub fn check_stationary(problem: &Problem, theta: &DVector<f64>) -> Result<bool> {
    let g = problem.gradient(theta)?.norm();
    let bound = STATIONARITY_TOLERANCE * problem.gradient_scale();
    if g > bound {
        log::warn!("θ is not stationary: gradient norm {g:e} exceeds {bound:e}");
        Ok(false)
    } else {
        Ok(true)
    }
}

/// Reusable `H⁻¹` at fixed trained parameters.
pub struct InverseHessian<'a> {
    problem: &'a Problem,
    theta: DVector<f64>,
    kind: Inner,
}

enum Inner {
    Dense(Cholesky<f64, Dyn>, DMatrix<f64>),
    Cg { tol: f64, max_iter: usize },
}

impl<'a> InverseHessian<'a> {
    pub fn new(problem: &'a Problem, theta: &DVector<f64>, method: SolveMethod) -> Result<Self> {
        problem.check_params(theta)?;
        let kind = match method {
            SolveMethod::Direct => {
                let h = assemble_hessian(problem, theta)?;
                // Validates conditioning and reports singular systems uniformly.
                dense_solve(&h, &DVector::zeros(h.nrows()))?;
                let chol = h
                    .clone()
                    .cholesky()
                    .ok_or_else(|| Error::Singular("Hessian is not positive definite".into()))?;
                Inner::Dense(chol, h)
            }
            SolveMethod::Cg { tol, max_iter } => Inner::Cg { tol, max_iter },
        };
        Ok(Self { problem, theta: theta.clone(), kind })
    }

    /// Dense when the problem is small enough, CG otherwise.
    pub fn auto(problem: &'a Problem, theta: &DVector<f64>) -> Result<Self> {
        if problem.dim() <= DENSE_CAP {
            Self::new(problem, theta, SolveMethod::Direct)
        } else {
            Self::new(problem, theta, SolveMethod::cg())
        }
    }

    pub fn problem(&self) -> &Problem {
        self.problem
    }

    pub fn theta(&self) -> &DVector<f64> {
        &self.theta
    }

    pub fn hessian_apply(&self, v: &DVector<f64>) -> DVector<f64> {
        match &self.kind {
            Inner::Dense(_, h) => h * v,
            Inner::Cg { .. } => ObjectiveHessian::new(self.problem, &self.theta).expect("checked").apply(v),
        }
    }

    /// `H⁻¹b`; CG non-convergence is an error here.
    pub fn solve(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        let (x, converged, res) = self.solve_flagged(b)?;
        if converged {
            Ok(x)
        } else {
            Err(Error::NotConverged(format!("CG relative residual {res:e}")))
        }
    }

    /// `H⁻¹b` with a convergence flag and relative residual.
    pub fn solve_flagged(&self, b: &DVector<f64>) -> Result<(DVector<f64>, bool, f64)> {
        self.problem.check_params(b)?;
        match &self.kind {
            Inner::Dense(chol, _) => Ok((chol.solve(b), true, 0.0)),
            Inner::Cg { tol, max_iter } => {
                let oracle = ObjectiveHessian::new(self.problem, &self.theta)?;
                let out = cg_solve(&oracle, b, *tol, *max_iter)?;
                Ok((out.x, out.converged, out.relative_residual))
            }
        }
    }

    /// Loss gradient σ_z at the trained parameters.
    pub fn loss_gradient(&self, x: &RawInput, y: f64) -> Result<DVector<f64>> {
        Ok(loss_and_grad(x, y, &self.theta, self.problem.feature_map())?.1)
    }

    pub fn i_up_params(&self, x: &RawInput, y: f64) -> Result<DVector<f64>> {
        Ok(-self.solve(&self.loss_gradient(x, y)?)?)
    }

    pub fn i_up_loss(&self, test: (&RawInput, f64), z: (&RawInput, f64)) -> Result<f64> {
        let sigma_test = self.loss_gradient(test.0, test.1)?;
        let sigma_z = self.loss_gradient(z.0, z.1)?;
        Ok(-sigma_test.dot(&self.solve(&sigma_z)?))
    }

    pub fn self_influence(&self, x: &RawInput, y: f64) -> Result<f64> {
        let sigma = self.loss_gradient(x, y)?;
        Ok(sigma.dot(&self.solve(&sigma)?))
    }
}

/// `θ̇ = dθ*/ds = −H⁻¹ρ`.
pub fn regularity_tangent(problem: &Problem, theta: &DVector<f64>, method: &TangentMethod) -> Result<TangentResult> {
    check_stationary(problem, theta)?;
    let rho = problem.complexity_gradient(theta)?;
    let (tangent, converged) = match method {
        TangentMethod::Direct => {
            let inv = InverseHessian::new(problem, theta, SolveMethod::Direct)?;
            (-inv.solve(&rho)?, true)
        }
        TangentMethod::Cg { tol, max_iter } => {
            let inv = InverseHessian::new(problem, theta, SolveMethod::Cg { tol: *tol, max_iter: *max_iter })?;
            let (x, converged, _) = inv.solve_flagged(&rho)?;
            (-x, converged)
        }
        TangentMethod::Sgdf(cfg) => {
            let cfg = TrainConfig { track_tangent: true, ..cfg.clone() };
            let out = run_sgdf(problem, &cfg, &DualParams::primal(theta.clone()))?;
            (out.params.tangent, out.converged)
        }
    };
    let r = objective_hvp(problem, theta, &tangent)? + &rho;
    let scale = rho.norm();
    let relative_residual = if scale > 0.0 { r.norm() / scale } else { r.norm() };
    Ok(TangentResult { tangent, converged, relative_residual })
}

/// `I_up,params(z) = −H⁻¹σ_z`.
pub fn i_up_params(problem: &Problem, theta: &DVector<f64>, x: &RawInput, y: f64) -> Result<DVector<f64>> {
    check_stationary(problem, theta)?;
    InverseHessian::auto(problem, theta)?.i_up_params(x, y)
}

/// `I_up,loss(z, z_test) = −σ_testᵀH⁻¹σ_z`; symmetric in its two points.
pub fn i_up_loss(problem: &Problem, theta: &DVector<f64>, test: (&RawInput, f64), z: (&RawInput, f64)) -> Result<f64> {
    check_stationary(problem, theta)?;
    InverseHessian::auto(problem, theta)?.i_up_loss(test, z)
}

/// `I_up,reg(z) = dR_s(θ*)/dε = σ_zᵀθ̇`, with `R_s = ∂R/∂s`.
pub fn i_up_reg(problem: &Problem, theta: &DVector<f64>, tangent: &DVector<f64>, x: &RawInput, y: f64) -> Result<f64> {
    problem.check_params(tangent)?;
    let (_, sigma) = loss_and_grad(x, y, theta, problem.feature_map())?;
    Ok(sigma.dot(tangent))
}

/// `σ_zᵀH⁻¹σ_z`, the first-order leave-one-out loss correction.
pub fn self_influence(problem: &Problem, theta: &DVector<f64>, x: &RawInput, y: f64) -> Result<f64> {
    check_stationary(problem, theta)?;
    InverseHessian::auto(problem, theta)?.self_influence(x, y)
}

/// `Gpert(s) = Σ_j L(z_j, θ*(s)) + Σ_j σ_jᵀH⁻¹σ_j`, fitting θ*(s) by the
/// normal equations.
pub fn gpert(problem: &Problem, s: f64) -> Result<f64> {
    let at_s = problem.with_regularity(s)?;
    let theta = fit_normal_equations(&at_s)?;
    gpert_at(&at_s, &theta)
}

/// `Gpert` at already-trained parameters.
pub fn gpert_at(problem: &Problem, theta: &DVector<f64>) -> Result<f64> {
    let inv = InverseHessian::auto(problem, theta)?;
    let mut total = problem.empirical_risk(theta)?;
    for i in 0..problem.n() {
        let sigma = problem.point_gradient(i, theta);
        total += sigma.dot(&inv.solve(&sigma)?);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Dataset, FeatureMap, Regularizer};

    fn ident(xs: &[f64], ys: &[f64], s: f64) -> Problem {
        Problem::new(Dataset::from_scalars(xs, ys).unwrap(), FeatureMap::Identity { dim: 1 }, Regularizer::L2, s).unwrap()
    }

    fn sc(x: f64) -> RawInput {
        RawInput::Scalar(x)
    }

    #[test]
    fn tangent_one_point() {
        let p = ident(&[1.0], &[1.0], 1.0);
        let th = fit_normal_equations(&p).unwrap();
        for m in [TangentMethod::Direct, TangentMethod::Cg { tol: 1e-12, max_iter: 10 }] {
            let t = regularity_tangent(&p, &th, &m).unwrap();
            assert!((t.tangent[0] + 0.25).abs() < 1e-14);
            assert!(t.converged);
        }
    }

    #[test]
    fn tangent_zero_at_zero_parameters() {
        let p = Problem::new(Dataset::from_scalars(&[], &[]).unwrap(), FeatureMap::Identity { dim: 1 }, Regularizer::L2, 1.0)
            .unwrap();
        let th = DVector::zeros(1);
        let t = regularity_tangent(&p, &th, &TangentMethod::Cg { tol: 1e-12, max_iter: 10 }).unwrap();
        assert_eq!(t.tangent[0], 0.0);
        let t = regularity_tangent(&p, &th, &TangentMethod::Direct).unwrap();
        assert_eq!(t.tangent[0], 0.0);
    }

    #[test]
    fn up_weighting_examples() {
        // Base point (1, 1) at s = 0: θ* = 1, H = 2.
        let p = ident(&[1.0], &[1.0], 0.0);
        let th = fit_normal_equations(&p).unwrap();
        let ip = i_up_params(&p, &th, &sc(1.0), 0.0).unwrap();
        assert!((ip[0] + 1.0).abs() < 1e-14);
        assert!(i_up_params(&p, &th, &sc(2.0), 2.0).unwrap()[0].abs() < 1e-14);
        // θ̇ = −1 is the tangent of the up-weighting curve θ(ε) = 1/(1 + ε)
        // for the ε direction; here it feeds I_up,reg for z = (1, 0).
        let val = i_up_reg(&p, &th, &DVector::from_element(1, -1.0), &sc(1.0), 0.0).unwrap();
        assert!((val + 2.0).abs() < 1e-14);
        assert!(i_up_reg(&p, &th, &DVector::from_element(1, -1.0), &sc(3.0), 3.0).unwrap().abs() < 1e-14);
    }

    #[test]
    fn self_influence_and_gpert_two_points() {
        let p = ident(&[1.0, 1.0], &[1.0, 0.0], 0.0);
        let th = fit_normal_equations(&p).unwrap();
        assert!((th[0] - 0.5).abs() < 1e-15);
        for (x, y) in [(1.0, 1.0), (1.0, 0.0)] {
            let si = self_influence(&p, &th, &sc(x), y).unwrap();
            assert!((si - 0.25).abs() < 1e-15);
            let iul = i_up_loss(&p, &th, (&sc(x), y), (&sc(x), y)).unwrap();
            assert!((si + iul).abs() < 1e-15);
        }
        assert!((gpert(&p, 0.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_residual_test_point_has_no_influence() {
        let p = ident(&[1.0, 2.0], &[1.0, 0.0], 0.5);
        let th = fit_normal_equations(&p).unwrap();
        let y_fit = th[0] * 3.0;
        for z in [(1.0, 1.0), (2.0, -4.0), (0.5, 9.0)] {
            let v = i_up_loss(&p, &th, (&sc(3.0), y_fit), (&sc(z.0), z.1)).unwrap();
            assert!(v.abs() < 1e-14);
        }
    }

    #[test]
    fn gpert_exact_fit_is_zero() {
        let p = ident(&[1.0, 2.0], &[2.0, 4.0], 0.0);
        assert!(gpert(&p, 0.0).unwrap().abs() < 1e-20);
    }
}
