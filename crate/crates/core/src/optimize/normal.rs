use nalgebra::DVector;

use crate::diffkit::{assemble_hessian, dense_solve};
use crate::error::{Error, Result};
use crate::model::Problem;

/// Closed-form minimizer of the quadratic objective.
///
/// One Newton step from θ = 0, `θ* = −H⁻¹∇f(0)`. For L2 this is the familiar
/// `(XᵀX + sI)⁻¹Xᵀy`; for the shared-mean regularizer it solves
/// `(XᵀX + sI)θ = Xᵀy + sθ₀`.
pub fn fit_normal_equations(problem: &Problem) -> Result<DVector<f64>> {
    let p = problem.dim();
    let zero = DVector::zeros(p);
    let hessian = assemble_hessian(problem, &zero)?;
    let grad0 = problem.gradient(&zero)?;
    let theta = -dense_solve(&hessian, &grad0).map_err(|e| match e {
        Error::Singular(msg) => Error::Singular(format!(
            "normal equations at s = {}: {msg}",
            problem.regularity()
        )),
        other => other,
    })?;
    let residual = problem.gradient(&theta)?.norm();
    let bound = 1e-8 * problem.gradient_scale();
    if residual > bound {
        log::warn!("normal-equation solution has gradient norm {residual:e} (bound {bound:e})");
    }
    Ok(theta)
}
