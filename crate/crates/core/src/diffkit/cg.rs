use nalgebra::DVector;

use super::hvp::HvpOracle;
use crate::error::{check_dim, Error, Result};

/// The recurrence residual is replaced by `b − Hx` this often.
const RESIDUAL_REFRESH: usize = 50;

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `‖Hx − b‖ / ‖b‖` at exit (0 when `b = 0`).
    pub relative_residual: f64,
}

/// Conjugate gradients for `Hx = b` with symmetric positive definite `H`.
///
/// Stops once the true residual satisfies `‖Hx − b‖ ≤ tol·‖b‖`, or after
/// `max_iter` iterations with `converged = false`.
pub fn cg_solve<O: HvpOracle>(oracle: &O, b: &DVector<f64>, tol: f64, max_iter: usize) -> Result<CgOutcome> {
    check_dim(oracle.dim(), b.len())?;
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("cg tolerance must be positive, got {tol}")));
    }
    let b_norm = b.norm();
    let mut x = DVector::zeros(b.len());
    if b_norm == 0.0 {
        return Ok(CgOutcome { x, iterations: 0, converged: true, relative_residual: 0.0 });
    }
    let target = tol * b_norm;

    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr = r.norm_squared();
    let mut iterations = 0;

    while iterations < max_iter {
        let hp = oracle.apply(&p);
        let php = p.dot(&hp);
        if !php.is_finite() || php <= 0.0 {
            return Err(Error::NumericalBreakdown(format!(
                "curvature pᵀHp = {php:e} at iteration {iterations}"
            )));
        }
        let alpha = rr / php;
        x.axpy(alpha, &p, 1.0);
        iterations += 1;

        if iterations % RESIDUAL_REFRESH == 0 {
            r = b - oracle.apply(&x);
        } else {
            r.axpy(-alpha, &hp, 1.0);
        }
        let rr_next = r.norm_squared();
        if !rr_next.is_finite() {
            return Err(Error::NumericalBreakdown(format!("non-finite residual at iteration {iterations}")));
        }

        if rr_next.sqrt() <= target {
            // Confirm against the true residual before declaring success.
            let true_r = b - oracle.apply(&x);
            let true_norm = true_r.norm();
            if true_norm <= target {
                return Ok(CgOutcome { x, iterations, converged: true, relative_residual: true_norm / b_norm });
            }
            r = true_r;
            rr = r.norm_squared();
            p = r.clone();
            continue;
        }

        let beta = rr_next / rr;
        p = &r + &p * beta;
        rr = rr_next;
    }

    let relative_residual = (b - oracle.apply(&x)).norm() / b_norm;
    Ok(CgOutcome { x, iterations, converged: relative_residual <= tol, relative_residual })
}
