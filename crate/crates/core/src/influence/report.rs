use nalgebra::DVector;

use super::{i_up_reg, InverseHessian};
use crate::error::Result;
use crate::model::{Dataset, Problem};

#[derive(Debug, Clone, PartialEq)]
pub struct PointInfluence {
    pub index: usize,
    pub i_up_reg: f64,
    pub self_influence: f64,
    /// Total `I_up,loss` of this point on the named test set.
    pub i_up_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceReport {
    pub points: Vec<PointInfluence>,
    pub test_set: Option<String>,
}

/// Per-training-point influence summary at `(θ*, θ̇)`.
pub fn influence_report(
    inv: &InverseHessian<'_>,
    tangent: &DVector<f64>,
    test: Option<(&str, &Dataset)>,
) -> Result<InfluenceReport> {
    let problem: &Problem = inv.problem();
    let theta = inv.theta();
    let sigma_test = match test {
        Some((_, data)) => {
            let mut total = DVector::zeros(problem.dim());
            for (x, &y) in data.inputs().iter().zip(data.labels()) {
                total += inv.loss_gradient(x, y)?;
            }
            Some(inv.solve(&total)?)
        }
        None => None,
    };
    let mut points = Vec::with_capacity(problem.n());
    for i in 0..problem.n() {
        let (x, y) = problem.dataset().point(i);
        let sigma = problem.point_gradient(i, theta);
        points.push(PointInfluence {
            index: i,
            i_up_reg: i_up_reg(problem, theta, tangent, x, y)?,
            self_influence: sigma.dot(&inv.solve(&sigma)?),
            i_up_loss: sigma_test.as_ref().map(|h_inv_test| -h_inv_test.dot(&sigma)),
        });
    }
    Ok(InfluenceReport { points, test_set: test.map(|(name, _)| name.to_string()) })
}
