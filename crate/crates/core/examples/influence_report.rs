//! Per-point influence summary: how each training point moves the
//! regularizer (I_up,reg), its self-influence, and its influence on a test set.

use regtan::influence::{influence_report, regularity_tangent, InverseHessian, TangentMethod};
use regtan::model::synthetic::reference_problem;
use regtan::model::{Dataset, RawInput};
use regtan::optimize::fit_normal_equations;

fn main() -> regtan::Result<()> {
    let problem = reference_problem(42, 0.05)?;
    let theta = fit_normal_equations(&problem)?;
    let tangent = regularity_tangent(&problem, &theta, &TangentMethod::Direct)?.tangent;
    let inv = InverseHessian::auto(&problem, &theta)?;

    let xs: Vec<f64> = (0..5).map(|i| -0.4 + 0.2 * i as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|x| (std::f64::consts::PI * x).sin()).collect();
    let test = Dataset::from_scalars(&xs, &ys)?;

    let report = influence_report(&inv, &tangent, Some(("gap", &test)))?;
    println!("{:>3} {:>8} {:>11} {:>11} {:>11}", "i", "x", "I_up,reg", "self-infl", "I_up,loss");
    for p in &report.points {
        let RawInput::Scalar(x) = problem.dataset().point(p.index).0 else { unreachable!() };
        println!(
            "{:>3} {:>8.4} {:>11.4e} {:>11.4e} {:>11.4e}",
            p.index,
            x,
            p.i_up_reg,
            p.self_influence,
            p.i_up_loss.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
