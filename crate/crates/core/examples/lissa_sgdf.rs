//! LiSSA's inverse-Hessian-vector iteration is SGDF with the parameters
//! frozen: the two tangent streams coincide step by step.

use regtan::influence::{regularity_tangent, TangentMethod};
use regtan::model::synthetic::reference_problem;
use regtan::optimize::{fit_normal_equations, lissa_sgdf_deviation, run_lissa, LissaConfig};

fn main() -> regtan::Result<()> {
    let problem = reference_problem(42, 0.05)?;
    let theta = fit_normal_equations(&problem)?;

    let dev = lissa_sgdf_deviation(&problem, &theta, 1e-3, 42, 100)?;
    println!("max per-step deviation over 100 steps: {dev:.3e}");

    let rho = problem.complexity_gradient(&theta)?;
    let exact = regularity_tangent(&problem, &theta, &TangentMethod::Direct)?.tangent;
    for iterations in [1_000, 10_000, 50_000] {
        let out = run_lissa(&problem, &theta, &LissaConfig::new(rho.clone(), 1e-3, iterations, 42))?;
        let err = (&out.h + &exact).norm() / exact.norm();
        println!("LiSSA {iterations:>6} steps: |-h - theta_dot| / |theta_dot| = {err:.3e}");
    }
    Ok(())
}
