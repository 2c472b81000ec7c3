//! Fit the gapped polynomial problem and compute the regularity tangent
//! three ways: dense solve, conjugate gradients and SGDF.

use nalgebra::DVector;
use regtan::diffkit::DualParams;
use regtan::influence::{regularity_tangent, TangentMethod};
use regtan::model::synthetic::reference_problem;
use regtan::optimize::{fit_normal_equations, run_sgdf, TrainConfig};

fn fmt(v: &DVector<f64>) -> String {
    v.iter().map(|c| format!("{c:+.5}")).collect::<Vec<_>>().join(" ")
}

fn main() -> regtan::Result<()> {
    let problem = reference_problem(42, 0.05)?;
    let theta = fit_normal_equations(&problem)?;
    println!("theta*     = {}", fmt(&theta));

    let direct = regularity_tangent(&problem, &theta, &TangentMethod::Direct)?;
    let cg = regularity_tangent(&problem, &theta, &TangentMethod::Cg { tol: 1e-12, max_iter: 1000 })?;
    println!("theta_dot  = {}", fmt(&direct.tangent));
    println!("cg vs direct: {:.2e}", (&cg.tangent - &direct.tangent).norm() / direct.tangent.norm());

    // SGDF trains θ and θ̇ together from zero.
    let cfg = TrainConfig { tolerance: 0.0, ..TrainConfig::sgd(5e-4, 200_000, 7).with_tangent() };
    let zero = DualParams::primal(DVector::zeros(problem.dim()));
    let sgdf = run_sgdf(&problem, &cfg, &zero)?;
    println!(
        "sgdf after {} epochs: theta rel err {:.2e}, tangent rel err {:.2e}",
        sgdf.epochs,
        (&sgdf.params.value - &theta).norm() / theta.norm(),
        (&sgdf.params.tangent - &direct.tangent).norm() / direct.tangent.norm()
    );
    Ok(())
}
