//! Choose `s` by exact LOOCV, by its perturbative estimate Gpert, and by
//! joint θ/s descent on a held-out point.

use regtan::cv::{
    holdout_error, joint_hyperopt, log_grid, objective_table, optimize_s, train_test_split, JointConfig, SObjective,
    SOptConfig,
};
use regtan::model::synthetic::reference_problem;
use regtan::optimize::TrainConfig;

fn main() -> regtan::Result<()> {
    let problem = reference_problem(42, 0.05)?;
    let grid = log_grid((1e-3, 1e1), 9);
    let loocv = objective_table(&problem, SObjective::Loocv, &grid)?;
    let gpert = objective_table(&problem, SObjective::Gpert, &grid)?;
    println!("{:>10} {:>10} {:>10}", "s", "LOOCV", "Gpert");
    for (l, g) in loocv.iter().zip(&gpert) {
        println!("{:>10.3e} {:>10.4} {:>10.4}", l.0, l.1, g.1);
    }
    let (s_star, value) = optimize_s(&problem, &SOptConfig::golden((1e-3, 1e1), 20), SObjective::Loocv)?;
    println!("LOOCV optimum: s = {s_star:.4e} ({value:.4})");

    let (train, test) = train_test_split(problem.n(), 0.2, 42)?;
    let mut cfg = JointConfig::new(train.clone(), test.clone(), TrainConfig::sgd(0.1, 200_000, 42), 1e-4, 0.05);
    cfg.theta.tolerance = 0.0;
    cfg.bounds = Some((1e-3, 1e1));
    let out = joint_hyperopt(&problem, &cfg)?;
    println!(
        "joint descent: s {:.4e} -> {:.4e}, held-out loss {:.4e} -> {:.4e}",
        cfg.s0,
        out.s,
        holdout_error(&problem, cfg.s0, &train, &test)?,
        holdout_error(&problem, out.s, &train, &test)?
    );
    Ok(())
}
