//! Label expectations by Monte Carlo: the raw influence averages to zero,
//! its square matches the closed form.

use regtan::active::{closed_form_expected_sq_influence, LabelFunctional, Scorer};
use regtan::influence::{regularity_tangent, TangentMethod};
use regtan::model::synthetic::reference_problem;
use regtan::model::{noise_variance, RawInput};
use regtan::optimize::fit_normal_equations;

fn main() -> regtan::Result<()> {
    let problem = reference_problem(42, 0.05)?;
    let theta = fit_normal_equations(&problem)?;
    let tangent = regularity_tangent(&problem, &theta, &TangentMethod::Direct)?.tangent;
    let noise = noise_variance(&problem, &theta)?;
    let scorer = Scorer::new(&problem, &theta, &tangent, noise)?;
    let reference: Vec<usize> = (0..problem.n()).collect();
    let x = RawInput::Scalar(0.1);

    let raw = scorer.mc_expected(&x, &LabelFunctional::Influence { reference: reference.clone() }, 100_000, 1)?;
    println!("E[influence]   = {:+.3e} ± {:.1e}", raw.mean, raw.stderr);

    let sq = scorer.mc_expected(&x, &LabelFunctional::SquaredInfluence { reference: reference.clone() }, 100_000, 2)?;
    let closed = closed_form_expected_sq_influence(&problem, &theta, &x, &reference, noise)?;
    println!("E[influence^2] = {:.5e} ± {:.1e}   closed form {:.5e}", sq.mean, sq.stderr, closed);
    Ok(())
}
