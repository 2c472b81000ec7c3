//! Rank unlabeled candidates across the gap with each query heuristic.

use regtan::active::{Candidate, Heuristic, HeuristicKind, Scorer};
use regtan::influence::{regularity_tangent, TangentMethod};
use regtan::model::noise_variance;
use regtan::model::synthetic::reference_problem;
use regtan::optimize::fit_normal_equations;

fn main() -> regtan::Result<()> {
    let problem = reference_problem(42, 0.05)?;
    let theta = fit_normal_equations(&problem)?;
    let tangent = regularity_tangent(&problem, &theta, &TangentMethod::Direct)?.tangent;
    let noise = noise_variance(&problem, &theta)?;
    let scorer = Scorer::new(&problem, &theta, &tangent, noise)?;

    let candidates: Vec<Candidate> = (0..9).map(|i| Candidate::unlabeled(-1.0 + 0.25 * i as f64)).collect();
    for kind in HeuristicKind::ALL {
        let heuristic = match kind {
            HeuristicKind::SldLabeled => continue,
            HeuristicKind::SldUnlabeled => Heuristic::sld_unlabeled(),
            HeuristicKind::Si => Heuristic::new(kind, vec![2]),
            _ => Heuristic::over_training_set(kind, &problem),
        };
        let scores = scorer.score_all(&candidates, &heuristic)?;
        let best: Vec<String> = scores.ranking[..3]
            .iter()
            .map(|&i| format!("{:?}", candidates[i].x))
            .collect();
        println!("{:<14} top 3: {}", kind.name(), best.join(", "));
    }
    Ok(())
}
