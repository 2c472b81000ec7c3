use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{loss_and_grad, Problem};
use crate::optimize::fit_normal_equations;

/// Summed held-out loss when each point is left out in turn.
pub fn loocv_exact(problem: &Problem, s: f64) -> Result<f64> {
    let n = problem.n();
    if n < 2 {
        return Err(Error::Precondition(format!("LOOCV needs at least 2 points, got {n}")));
    }
    let folds: Vec<Vec<usize>> = (0..n).map(|j| vec![j]).collect();
    held_out_error(problem, s, &folds)
}

/// Summed held-out loss over `k` seeded folds; point at shuffled position
/// `i` goes to fold `i mod k`.
pub fn kfold_error(problem: &Problem, s: f64, k: usize, seed: u64) -> Result<f64> {
    let n = problem.n();
    if k < 2 || k > n {
        return Err(Error::Precondition(format!("k-fold needs 2 <= k <= n, got k={k}, n={n}")));
    }
    held_out_error(problem, s, &fold_assignment(n, k, seed))
}

/// Seeded partition of `0..n` into `k` folds, each sorted ascending.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Vec::new(); k];
    for (pos, &i) in order.iter().enumerate() {
        folds[pos % k].push(i);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    folds
}

fn held_out_error(problem: &Problem, s: f64, folds: &[Vec<usize>]) -> Result<f64> {
    let base = problem.with_regularity(s)?;
    let data = base.dataset();
    let mut total = 0.0;
    for fold in folds {
        let keep: Vec<usize> = (0..data.len()).filter(|i| !fold.contains(i)).collect();
        let sub = base.with_dataset(data.subset(&keep))?;
        let theta = fit_normal_equations(&sub).map_err(|e| match e {
            Error::Singular(_) => Error::SingularSubsystem { index: fold[0] },
            other => other,
        })?;
        for &j in fold {
            let (x, y) = data.point(j);
            total += loss_and_grad(x, y, &theta, base.feature_map())?.0;
        }
    }
    Ok(total)
}

/// Seeded train/test split; the test side gets `round(fraction·n)` points,
/// at least one, leaving at least one for training.
pub fn train_test_split(n: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 2 {
        return Err(Error::Precondition("a split needs at least 2 points".into()));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidInput(format!("test fraction must lie in (0, 1), got {test_fraction}")));
    }
    let n_test = ((test_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut test = order[..n_test].to_vec();
    let mut train = order[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}

/// Summed loss on `test` after fitting on `train` at regularity `s`.
pub fn holdout_error(problem: &Problem, s: f64, train: &[usize], test: &[usize]) -> Result<f64> {
    let base = problem.with_regularity(s)?;
    let theta = fit_normal_equations(&base.with_dataset(base.dataset().subset(train))?)?;
    let mut total = 0.0;
    for &j in test {
        let (x, y) = base.dataset().point(j);
        total += loss_and_grad(x, y, &theta, base.feature_map())?.0;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{synthetic, Dataset, FeatureMap, Regularizer};

    fn ident(xs: &[f64], ys: &[f64]) -> Problem {
        Problem::new(Dataset::from_scalars(xs, ys).unwrap(), FeatureMap::Identity { dim: 1 }, Regularizer::L2, 0.0)
            .unwrap()
    }

    #[test]
    fn two_point_loocv() {
        assert!((loocv_exact(&ident(&[1.0, 1.0], &[1.0, 0.0]), 0.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(loocv_exact(&ident(&[1.0, 1.0], &[0.5, 0.5]), 0.0).unwrap() < 1e-30);
    }

    #[test]
    fn one_point_is_precondition() {
        assert!(matches!(loocv_exact(&ident(&[1.0], &[1.0]), 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn singular_names_index() {
        let p = ident(&[0.0, 1.0], &[1.0, 1.0]);
        assert!(matches!(loocv_exact(&p, 0.0), Err(Error::SingularSubsystem { index: 1 })));
    }

    #[test]
    fn kfold_with_k_n_is_loocv() {
        let p = synthetic::reference_problem(42, 0.05).unwrap();
        let a = loocv_exact(&p, 0.05).unwrap();
        for seed in 0..3 {
            let b = kfold_error(&p, 0.05, p.n(), seed).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
        assert!(kfold_error(&p, 0.05, 1, 0).is_err());
        assert!(kfold_error(&p, 0.05, 7, 0).is_err());
    }

    #[test]
    fn split_shapes() {
        let (tr, te) = train_test_split(6, 0.2, 42).unwrap();
        assert_eq!(te.len(), 1);
        assert_eq!(tr.len(), 5);
        let mut all: Vec<usize> = tr.iter().chain(&te).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..6).collect::<Vec<_>>());
    }
}
