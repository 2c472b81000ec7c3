//! Reference computations written independently of the library's solvers.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use regtan::model::synthetic::{gapped_dataset, GappedSpec};
use regtan::model::RawInput;

pub const SEED: u64 = 42;
pub const DEGREE: usize = 5;
pub const S: f64 = 0.05;

/// The seeded six-point data as plain vectors.
pub fn reference_xy(seed: u64) -> (Vec<f64>, Vec<f64>) {
    let d = gapped_dataset(seed, GappedSpec::default());
    let xs = d
        .inputs()
        .iter()
        .map(|x| match x {
            RawInput::Scalar(v) => *v,
            RawInput::Vector(_) => unreachable!("scalar data"),
        })
        .collect();
    (xs, d.labels().to_vec())
}

pub fn powers(x: f64, degree: usize) -> Vec<f64> {
    let mut out = vec![1.0; degree + 1];
    for k in 1..=degree {
        out[k] = out[k - 1] * x;
    }
    out
}

pub fn design(xs: &[f64], degree: usize) -> DMatrix<f64> {
    DMatrix::from_fn(xs.len(), degree + 1, |i, k| xs[i].powi(k as i32))
}

/// argmin Σ w_i (θᵀφ_i − y_i)² + s‖θ‖² by LU on the weighted normal equations.
pub fn weighted_ridge(xs: &[f64], ys: &[f64], w: &[f64], degree: usize, s: f64) -> DVector<f64> {
    let x = design(xs, degree);
    let wm = DMatrix::from_diagonal(&DVector::from_column_slice(w));
    let lhs = x.transpose() * &wm * &x + DMatrix::identity(degree + 1, degree + 1) * s;
    let rhs = x.transpose() * &wm * DVector::from_column_slice(ys);
    lhs.lu().solve(&rhs).expect("oracle system is nonsingular")
}

pub fn ridge(xs: &[f64], ys: &[f64], degree: usize, s: f64) -> DVector<f64> {
    weighted_ridge(xs, ys, &vec![1.0; xs.len()], degree, s)
}

/// Ridge with one extra data point `z` of weight `eps`.
pub fn upweighted(xs: &[f64], ys: &[f64], z: (f64, f64), eps: f64, degree: usize, s: f64) -> DVector<f64> {
    let mut xs2 = xs.to_vec();
    let mut ys2 = ys.to_vec();
    let mut w = vec![1.0; xs.len()];
    xs2.push(z.0);
    ys2.push(z.1);
    w.push(eps);
    weighted_ridge(&xs2, &ys2, &w, degree, s)
}

/// Central difference of `θ*(s)` in `s`.
pub fn fd_tangent(xs: &[f64], ys: &[f64], degree: usize, s: f64, delta: f64) -> DVector<f64> {
    (ridge(xs, ys, degree, s + delta) - ridge(xs, ys, degree, s - delta)) / (2.0 * delta)
}

/// Leave-one-out error by brute-force refits.
pub fn loocv(xs: &[f64], ys: &[f64], degree: usize, s: f64) -> f64 {
    (0..xs.len())
        .map(|j| {
            let w: Vec<f64> = (0..xs.len()).map(|i| if i == j { 0.0 } else { 1.0 }).collect();
            let th = weighted_ridge(xs, ys, &w, degree, s);
            let pred: f64 = powers(xs[j], degree).iter().zip(th.iter()).map(|(a, b)| a * b).sum();
            (pred - ys[j]).powi(2)
        })
        .sum()
}

pub fn rel(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

pub fn rel_scalar(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            r[idx[k]] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp()).collect()
}
