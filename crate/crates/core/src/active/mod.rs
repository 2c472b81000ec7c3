//! Active-learning query heuristics: regularity-tangent loss derivatives
//! (SLD), single, summed and total squared influences (SI, SSI, STI), RMS
//! normalization, ranking and a Monte-Carlo label-expectation oracle.
//!
//! Unlabeled variants use `σ̄_x = 2φ(x)`, the loss gradient with the residual
//! factor dropped.

mod expectation;
mod heuristics;

pub use expectation::{closed_form_expected_sq_influence, LabelFunctional, McEstimate, MIN_MC_SAMPLES};
pub use heuristics::{
    rank_queries, rank_scores, rms_normalize, score, Candidate, Heuristic, HeuristicKind, QueryScores, Scorer,
};
