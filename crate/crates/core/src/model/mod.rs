//! Datasets, feature maps, the squared loss, the regularizer family and the
//! regularized objective.

mod data;
mod problem;
mod regularizer;
pub mod synthetic;

pub use data::{featurize, Dataset, FeatureMap, RawInput};
pub use problem::{
    loss_and_grad, loss_grad_generic, noise_variance, objective, NoiseModel, Problem, NOISE_VARIANCE_FLOOR,
};
pub use regularizer::{reg_eval, RegEval, Regularizer};
