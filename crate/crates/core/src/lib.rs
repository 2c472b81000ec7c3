//! Regularity tangents for regularized least squares: how trained parameters
//! move with the regularization strength `s`, and what that buys for
//! influence analysis, active learning and regularity selection.
//!
//! * [`model`]: data, feature maps, loss, regularizers, the objective.
//! * [`diffkit`]: dual numbers, Hessian-vector products, conjugate gradients.
//! * [`optimize`]: normal equations, SGD/Adam and their dual variants, LiSSA.
//! * [`influence`]: `θ̇`, influence functions, self-influence, Gpert.
//! * [`active`]: query heuristics and their label expectations.
//! * [`cv`]: LOOCV, k-fold, `s` search, joint θ/s optimization.
//! * [`cli`]: the `regtan` command line.

pub mod active;
pub mod cli;
pub mod cv;
pub mod diffkit;
pub mod error;
pub mod influence;
pub mod model;
pub mod optimize;

pub use error::{Error, Result};
