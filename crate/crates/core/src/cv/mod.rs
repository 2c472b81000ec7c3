//! Regularity selection: retraining-based LOOCV and k-fold error, scalar
//! search over `log s`, and joint θ/s optimization with SGDF tangents.

mod joint;
mod retrain;
mod select;

pub use joint::{joint_hyperopt, joint_training_problem, JointConfig, JointOutcome, JointTraceEntry};
pub use retrain::{fold_assignment, holdout_error, kfold_error, loocv_exact, train_test_split};
pub use select::{log_grid, minimize_log, objective_table, optimize_s, SObjective, SOptConfig, SOptMethod};
