//! Trainers: closed-form normal equations, SGD and Adam with end-of-epoch
//! regularizer steps, their dual-number (SGDF) variants, and LiSSA.

mod config;
mod lissa;
mod normal;
mod sgd;

pub use config::{AdamParams, EpochOrder, OptimizerKind, RegularizerCadence, StepSchedule, TrainConfig};
pub use lissa::{
    lissa_iterates, lissa_sgdf_deviation, run_lissa, sgdf_frozen_tangents, HessianSampling, LissaConfig, LissaOutcome,
    LissaVariant,
};
pub use normal::fit_normal_equations;
pub use sgd::{run_sgd, run_sgdf, run_sgdf_with, DualOutcome, TrainOutcome, DIVERGENCE_LIMIT};
