//! Dual-number arithmetic for forward-mode tangents, Hessian-vector
//! products, dense Hessians for small models and a conjugate-gradient solver.

mod cg;
mod dual;
mod hvp;

pub use cg::{cg_solve, CgOutcome};
pub use dual::{split, Dual, DualParams, Scalar};
pub use hvp::{
    assemble_hessian, assemble_hessian_capped, dense_solve, loss_hvp, loss_hvp_dual, objective_hvp, FnOracle,
    HvpOracle, ObjectiveHessian, DENSE_CAP,
};
