//! A small, deterministic linear and mixed-binary programming toolkit.
//!
//! Models are built with [`LinearProgram`], solved with [`solve_lp`], and
//! wrapped in [`MipProblem`] for [`solve_mip`] when some variables must be
//! binary. All solves maximize.

mod mip;
mod model;
mod simplex;

pub use mip::{solve_mip, solve_mip_report, solve_mip_with, MipOptions, MipReport};
pub use model::{Constraint, LinearProgram, MipProblem, Relation, Solution, Status};
pub use simplex::solve_lp;

/// Tolerance used when certifying that a solution satisfies its rows.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Distance from 0 or 1 within which a binary value counts as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum LpError {
    #[error("malformed model: {0}")]
    Malformed(String),
    #[error("numerical instability: {0}")]
    NumericalInstability(String),
    #[error("simplex did not terminate within {iterations} iterations")]
    IterationLimit { iterations: usize },
    #[error("branch-and-bound exceeded the node limit of {limit}")]
    NodeLimitExceeded { limit: usize },
}

/// True when `v` lies within [`INTEGRALITY_TOL`] of 0 or 1.
pub fn is_binary_value(v: f64) -> bool {
    v.abs() <= INTEGRALITY_TOL || (v - 1.0).abs() <= INTEGRALITY_TOL
}
