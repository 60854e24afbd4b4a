//! Discrete variational solver for the one-dimensional nonlocal Dirichlet
//! problem `(−aΔ_p)^s u = f` in `Ω`, `u = g` outside `Ω`.

pub mod coefficient;
pub mod experiment;
pub mod minimize;
pub mod problem;

use thiserror::Error;

pub use coefficient::{CoefficientCheck, CoefficientField};
pub use experiment::{comparison_experiment, induced_inhomogeneity, ComparisonRow, ComparisonSetup, ComparisonTable};
pub use minimize::{solve, solve_with, IterationRecord, Solution, SolveOptions};
pub use problem::{assemble, torsion_rhs, DiscreteProblem};

use crate::nonlocal::NonlocalError;
use crate::quad::QuadError;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("coefficient violates its structural bounds: {0}")]
    CoefficientViolation(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e}, target {target:e})")]
    NonConvergence { iterations: usize, residual: f64, target: f64 },
    #[error("line search stalled at iteration {iteration} (residual {residual:e}, target {target:e})")]
    IllConditioned { iteration: usize, residual: f64, target: f64 },
    #[error(transparent)]
    Nonlocal(#[from] NonlocalError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}
