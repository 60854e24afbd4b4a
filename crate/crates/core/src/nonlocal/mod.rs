//! One-dimensional grid functions and the nonlocal quantities built on them:
//! tails, Gagliardo seminorms, finite differences, covers and elementary inequalities.

pub mod cover;
pub mod difference;
pub mod grid;
pub mod inequalities;
pub mod integrate;
pub mod seminorm;
pub mod tail;

use thiserror::Error;

pub use cover::{cover, Cover, OverlapProfile};
pub use difference::finite_difference;
pub use grid::{AnalyticClosure, Ball, Exterior, GridFunction, Mesh};
pub use inequalities::{
    elementary_superlevel_inequality, interpolation_inequality, minkowski_sum_inequality, weighted_norm, InequalityCheck,
};
pub use integrate::{integrate_ball, integrate_region, lp_power, mean, mean_oscillation_power, weighted_integral, RegionIntegrand};
pub use seminorm::{gagliardo_seminorm, seminorm_power_on_samples, HatMoments, SeminormReport};
pub use tail::{
    coincidence_tail_bound, dyadic_tail_chain, mean_subtracted_tail, tail, tail_decomposition, CoincidenceReport, DyadicChain,
    TailDecomposition, TailReport,
};

use crate::quad::QuadError;

#[derive(Debug, Error)]
pub enum NonlocalError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("region [{lo}, {hi}] leaves the mesh")]
    OutsideMesh { lo: f64, hi: f64 },
    #[error("tail diverges: growth {growth} is too large for p={p}, s={s}")]
    DivergentTail { growth: f64, p: f64, s: f64 },
    #[error("seminorm refinements {values:?} do not settle")]
    DivergentSeminorm { values: Vec<f64> },
    #[error("functions differ by {difference} at x={x} outside the coincidence region")]
    CoincidenceViolated { x: f64, difference: f64 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
