//! Experiment orchestration: configurations, seeded sweeps, diagnostics and
//! CSV/JSON-lines output with stable exit codes.

pub mod checks;
pub mod config;
pub mod diagnostics;
pub mod fit;
pub mod run;

use serde_json::json;
use thiserror::Error;

use crate::nonlocal::NonlocalError;
use crate::oracle::OracleError;
use crate::params::ParamsError;
use crate::solver::SolverError;

pub use checks::{Label, SuiteOutcome};
pub use config::{ExperimentConfig, MeshConfig, ParamSet, Scenario, Tolerances, SCHEMA_VERSION};
pub use diagnostics::{b_factor, lambda_o, nodal_gradient, second_difference_scaling, LevelDiagnostics, LevelInputs, SecondDifferenceFit};
pub use fit::{fit_slope, FitError};
pub use run::{run, RunSummary};

#[derive(Debug, Error)]
pub enum LabError {
    #[error("{kind}: {detail}")]
    Validation { kind: String, detail: String },
    #[error("non-convergence: {0}")]
    NonConvergence(String),
    #[error("assertion failed: {0}")]
    AssertionFailed(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl LabError {
    pub fn validation(kind: &str, detail: String) -> Self {
        LabError::Validation { kind: kind.into(), detail }
    }

    /// Validation errors keep the variant name of the parameter error as their kind.
    pub fn from_params(e: ParamsError) -> Self {
        let debug = format!("{e:?}");
        let kind = debug.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Params").to_string();
        LabError::Validation { kind, detail: e.to_string() }
    }

    /// `2` for invalid input, `3` for non-convergence, `1` for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Validation { .. } => 2,
            LabError::NonConvergence(_) => 3,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &str {
        match self {
            LabError::Validation { kind, .. } => kind,
            LabError::NonConvergence(_) => "NonConvergence",
            LabError::AssertionFailed(_) => "AssertionFailed",
            LabError::Numerical(_) => "Numerical",
            LabError::Io(_) => "Io",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let detail = match self {
            LabError::Validation { detail, .. } => detail.clone(),
            LabError::NonConvergence(d) | LabError::AssertionFailed(d) | LabError::Numerical(d) | LabError::Io(d) => d.clone(),
        };
        json!({ "error": self.kind(), "exit_code": self.exit_code(), "detail": detail })
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

impl From<ParamsError> for LabError {
    fn from(e: ParamsError) -> Self {
        LabError::from_params(e)
    }
}

impl From<NonlocalError> for LabError {
    fn from(e: NonlocalError) -> Self {
        match e {
            NonlocalError::InvalidInput(d) | NonlocalError::InvalidMesh(d) | NonlocalError::PreconditionViolated(d) => {
                LabError::validation("InvalidInput", d)
            }
            NonlocalError::Io(e) => LabError::Io(e.to_string()),
            other => LabError::Numerical(other.to_string()),
        }
    }
}

impl From<OracleError> for LabError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Params(p) => LabError::from_params(p),
            OracleError::PreconditionViolated(d) => LabError::validation("PreconditionViolated", d),
            other => LabError::Numerical(other.to_string()),
        }
    }
}

impl From<SolverError> for LabError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::InvalidInput(d) => LabError::validation("InvalidInput", d),
            SolverError::CoefficientViolation(d) => LabError::validation("CoefficientViolation", d),
            e @ (SolverError::NonConvergence { .. } | SolverError::IllConditioned { .. }) => LabError::NonConvergence(e.to_string()),
            SolverError::Nonlocal(e) => e.into(),
            other => LabError::Numerical(other.to_string()),
        }
    }
}
