//! Versioned JSON experiment configurations.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::LabError;
use crate::nonlocal::AnalyticClosure;
use crate::params::{sharp_exponents, ProblemParams};
use crate::solver::CoefficientField;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Derive,
    Oracle,
    Solve,
    Compare,
    Blowup,
    Tails,
    Check,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Derive => "derive",
            Scenario::Oracle => "oracle",
            Scenario::Solve => "solve",
            Scenario::Compare => "compare",
            Scenario::Blowup => "blowup",
            Scenario::Tails => "tails",
            Scenario::Check => "check",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        serde_json::from_value(serde_json::Value::String(name.to_string())).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSet {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default)]
    pub a_tilde: Option<f64>,
    #[serde(default)]
    pub chi: Option<f64>,
}

impl Default for ParamSet {
    fn default() -> Self {
        Self { n: default_n(), p: default_p(), s: default_s(), r: None, a_tilde: None, chi: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self { nodes: default_nodes(), half_width: default_half_width() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_quadrature_tol")]
    pub quadrature: f64,
    #[serde(default = "default_solver_tol")]
    pub solver: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { quadrature: default_quadrature_tol(), solver: default_solver_tol() }
    }
}

/// A complete description of one run; outputs are a pure function of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub scenario: Scenario,
    #[serde(default)]
    pub params: ParamSet,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Seed of the ChaCha8 generator used by property sweeps.
    #[serde(default)]
    pub seed: u64,
    /// Sample count of each randomised inequality sweep.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Sample count of the exponent sweep.
    #[serde(default = "default_exponent_samples")]
    pub exponent_samples: usize,
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    #[serde(default = "default_coefficient")]
    pub coefficient: String,
    /// Right-hand side as an analytic label, e.g. `constant(1)`.
    #[serde(default)]
    pub rhs: Option<String>,
    #[serde(default = "default_exterior")]
    pub exterior: String,
    /// Relative band that turns the comparison slope check into an assertion.
    #[serde(default)]
    pub slope_band: Option<f64>,
    /// Free parameter `M` of the composite level.
    #[serde(default = "default_level_m")]
    pub level_m: f64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_n() -> usize {
    1
}
fn default_p() -> f64 {
    2.0
}
fn default_s() -> f64 {
    0.75
}
fn default_nodes() -> usize {
    257
}
fn default_half_width() -> f64 {
    1.0
}
fn default_quadrature_tol() -> f64 {
    1e-8
}
fn default_solver_tol() -> f64 {
    1e-10
}
fn default_samples() -> usize {
    100_000
}
fn default_exponent_samples() -> usize {
    1000
}
fn default_radii() -> Vec<f64> {
    vec![0.05, 0.1, 0.2, 0.4]
}
fn default_coefficient() -> String {
    "constant(1)".into()
}
fn default_exterior() -> String {
    "constant(0)".into()
}
fn default_level_m() -> f64 {
    1.0
}

impl ExperimentConfig {
    pub fn new(scenario: Scenario) -> Self {
        serde_json::from_value(serde_json::json!({ "schema_version": SCHEMA_VERSION, "scenario": scenario }))
            .expect("defaults form a valid configuration")
    }

    pub fn from_json(text: &str) -> Result<Self, LabError> {
        let config: Self = serde_json::from_str(text).map_err(|e| LabError::validation("Malformed", e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::validation("Unreadable", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configurations serialise")
    }

    pub fn problem_params(&self) -> Result<ProblemParams, LabError> {
        ProblemParams::new(self.params.n, self.params.p, self.params.s).map_err(LabError::from_params)
    }

    pub fn coefficient_field(&self) -> Result<CoefficientField, LabError> {
        CoefficientField::parse(&self.coefficient).map_err(|e| LabError::validation("Coefficient", e.to_string()))
    }

    pub fn exterior_closure(&self) -> Result<AnalyticClosure, LabError> {
        closure(&self.exterior, "exterior")
    }

    pub fn rhs_closure(&self) -> Result<Option<AnalyticClosure>, LabError> {
        self.rhs.as_deref().map(|label| closure(label, "rhs")).transpose()
    }

    /// Structural and range checks; scenario-specific parameters are checked here too.
    pub fn validate(&self) -> Result<(), LabError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(LabError::validation(
                "SchemaVersion",
                format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        let params = self.problem_params()?;
        if let Some(r) = self.params.r {
            sharp_exponents(&params, r).map_err(LabError::from_params)?;
        } else if matches!(self.scenario, Scenario::Oracle | Scenario::Blowup) {
            return Err(LabError::validation("MissingParameter", format!("scenario {} needs params.r", self.scenario.name())));
        }
        if let Some(chi) = self.params.chi {
            if !(chi > 0.0 && chi < 1.0) {
                return Err(LabError::validation("InvalidChi", format!("chi = {chi} must lie in (0,1)")));
            }
        }
        if let Some(a) = self.params.a_tilde {
            if !(a > 0.0 && a.is_finite()) {
                return Err(LabError::validation("OutOfRange", format!("a_tilde = {a} must be positive")));
            }
        }
        if self.mesh.nodes < 3 || !(self.mesh.half_width > 0.0 && self.mesh.half_width.is_finite()) {
            return Err(LabError::validation("Mesh", format!("need at least 3 nodes and a positive half-width, got {:?}", self.mesh)));
        }
        let tol = self.tolerances;
        if !(tol.quadrature > 0.0 && tol.quadrature < 1.0 && tol.solver > 0.0 && tol.solver < 1.0) {
            return Err(LabError::validation("Tolerance", format!("tolerances must lie in (0,1), got {tol:?}")));
        }
        if self.radii.is_empty() || self.radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(LabError::validation("Radii", format!("radii must be positive, got {:?}", self.radii)));
        }
        if let Some(band) = self.slope_band {
            if !(band > 0.0 && band < 1.0) {
                return Err(LabError::validation("OutOfRange", format!("slope_band = {band} must lie in (0,1)")));
            }
        }
        if !(self.level_m >= 1.0 && self.level_m.is_finite()) {
            return Err(LabError::validation("OutOfRange", format!("level_m = {} must be at least 1", self.level_m)));
        }
        if matches!(self.scenario, Scenario::Solve | Scenario::Compare) {
            if params.n != 1 {
                return Err(LabError::validation("Dimension", "the solver works in one dimension".into()));
            }
            self.coefficient_field()?;
            self.exterior_closure()?;
            self.rhs_closure()?;
        }
        Ok(())
    }
}

fn closure(label: &str, what: &str) -> Result<AnalyticClosure, LabError> {
    AnalyticClosure::parse(label)
        .ok_or_else(|| LabError::validation("Closure", format!("unknown {what} label {label:?}; use constant(c), affine(m,c) or power(a,b)")))
}
