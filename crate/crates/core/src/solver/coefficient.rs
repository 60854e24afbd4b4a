//! Symmetric, bounded, Hölder-continuous coefficients `a(x, y)` and their
//! freezing on `B_R(x_o) × B_R(x_o)`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::quad::integrate_pieces;

use super::SolverError;

type CoefficientFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq)]
struct FrozenBlock {
    center: f64,
    radius: f64,
    value: f64,
}

#[derive(Clone)]
pub struct CoefficientField {
    label: String,
    func: CoefficientFn,
    /// Lower ellipticity bound `C_o`.
    pub lower: f64,
    /// Upper bound `C_1`, also the constant of the oscillation modulus.
    pub upper: f64,
    /// Hölder exponent of the oscillation modulus.
    pub chi: f64,
    /// Largest radius on which the oscillation modulus is claimed.
    pub validity_radius: f64,
    frozen: Option<FrozenBlock>,
}

/// Outcome of [`CoefficientField::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientCheck {
    pub min_value: f64,
    pub max_value: f64,
    pub max_asymmetry: f64,
    /// `max sup|a − a(x_o,x_o)| / (C_1 R^χ)` over the sampled balls.
    pub worst_oscillation_ratio: f64,
}

const AVERAGE_TOL: f64 = 1e-10;

impl CoefficientField {
    pub fn new(
        label: impl Into<String>,
        lower: f64,
        upper: f64,
        chi: f64,
        validity_radius: f64,
        func: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self, SolverError> {
        if !(lower > 0.0 && upper >= lower && upper.is_finite()) {
            return Err(SolverError::CoefficientViolation(format!("need 0 < C_o ≤ C_1 < ∞, got {lower}, {upper}")));
        }
        if !(chi > 0.0 && chi < 1.0 && validity_radius > 0.0) {
            return Err(SolverError::InvalidInput(format!("need χ in (0,1) and R_o > 0, got {chi}, {validity_radius}")));
        }
        Ok(Self { label: label.into(), func: Arc::new(func), lower, upper, chi, validity_radius, frozen: None })
    }

    pub fn constant(c: f64) -> Result<Self, SolverError> {
        Self::new(format!("constant({c})"), c, c, 0.5, f64::INFINITY, move |_, _| c)
    }

    /// `1 + amplitude·|x+y|^χ`; the upper bound is claimed on `|x+y| ≤ window`.
    pub fn sum_power(amplitude: f64, chi: f64, window: f64) -> Result<Self, SolverError> {
        let upper = (1.0 + amplitude * window.powf(chi)).max(amplitude * 2f64.powf(chi)).max(1.0);
        Self::new(format!("sum_power({amplitude},{chi})"), 1.0, upper, chi, 1.0, move |x: f64, y: f64| {
            1.0 + amplitude * (x + y).abs().powf(chi)
        })
    }

    /// `1 + amplitude·|x−y|^χ`; the upper bound is claimed on `|x−y| ≤ window`.
    pub fn difference_power(amplitude: f64, chi: f64, window: f64) -> Result<Self, SolverError> {
        let upper = (1.0 + amplitude * window.powf(chi)).max(amplitude * 2f64.powf(chi)).max(1.0);
        Self::new(format!("diff_power({amplitude},{chi})"), 1.0, upper, chi, 1.0, move |x: f64, y: f64| {
            1.0 + amplitude * (x - y).abs().powf(chi)
        })
    }

    /// Rebuild a field from `constant(c)`, `sum_power(A,χ)` or `diff_power(A,χ)`,
    /// with bounds claimed on the window `16`.
    pub fn parse(label: &str) -> Result<Self, SolverError> {
        let bad = || SolverError::InvalidInput(format!("unknown coefficient label {label:?}"));
        let open = label.find('(').ok_or_else(bad)?;
        let close = label.rfind(')').ok_or_else(bad)?;
        let args: Vec<f64> = label[open + 1..close]
            .split(',')
            .map(|a| a.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        match (&label[..open], args.as_slice()) {
            ("constant", [c]) => Self::constant(*c),
            ("sum_power", [a, chi]) => Self::sum_power(*a, *chi, 16.0),
            ("diff_power", [a, chi]) => Self::difference_power(*a, *chi, 16.0),
            _ => Err(bad()),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        if let Some(block) = &self.frozen {
            if (x - block.center).abs() < block.radius && (y - block.center).abs() < block.radius {
                return block.value;
            }
        }
        (self.func)(x, y)
    }

    /// Value `(a)_{x_o,R}` on the frozen block, if any.
    pub fn frozen_value(&self) -> Option<f64> {
        self.frozen.map(|b| b.value)
    }

    pub fn is_constant(&self) -> bool {
        self.lower == self.upper
    }

    /// `⨍_{B_R}⨍_{B_R} a(x,y) dx dy` by nested adaptive quadrature with a break at `x = y`.
    pub fn average(&self, center: f64, radius: f64) -> Result<f64, SolverError> {
        if !(radius > 0.0) {
            return Err(SolverError::InvalidInput(format!("radius must be positive, got {radius}")));
        }
        if self.is_constant() && self.frozen.is_none() {
            return Ok(self.lower);
        }
        let (lo, hi) = (center - radius, center + radius);
        let inner = |x: f64| -> f64 {
            integrate_pieces(|y| self.eval(x, y), &[lo, x, hi], AVERAGE_TOL).map(|r| r.value).unwrap_or(f64::NAN)
        };
        let outer = integrate_pieces(inner, &[lo, center, hi], AVERAGE_TOL)?;
        if !outer.value.is_finite() {
            return Err(SolverError::InvalidInput("coefficient average is not finite".into()));
        }
        Ok(outer.value / (4.0 * radius * radius))
    }

    /// `a_{x_o,R}`: the average on `B_R(x_o)²` and `a` elsewhere.
    pub fn freeze(&self, center: f64, radius: f64) -> Result<Self, SolverError> {
        if radius > self.validity_radius {
            return Err(SolverError::InvalidInput(format!("radius {radius} exceeds R_o = {}", self.validity_radius)));
        }
        let value = self.average(center, radius)?;
        let mut frozen = self.clone();
        frozen.label = format!("{} frozen on B({center},{radius})", self.label);
        frozen.frozen = Some(FrozenBlock { center, radius, value });
        Ok(frozen)
    }

    /// Bounds, symmetry and (for unfrozen fields) the oscillation modulus on
    /// all pairs of `samples`, for dyadic radii `R_o 2^{−k}`.
    pub fn validate(&self, samples: &[f64]) -> Result<CoefficientCheck, SolverError> {
        let mut check =
            CoefficientCheck { min_value: f64::INFINITY, max_value: f64::NEG_INFINITY, max_asymmetry: 0.0, worst_oscillation_ratio: 0.0 };
        for &x in samples {
            for &y in samples {
                let a = self.eval(x, y);
                let b = self.eval(y, x);
                check.min_value = check.min_value.min(a);
                check.max_value = check.max_value.max(a);
                check.max_asymmetry = check.max_asymmetry.max((a - b).abs() / a.abs().max(1.0));
            }
        }
        let slack = 1e-12 * self.upper;
        if !(check.min_value >= self.lower - slack && check.max_value <= self.upper + slack) {
            return Err(SolverError::CoefficientViolation(format!(
                "{}: sampled range [{}, {}] leaves [{}, {}]",
                self.label, check.min_value, check.max_value, self.lower, self.upper
            )));
        }
        if check.max_asymmetry > 1e-12 {
            return Err(SolverError::CoefficientViolation(format!("{}: asymmetry {}", self.label, check.max_asymmetry)));
        }
        if self.frozen.is_none() && !self.is_constant() {
            for &xo in samples {
                let centre = self.eval(xo, xo);
                for k in 0..7 {
                    let r = self.validity_radius * 0.5f64.powi(k);
                    let inside: Vec<f64> = samples.iter().copied().filter(|z| (z - xo).abs() < r).collect();
                    let mut osc: f64 = 0.0;
                    for &x in &inside {
                        for &y in &inside {
                            osc = osc.max((self.eval(x, y) - centre).abs());
                        }
                    }
                    let ratio = osc / (self.upper * r.powf(self.chi));
                    check.worst_oscillation_ratio = check.worst_oscillation_ratio.max(ratio);
                }
            }
            if check.worst_oscillation_ratio > 1.0 + 1e-12 {
                return Err(SolverError::CoefficientViolation(format!(
                    "{}: oscillation exceeds C_1 R^χ by factor {}",
                    self.label, check.worst_oscillation_ratio
                )));
            }
        }
        Ok(check)
    }
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientField")
            .field("label", &self.label)
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("chi", &self.chi)
            .field("validity_radius", &self.validity_radius)
            .field("frozen", &self.frozen)
            .finish()
    }
}
