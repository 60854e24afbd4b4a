//! Composite level `λ_o`, the covering factor `𝖡` and second-difference scaling.

use serde::{Deserialize, Serialize};

use super::fit::fit_slope;
use crate::nonlocal::{finite_difference, lp_power, mean_subtracted_tail, Ball, Exterior, GridFunction, NonlocalError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelDiagnostics {
    pub lambda_o: f64,
    /// `⨍_{B_R}|∇u|^p`.
    pub gradient_term: f64,
    /// `M^p|B_R|^{(p/n)(sp′−1)}[⨍_{B_R}|f|^{ãp}]^{1/(ã(p−1))}`.
    pub inhomogeneity_term: f64,
    /// `R^{−p}Tail(u−(u)_R; B_R)^p`.
    pub tail_term: f64,
    pub b_factor: f64,
}

/// Exponents and radii entering [`lambda_o`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelInputs {
    pub p: f64,
    pub s: f64,
    /// Free parameter `M ≥ 1`.
    pub m: f64,
    pub a_tilde: f64,
    /// Radii `R/2 ≤ r₁ < r₂ ≤ R` of the covering factor.
    pub r1: f64,
    pub r2: f64,
}

impl LevelInputs {
    /// `r₁ = R/2`, `r₂ = R`.
    pub fn new(p: f64, s: f64, m: f64, a_tilde: f64, radius: f64) -> Self {
        Self { p, s, m, a_tilde, r1: 0.5 * radius, r2: radius }
    }
}

/// `𝖡 = (2⁷R/(r₂−r₁))^{n/(p−1)+1}`.
pub fn b_factor(n: usize, p: f64, radius: f64, r1: f64, r2: f64) -> Result<f64, NonlocalError> {
    if !(0.5 * radius <= r1 && r1 < r2 && r2 <= radius && p > 1.0) {
        return Err(NonlocalError::PreconditionViolated(format!("need R/2 ≤ r₁ < r₂ ≤ R and p > 1, got R={radius}, r₁={r1}, r₂={r2}")));
    }
    Ok((128.0 * radius / (r2 - r1)).powf(n as f64 / (p - 1.0) + 1.0))
}

/// Nodal derivative by central differences, one-sided at the mesh ends.
pub fn nodal_gradient(u: &GridFunction) -> Result<GridFunction, NonlocalError> {
    let v = u.values();
    let h = u.mesh().spacing();
    let last = v.len() - 1;
    let grad = (0..=last)
        .map(|i| match i {
            0 => (v[1] - v[0]) / h,
            i if i == last => (v[last] - v[last - 1]) / h,
            i => (v[i + 1] - v[i - 1]) / (2.0 * h),
        })
        .collect();
    GridFunction::new(u.mesh().clone(), grad, Exterior::zero())
}

/// `λ_o^p = ⨍|∇u|^p + M^p|B_R|^{(p/n)(sp′−1)}[⨍|f|^{ãp}]^{1/(ã(p−1))} + R^{−p}Tail(u−(u)_R;B_R)^p`
/// in one dimension; the ball must lie on the mesh of `u`.
pub fn lambda_o(u: &GridFunction, f: &GridFunction, ball: &Ball, inputs: &LevelInputs) -> Result<LevelDiagnostics, NonlocalError> {
    let LevelInputs { p, s, m, a_tilde, r1, r2 } = *inputs;
    let mesh = u.mesh();
    if ball.lo() < mesh.x_lo() - 1e-12 || ball.hi() > mesh.x_hi() + 1e-12 {
        return Err(NonlocalError::OutsideMesh { lo: ball.lo(), hi: ball.hi() });
    }
    if !(a_tilde > 0.0 && m >= 1.0) {
        return Err(NonlocalError::PreconditionViolated(format!("need ã > 0 and M ≥ 1, got ã={a_tilde}, M={m}")));
    }
    let measure = ball.measure();
    let gradient_term = lp_power(&nodal_gradient(u)?, ball, p)? / measure;
    let sp_conj = s * p / (p - 1.0);
    let f_avg = lp_power(f, ball, a_tilde * p)? / measure;
    let inhomogeneity_term = m.powf(p) * measure.powf(p * (sp_conj - 1.0)) * f_avg.powf(1.0 / (a_tilde * (p - 1.0)));
    let tail_term = ball.radius.powf(-p) * mean_subtracted_tail(u, ball, p, s)?.powf(p);
    let lambda = (gradient_term + inhomogeneity_term + tail_term).powf(1.0 / p);
    Ok(LevelDiagnostics {
        lambda_o: lambda,
        gradient_term,
        inhomogeneity_term,
        tail_term,
        b_factor: b_factor(1, p, ball.radius, r1, r2)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondDifferenceFit {
    pub steps: Vec<f64>,
    /// `∫_{B_R}|τ²_h u|^p` for each step.
    pub integrals: Vec<f64>,
    /// Log–log slope in `|h|`; absent when every integral vanishes.
    pub slope: Option<f64>,
    pub r2: Option<f64>,
}

/// Integrals of `|τ²_h u|^p` over the ball and their fitted `|h|`-slope.
pub fn second_difference_scaling(u: &GridFunction, ball: &Ball, steps: &[f64], p: f64) -> Result<SecondDifferenceFit, NonlocalError> {
    let limit = ball.radius / 7.0;
    if steps.is_empty() || steps.iter().any(|&h| !(h > 0.0 && h <= limit * (1.0 + 1e-12))) {
        return Err(NonlocalError::PreconditionViolated(format!("steps must lie in (0, R/7] = (0, {limit}], got {steps:?}")));
    }
    let integrals = steps
        .iter()
        .map(|&h| -> Result<f64, NonlocalError> { lp_power(&finite_difference(u, h, 2)?, ball, p) })
        .collect::<Result<Vec<f64>, _>>()?;
    let (slope, r2) = if integrals.iter().all(|&v| v > 0.0) {
        match fit_slope(steps, &integrals) {
            Ok((slope, r2)) => (Some(slope), Some(r2)),
            Err(_) => (None, None),
        }
    } else {
        (None, None)
    };
    Ok(SecondDifferenceFit { steps: steps.to_vec(), integrals, slope, r2 })
}
