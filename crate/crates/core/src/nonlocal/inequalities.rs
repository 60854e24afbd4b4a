//! Elementary inequalities with explicit constants.

use serde::{Deserialize, Serialize};

use super::NonlocalError;

/// Relative slack granted to floating-point evaluation of both sides.
pub const INEQUALITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl InequalityCheck {
    pub fn new(lhs: f64, rhs: f64, slack: f64) -> Self {
        Self { lhs, rhs, holds: lhs <= rhs * (1.0 + slack) + f64::MIN_POSITIVE }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `|a|^γ ≤ 2^γ|a−b|^γ + 2^{α−1}K^{γ−α}|b|^α` for `γ ≥ 1`, `α ≥ γ`, `|a| ≥ K > 0`.
pub fn elementary_superlevel_inequality(
    gamma: f64,
    alpha: f64,
    k: f64,
    a: &[f64],
    b: &[f64],
) -> Result<InequalityCheck, NonlocalError> {
    if a.len() != b.len() || a.is_empty() {
        return Err(NonlocalError::InvalidInput("vectors must share a positive length".into()));
    }
    if !(gamma >= 1.0 && alpha >= gamma && k > 0.0) {
        return Err(NonlocalError::PreconditionViolated(format!("need γ ≥ 1, α ≥ γ, K > 0 (γ={gamma}, α={alpha}, K={k})")));
    }
    let na = norm(a);
    if na < k {
        return Err(NonlocalError::PreconditionViolated(format!("|a| = {na} below K = {k}")));
    }
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let lhs = na.powf(gamma);
    let rhs = 2f64.powf(gamma) * norm(&diff).powf(gamma) + 2f64.powf(alpha - 1.0) * k.powf(gamma - alpha) * norm(b).powf(alpha);
    Ok(InequalityCheck::new(lhs, rhs, INEQUALITY_SLACK))
}

/// `(Σ_i |Σ_k a_{k,i}|^p)^{1/p} ≤ Σ_k (Σ_i |a_{k,i}|^p)^{1/p}`; rows are indexed by `k`.
pub fn minkowski_sum_inequality(rows: &[Vec<f64>], p: f64) -> Result<InequalityCheck, NonlocalError> {
    if !(p >= 1.0) {
        return Err(NonlocalError::PreconditionViolated(format!("need p ≥ 1, got {p}")));
    }
    let len = rows.first().map(|r| r.len()).unwrap_or(0);
    if rows.iter().any(|r| r.len() != len) {
        return Err(NonlocalError::InvalidInput("rows must share a length".into()));
    }
    let lhs = (0..len)
        .map(|i| rows.iter().map(|r| r[i]).sum::<f64>().abs().powf(p))
        .sum::<f64>()
        .powf(1.0 / p);
    let rhs = rows
        .iter()
        .map(|r| r.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p))
        .sum::<f64>();
    Ok(InequalityCheck::new(lhs, rhs, INEQUALITY_SLACK))
}

/// Weighted discrete `L^t` norm `(Σ w_i |f_i|^t)^{1/t}`.
pub fn weighted_norm(values: &[f64], weights: &[f64], t: f64) -> f64 {
    values
        .iter()
        .zip(weights)
        .map(|(f, w)| w * f.abs().powf(t))
        .sum::<f64>()
        .powf(1.0 / t)
}

/// Interpolation inequality with constant one on a discrete measure:
/// `‖f‖_{ãp}^{1/(p−1)} ≤ ‖f‖_{inner}^{μ}·‖f‖_{μq}^{tail_power}`.
pub fn interpolation_inequality(
    values: &[f64],
    weights: &[f64],
    a_tilde_p: f64,
    inner_exponent: f64,
    mu: f64,
    mu_q: f64,
    tail_power: f64,
    p: f64,
    slack: f64,
) -> InequalityCheck {
    let lhs = weighted_norm(values, weights, a_tilde_p).powf(1.0 / (p - 1.0));
    let rhs = weighted_norm(values, weights, inner_exponent).powf(mu) * weighted_norm(values, weights, mu_q).powf(tail_power);
    InequalityCheck::new(lhs, rhs, slack)
}
