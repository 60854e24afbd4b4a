//! Gagliardo seminorms by a product-trapezoid rule in the increment variable.
//!
//! For `x` on the grid and increments `ξ = kh`, the difference quotient
//! `|w(x+ξ)−w(x)|^q/ξ^q` is treated as piecewise linear in `ξ` and integrated
//! exactly against `ξ^β`, `β = q−1−γq`. The value at `ξ = 0` is replaced by
//! the first increment, which is the slope of the interpolant on the first cell.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::quad::{gauss_legendre, neumaier_sum};

use super::{Ball, GridFunction, Mesh, NonlocalError};

/// Moments `m_k = ∫ hat_k(z) z^β dz` of unit-spacing hat functions centred at
/// `k = 1..=count`, with the half hat at `z = 0` folded into `k = 1`.
///
/// `end` carries the right half hat `∫_{K−1}^{K}(z−K+1)z^β dz` for every `K`,
/// used when the increment range stops at `K`.
#[derive(Debug, Clone)]
pub struct HatMoments {
    pub beta: f64,
    pub full: Vec<f64>,
    pub end: Vec<f64>,
}

impl HatMoments {
    pub fn new(beta: f64, count: usize) -> Self {
        let (gx, gw) = gauss_legendre(16);
        let b1 = beta + 1.0;
        let b2 = beta + 2.0;
        // ∫_a^b (z−a) z^β and ∫_a^b (b−z) z^β on unit cells away from 0.
        let rising = |a: f64| -> f64 {
            let mut acc = 0.0;
            for k in 0..gx.len() {
                let z = a + 0.5 * (1.0 + gx[k]);
                acc += gw[k] * (z - a) * z.powf(beta);
            }
            0.5 * acc
        };
        let falling = |a: f64| -> f64 {
            let mut acc = 0.0;
            for k in 0..gx.len() {
                let z = a + 0.5 * (1.0 + gx[k]);
                acc += gw[k] * (a + 1.0 - z) * z.powf(beta);
            }
            0.5 * acc
        };
        let mut full = vec![0.0; count + 1];
        let mut end = vec![0.0; count + 1];
        // On [0,1]: ∫ z·z^β = 1/b2 and ∫ (1−z) z^β = 1/(b1 b2).
        let first_rise = 1.0 / b2;
        let first_fall = 1.0 / (b1 * b2);
        for k in 1..=count {
            let rise = if k == 1 { first_rise } else { rising((k - 1) as f64) };
            let fall = falling(k as f64);
            end[k] = if k == 1 { first_rise + first_fall } else { rise };
            full[k] = if k == 1 { first_rise + first_fall + fall } else { rise + fall };
        }
        Self { beta, full, end }
    }
}

fn resample(w: &GridFunction, ball: &Ball) -> Result<(Vec<f64>, f64), NonlocalError> {
    let mesh = w.mesh();
    let h = mesh.spacing();
    if ball.lo() < mesh.x_lo() - 1e-12 * h || ball.hi() > mesh.x_hi() + 1e-12 * h {
        return Err(NonlocalError::OutsideMesh { lo: ball.lo(), hi: ball.hi() });
    }
    if let (Some(i0), Some(i1)) = (mesh.node_at(ball.lo(), 1e-9), mesh.node_at(ball.hi(), 1e-9)) {
        if i1 > i0 {
            return Ok((w.values()[i0..=i1].to_vec(), h));
        }
    }
    let cells = ((ball.measure() / h).ceil() as usize).max(2);
    let sub = Mesh::new(ball.lo(), ball.hi(), cells + 1)?;
    Ok((sub.coords().iter().map(|&x| w.value_at(x)).collect(), sub.spacing()))
}

/// `∬_{B×B} |w(x)−w(y)|^q |x−y|^{−1−γq}` on equally spaced samples.
pub fn seminorm_power_on_samples(values: &[f64], h: f64, gamma: f64, q: f64) -> f64 {
    let m = values.len() - 1;
    let beta = q - 1.0 - gamma * q;
    let moments = HatMoments::new(beta, m);
    let scale = h.powf(beta + 1.0 - q);
    let rows: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| {
            let reach = m - i;
            let wi = values[i];
            let terms = (1..=reach).map(|k| {
                let d = (values[i + k] - wi).abs();
                if d == 0.0 {
                    return 0.0;
                }
                let weight = if k == reach { moments.end[k] } else { moments.full[k] };
                weight * d.powf(q) / (k as f64).powf(q)
            });
            let outer = if i == 0 { 0.5 } else { 1.0 };
            outer * neumaier_sum(terms)
        })
        .collect();
    2.0 * h * scale * neumaier_sum(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeminormReport {
    /// `[w]^q`.
    pub power: f64,
    /// `[w]`.
    pub value: f64,
    /// Values of `[w]^q` on the grid, every second and every fourth sample.
    pub refinement: Vec<f64>,
}

/// Gagliardo seminorm `[w]_{W^{γ,q}(B)}` with a refinement-based divergence check.
pub fn gagliardo_seminorm(w: &GridFunction, ball: &Ball, gamma: f64, q: f64) -> Result<SeminormReport, NonlocalError> {
    if !(gamma > 0.0 && gamma < 1.0 && q >= 1.0) {
        return Err(NonlocalError::InvalidInput(format!("need γ in (0,1) and q ≥ 1, got γ={gamma}, q={q}")));
    }
    let (values, h) = resample(w, ball)?;
    let fine = seminorm_power_on_samples(&values, h, gamma, q);
    let mut refinement = vec![fine];
    let m = values.len() - 1;
    if m % 4 == 0 && m >= 8 {
        for stride in [2usize, 4] {
            let sub: Vec<f64> = values.iter().step_by(stride).copied().collect();
            refinement.push(seminorm_power_on_samples(&sub, h * stride as f64, gamma, q));
        }
        let (v1, v2, v4) = (refinement[0], refinement[1], refinement[2]);
        let d1 = v1 - v2;
        let d2 = v2 - v4;
        if d1 > 1e-9 * v1.abs() && d2 > 0.0 && d1 >= 0.97 * d2 {
            return Err(NonlocalError::DivergentSeminorm { values: refinement });
        }
    }
    Ok(SeminormReport { power: fine, value: fine.max(0.0).powf(1.0 / q), refinement })
}
