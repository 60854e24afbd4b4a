//! Nonlocal tails, their exact decomposition over nested balls, dyadic
//! chains and coincidence bounds.

use serde::{Deserialize, Serialize};

use super::integrate::{integrate_region, mean, mean_oscillation_power, RegionIntegrand};
use super::{Ball, Exterior, GridFunction, NonlocalError};

/// Far-field decay rate `sp − b(p−1)` of the tail integrand, or an error when
/// the exterior leaves the weighted space.
pub(crate) fn check_tail_decay(u: &GridFunction, p: f64, s: f64) -> Result<f64, NonlocalError> {
    let sp = s * p;
    match u.growth() {
        None => Ok(sp),
        Some(b) => {
            let c = sp - b.max(0.0) * (p - 1.0);
            if c <= 1e-3 {
                Err(NonlocalError::DivergentTail { growth: b, p, s })
            } else {
                Ok(c)
            }
        }
    }
}

fn validate_ps(p: f64, s: f64) -> Result<(), NonlocalError> {
    if !(p > 1.0 && s > 0.0 && s < 1.0) {
        return Err(NonlocalError::InvalidInput(format!("need p > 1 and s in (0,1), got p={p}, s={s}")));
    }
    Ok(())
}

/// `∫_{ℝ∖B} |u|^{p−1}|x−x_o|^{−1−sp}` with the kernel centred at `kernel_center`.
fn exterior_weighted(
    u: &GridFunction,
    region_out_of: &Ball,
    kernel_center: f64,
    p: f64,
    s: f64,
) -> Result<f64, NonlocalError> {
    let decay = check_tail_decay(u, p, s)?;
    let sp = s * p;
    let mesh = *u.mesh();
    if let Exterior::PowerTail { amplitude, exponent: _ } = u.exterior() {
        if kernel_center == 0.0 && region_out_of.center == 0.0 && mesh.x_lo() < 0.0 && mesh.x_hi() > 0.0 {
            // Closed form for the power-law part, quadrature on the mesh part.
            let r = region_out_of.radius;
            let phi = move |x: f64, v: f64| v.abs().powf(p - 1.0) * x.abs().powf(-1.0 - sp);
            let ig = RegionIntegrand { phi: &phi, singular_at: Some(0.0), far_decay: Some(decay) };
            let inner = integrate_region(
                u,
                &[(mesh.x_lo().min(-r), -r), (r, mesh.x_hi().max(r))],
                &ig,
            )?
            .value;
            let a = amplitude.abs().powf(p - 1.0);
            let side = |edge: f64| a * edge.max(r).powf(-decay) / decay;
            return Ok(inner + side(mesh.x_hi()) + side(-mesh.x_lo()));
        }
    }
    let phi = move |x: f64, v: f64| v.abs().powf(p - 1.0) * (x - kernel_center).abs().powf(-1.0 - sp);
    let ig = RegionIntegrand { phi: &phi, singular_at: Some(kernel_center), far_decay: Some(decay) };
    Ok(integrate_region(
        u,
        &[(f64::NEG_INFINITY, region_out_of.lo()), (region_out_of.hi(), f64::INFINITY)],
        &ig,
    )?
    .value)
}

/// `Tail(u; B) = [R^{sp} ∫_{ℝ∖B} |u|^{p−1}|x−x_o|^{−1−sp}]^{1/(p−1)}`.
pub fn tail(u: &GridFunction, ball: &Ball, p: f64, s: f64) -> Result<f64, NonlocalError> {
    validate_ps(p, s)?;
    let integral = exterior_weighted(u, ball, ball.center, p, s)?;
    Ok((ball.radius.powf(s * p) * integral).powf(1.0 / (p - 1.0)))
}

/// Tail of the mean-subtracted function `u − (u)_B` on `B`.
pub fn mean_subtracted_tail(u: &GridFunction, ball: &Ball, p: f64, s: f64) -> Result<f64, NonlocalError> {
    let m = mean(u, ball)?;
    tail(&u.offset(-m), ball, p, s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailDecomposition {
    pub first: f64,
    pub second: f64,
    pub third: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    /// `Tail(u − (u)_{x_o,r}; B_r(x_o))`.
    pub tail_value: f64,
    pub decomposition: TailDecomposition,
    /// `[1+|x_o−y_o|/r]^{n/(p−1)+sp′}(r/R)^{sp′}·Tail(u−(u)_{y_o,R}; B_R(y_o))`.
    pub bound_i: f64,
    /// `(|B_1|R/r)^{1/(p−1)}[⨍_{B_R}|u−(u)_R|^p]^{1/p}`.
    pub majorant_ii: f64,
    /// `(R/r)^{1/p}[⨍_{B_R}|u−(u)_R|^p]^{1/p}`.
    pub majorant_iii: f64,
    /// `(2/(sp))^{1/(p−1)}`: the tail of the unit constant on any ball.
    pub constant_tail_factor: f64,
    /// `max{1,2^{p−2}}^{1/(p−1)}[I^{p−1}+II^{p−1}+(c·III)^{p−1}]^{1/(p−1)}`.
    pub recombined_bound: f64,
}

impl TailReport {
    pub fn first_term_bounded(&self) -> bool {
        self.decomposition.first <= self.bound_i * (1.0 + 1e-9) + 1e-13
    }

    pub fn recombination_holds(&self) -> bool {
        self.tail_value <= self.recombined_bound * (1.0 + 1e-9) + 1e-13
    }
}

/// Splits the tail on the inner ball into the pieces outside the outer ball,
/// between the balls, and the difference of means.
pub fn tail_decomposition(
    u: &GridFunction,
    inner: &Ball,
    outer: &Ball,
    p: f64,
    s: f64,
) -> Result<TailReport, NonlocalError> {
    validate_ps(p, s)?;
    if !outer.contains_ball(inner) {
        return Err(NonlocalError::PreconditionViolated("inner ball must lie inside the outer ball".into()));
    }
    let sp = s * p;
    let sp_conj = sp / (p - 1.0);
    let inv = 1.0 / (p - 1.0);
    let (r, big_r) = (inner.radius, outer.radius);
    let m_outer = mean(u, outer)?;
    let m_inner = mean(u, inner)?;
    let shifted = u.offset(-m_outer);
    let tail_value = tail(&u.offset(-m_inner), inner, p, s)?;

    let first = (r.powf(sp) * exterior_weighted(&shifted, outer, inner.center, p, s)?).powf(inv);
    let phi = move |x: f64, v: f64| v.abs().powf(p - 1.0) * (x - inner.center).abs().powf(-1.0 - sp);
    let ig = RegionIntegrand { phi: &phi, singular_at: Some(inner.center), far_decay: None };
    let between = integrate_region(&shifted, &[(outer.lo(), inner.lo()), (inner.hi(), outer.hi())], &ig)?.value;
    let second = (r.powf(sp) * between).powf(inv);
    let third = (m_outer - m_inner).abs();

    let offset = (inner.center - outer.center).abs();
    let tail_outer = tail(&shifted, outer, p, s)?;
    let bound_i = (1.0 + offset / r).powf(inv + sp_conj) * (r / big_r).powf(sp_conj) * tail_outer;
    let osc = mean_oscillation_power(u, outer, p)?.powf(1.0 / p);
    let majorant_ii = (2.0 * big_r / r).powf(inv) * osc;
    let majorant_iii = (big_r / r).powf(1.0 / p) * osc;
    let constant_tail_factor = (2.0 / sp).powf(inv);
    let quasi = 2f64.powf(p - 2.0).max(1.0);
    let recombined_bound = (quasi
        * (first.powf(p - 1.0) + second.powf(p - 1.0) + (constant_tail_factor * third).powf(p - 1.0)))
    .powf(inv);
    Ok(TailReport {
        tail_value,
        decomposition: TailDecomposition { first, second, third },
        bound_i,
        majorant_ii,
        majorant_iii,
        constant_tail_factor,
        recombined_bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicChain {
    /// `Tail(u−(u)_ρ; B_ρ)` for `p ≥ 2`, its `(p−1)`-th power for `p < 2`.
    pub lhs: f64,
    /// Weighted oscillations for `k = 1..=i`.
    pub summands: Vec<f64>,
    /// Remaining tail term on `B_{2^i ρ}` with its weight.
    pub remaining: f64,
    /// Unweighted oscillations `[⨍_{B_{2^kρ}}|u−(u)|^p]^{1/p}`.
    pub oscillations: Vec<f64>,
}

/// Terms of the dyadic tail estimate over `B_ρ, B_{2ρ}, …, B_{2^iρ}`.
pub fn dyadic_tail_chain(u: &GridFunction, ball: &Ball, i: usize, p: f64, s: f64) -> Result<DyadicChain, NonlocalError> {
    validate_ps(p, s)?;
    let sp = s * p;
    let superquadratic = p >= 2.0;
    let weight_exp = if superquadratic { sp / (p - 1.0) } else { sp };
    let osc_power = if superquadratic { 1.0 } else { p - 1.0 };
    let raise = |t: f64| if superquadratic { t } else { t.powf(p - 1.0) };
    let lhs = raise(mean_subtracted_tail(u, ball, p, s)?);
    let mut summands = Vec::with_capacity(i);
    let mut oscillations = Vec::with_capacity(i);
    for k in 1..=i {
        let b = ball.scaled(2f64.powi(k as i32));
        let osc = mean_oscillation_power(u, &b, p)?.powf(1.0 / p);
        oscillations.push(osc);
        summands.push(2f64.powf(-(k as f64) * weight_exp) * osc.powf(osc_power));
    }
    let last = ball.scaled(2f64.powi(i as i32));
    let remaining = 2f64.powf(-(i as f64) * weight_exp) * raise(mean_subtracted_tail(u, &last, p, s)?);
    Ok(DyadicChain { lhs, summands, remaining, oscillations })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceReport {
    /// `Tail(v − (v)_r; B_r)`.
    pub lhs: f64,
    /// `Tail(u − (u)_r; B_r)`.
    pub tail_u: f64,
    /// `(R/r)^{n/(p−1)}[⨍_{B_R}|u−v|^p]^{1/p}`.
    pub difference_term: f64,
    /// `Tail(v − u; B_r)`, which only sees `B_R ∖ B_r`.
    pub tail_difference: f64,
    /// `|(u)_r − (v)_r|`.
    pub mean_gap: f64,
}

/// Quantities entering the coincidence estimate for `v ≡ u` outside `outer`.
pub fn coincidence_tail_bound(
    u: &GridFunction,
    v: &GridFunction,
    inner: &Ball,
    outer: &Ball,
    p: f64,
    s: f64,
) -> Result<CoincidenceReport, NonlocalError> {
    validate_ps(p, s)?;
    if (inner.center - outer.center).abs() > 1e-14 || inner.radius > outer.radius {
        return Err(NonlocalError::PreconditionViolated("balls must be concentric and nested".into()));
    }
    let diff = v.difference(u)?;
    let margin = 1e-12 * outer.radius.max(1.0);
    for (i, x) in diff.mesh().coords().into_iter().enumerate() {
        if (x - outer.center).abs() > outer.radius + margin {
            let d = diff.values()[i];
            if d.abs() > 1e-12 {
                return Err(NonlocalError::CoincidenceViolated { x, difference: d });
            }
        }
    }
    let mesh = diff.mesh();
    let edge = mesh.x_lo().abs().max(mesh.x_hi().abs()).max(outer.hi().abs()).max(outer.lo().abs());
    for k in 0..16 {
        let x = edge * (1.0 + 0.37 * k as f64);
        for y in [x, -x] {
            let d = diff.exterior_value(y);
            if d.abs() > 1e-12 {
                return Err(NonlocalError::CoincidenceViolated { x: y, difference: d });
            }
        }
    }
    let diff = diff.with_exterior(Exterior::zero());
    let lhs = mean_subtracted_tail(v, inner, p, s)?;
    let tail_u = mean_subtracted_tail(u, inner, p, s)?;
    let lp = super::integrate::lp_power(&diff, outer, p)? / outer.measure();
    let difference_term = (outer.radius / inner.radius).powf(1.0 / (p - 1.0)) * lp.powf(1.0 / p);
    let tail_difference = tail(&diff, inner, p, s)?;
    let mean_gap = (mean(u, inner)? - mean(v, inner)?).abs();
    Ok(CoincidenceReport { lhs, tail_u, difference_term, tail_difference, mean_gap })
}
