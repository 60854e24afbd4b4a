//! The explicit power-law solution `u(x) = |x|^{−γ}` and everything that can be
//! computed about it in closed form or by one-dimensional radial quadrature.
//!
//! With `u(x) = |x|^{−γ}` and `γ = n/(r(p−1)) − sp′`, homogeneity gives
//! `(−Δ_p)^s u(x) = C|x|^{−n/r}` away from the origin, where
//! `C = p.v.∫ J(1−|y|^{−γ})|e−y|^{−n−sp} dy` and `J(t) = |t|^{p−2}t`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::{sharp_exponents, ParamsError, ProblemParams};
use crate::quad::{
    angular_weight_with_gap, integrate, integrate_singular, integrate_to_infinity, neumaier_sum, sphere_area,
    unit_ball_volume, QuadError, QuadratureResult, Tolerance,
};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("the constant C has not been computed for this configuration")]
    MissingConstant,
}

/// `J(t) = |t|^{p−2} t`.
pub fn signed_power(t: f64, p: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.signum() * t.abs().powf(p - 1.0)
    }
}

/// Configuration of the power-law solution for given `(n, p, s, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleSpec {
    pub params: ProblemParams,
    pub r: f64,
    pub gamma: f64,
    /// Sharp gradient exponent `q = n/(γ+1)`.
    pub q: f64,
    /// Constant of the right-hand side `f = C|x|^{−n/r}`.
    pub c: Option<f64>,
    pub c_error: Option<f64>,
    /// `n/r`.
    pub f_amplitude_exponent: f64,
}

impl CounterexampleSpec {
    pub fn new(params: ProblemParams, r: f64) -> Result<Self, OracleError> {
        if params.sp() >= params.dim() {
            return Err(OracleError::PreconditionViolated(format!("need sp < n, got sp = {}", params.sp())));
        }
        let sharp = sharp_exponents(&params, r)?;
        let gamma = sharp.gamma_example;
        let q = params.dim() / (gamma + 1.0);
        Ok(Self { params, r, gamma, q, c: None, c_error: None, f_amplitude_exponent: params.dim() / r })
    }

    pub fn with_constant(mut self, c: &QuadratureResult) -> Self {
        self.c = Some(c.value);
        self.c_error = Some(c.error_estimate);
        self
    }

    /// `u(ρ) = ρ^{−γ}`.
    pub fn u(&self, rho: f64) -> f64 {
        rho.powf(-self.gamma)
    }

    /// `|∇u|(ρ) = |γ|ρ^{−γ−1}`.
    pub fn gradient(&self, rho: f64) -> f64 {
        self.gamma.abs() * rho.powf(-self.gamma - 1.0)
    }

    /// `f(ρ) = Cρ^{−n/r}`.
    pub fn f(&self, rho: f64) -> Result<f64, OracleError> {
        Ok(self.c.ok_or(OracleError::MissingConstant)? * rho.powf(-self.f_amplitude_exponent))
    }
}

/// Knobs of the constant computation; the value must not depend on them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantOptions {
    pub tol: f64,
    /// Half-width `σ₁` of the logarithmic window `t ∈ [e^{−σ₁}, e^{σ₁}]` around the
    /// singular sphere, on which `t` and `1/t` are paired.
    pub pairing_reach: f64,
    /// Radius beyond which the radial integral uses the mapped semi-infinite rule.
    pub far_start: f64,
}

impl ConstantOptions {
    pub fn new(tol: f64) -> Self {
        Self { tol, pairing_reach: std::f64::consts::LN_2, far_start: 4.0 }
    }
}

/// `C = p.v.∫_{ℝⁿ} J(1−|y|^{−γ})|e−y|^{−(n+sp)} dy` with default options.
pub fn constant_c(spec: &CounterexampleSpec, tol: f64) -> Result<QuadratureResult, OracleError> {
    power_law_constant(&spec.params, spec.gamma, &ConstantOptions::new(tol))
}

/// The constant for an arbitrary exponent `γ` with `γ(p−1) < n` and `sp + min(γ,0)(p−1) > 0`.
///
/// In the variable `t = e^σ` the inversion `t ↦ 1/t` maps `Ψ(t)` to `t^{n+sp}Ψ(t)`,
/// so the contributions of `σ` and `−σ` combine into
/// `P(σ) = −Ψ(e^σ) J(1−e^{−γσ}) e^{nσ} expm1(κσ)`, `κ = γ(p−1)+sp−n`,
/// which behaves like `σ^{p−1−sp}` at `σ = 0`.
pub fn power_law_constant(params: &ProblemParams, gamma: f64, opts: &ConstantOptions) -> Result<QuadratureResult, OracleError> {
    let (n, p, sp) = (params.n, params.p, params.sp());
    let nf = n as f64;
    if gamma * (p - 1.0) >= nf {
        return Err(OracleError::PreconditionViolated(format!("γ(p−1) = {} must stay below n", gamma * (p - 1.0))));
    }
    let decay = sp + gamma.min(0.0) * (p - 1.0);
    if decay <= 0.0 {
        return Err(OracleError::PreconditionViolated(format!("integrand does not decay (rate {decay})")));
    }
    let sigma1 = opts.pairing_reach;
    let t_lo = (-sigma1).exp();
    let t_hi = sigma1.exp();
    if !(sigma1 > 0.0 && opts.far_start > t_hi) {
        return Err(OracleError::PreconditionViolated("pairing window must sit inside the near region".into()));
    }
    let tol = Tolerance::from(opts.tol).split(4);
    let inner = Tolerance::from(0.05 * opts.tol);
    let e = nf + sp;
    let kappa = gamma * (p - 1.0) + sp - nf;
    let failure = std::cell::Cell::new(None::<QuadError>);
    let psi = |t: f64, gap: f64| -> f64 {
        match angular_weight_with_gap(n, t, gap, e, inner) {
            Ok(r) => r.value,
            Err(err) => {
                failure.set(Some(err));
                0.0
            }
        }
    };
    let paired = |sigma: f64| -> f64 {
        if sigma <= 0.0 {
            return 0.0;
        }
        let a = -(-gamma * sigma).exp_m1();
        -psi(sigma.exp(), sigma.exp_m1()) * signed_power(a, p) * (nf * sigma).exp() * (kappa * sigma).exp_m1()
    };
    let radial = |t: f64| -> f64 {
        if t <= 0.0 && gamma > 0.0 {
            return 0.0;
        }
        let a = if t == 0.0 { 1.0 } else { 1.0 - t.powf(-gamma) };
        signed_power(a, p) * t.powi(n as i32 - 1) * psi(t, (1.0 - t).abs())
    };
    let origin_exponent = if gamma > 0.0 { nf - 1.0 - gamma * (p - 1.0) } else { nf - 1.0 - gamma };
    let parts = [
        integrate_singular(paired, 0.0, sigma1, Some(p - 1.0 - sp), None, tol)?,
        integrate_singular(radial, 0.0, t_lo, Some(origin_exponent), None, tol)?,
        integrate(radial, t_hi, opts.far_start, tol)?,
        integrate_to_infinity(radial, opts.far_start, decay, tol)?,
    ];
    if let Some(err) = failure.take() {
        return Err(err.into());
    }
    Ok(sum_results(&parts))
}

fn sum_results(parts: &[QuadratureResult]) -> QuadratureResult {
    QuadratureResult {
        value: neumaier_sum(parts.iter().map(|r| r.value)),
        error_estimate: parts.iter().map(|r| r.error_estimate).sum(),
        evaluations: parts.iter().map(|r| r.evaluations).sum(),
        converged: parts.iter().all(|r| r.converged),
    }
}

/// Operator value `(−Δ_p)^s u` at radius `ρ_x`, computed directly in the radial
/// variable with a linear pairing `ρ_x ± τ` around the singular sphere.
pub fn operator_at(spec: &CounterexampleSpec, rho_x: f64, tol: f64) -> Result<QuadratureResult, OracleError> {
    if !(rho_x > 0.0 && rho_x.is_finite()) {
        return Err(OracleError::PreconditionViolated(format!("radius {rho_x} must be positive")));
    }
    let (n, p, sp, gamma) = (spec.params.n, spec.params.p, spec.params.sp(), spec.gamma);
    let nf = n as f64;
    let e = nf + sp;
    let tol_parts = Tolerance::from(tol).split(4);
    let inner = Tolerance::from(1e-3 * tol);
    let ux = rho_x.powf(-gamma);
    let scale = rho_x.powf(-e);
    let failure = std::cell::Cell::new(None::<QuadError>);
    let psi = |t: f64, gap: f64| -> f64 {
        match angular_weight_with_gap(n, t, gap, e, inner) {
            Ok(r) => r.value,
            Err(err) => {
                failure.set(Some(err));
                0.0
            }
        }
    };
    // u(ρ_x) − u(ρ) = −u(ρ_x)·expm1(−γ ln(ρ/ρ_x)), with ln(ρ/ρ_x) = ln_1p(±τ/ρ_x) near the sphere.
    let value_at = |log_ratio: f64, gap: f64| -> f64 {
        let diff = -ux * (-gamma * log_ratio).exp_m1();
        let rho = rho_x * log_ratio.exp();
        signed_power(diff, p) * rho.powi(n as i32 - 1) * scale * psi(rho / rho_x, gap)
    };
    let paired = |tau: f64| -> f64 {
        if tau <= 0.0 {
            return 0.0;
        }
        let z = tau / rho_x;
        value_at(z.ln_1p(), z) + value_at((-z).ln_1p(), z)
    };
    let plain = |rho: f64| -> f64 {
        if rho <= 0.0 {
            return if gamma < 0.0 && n == 1 { signed_power(ux, p) * scale * psi(0.0, 1.0) } else { 0.0 };
        }
        value_at((rho / rho_x).ln(), (rho / rho_x - 1.0).abs())
    };
    let half = 0.5 * rho_x;
    let origin_exponent = if gamma > 0.0 { nf - 1.0 - gamma * (p - 1.0) } else { nf - 1.0 - gamma };
    let decay = sp + gamma.min(0.0) * (p - 1.0);
    let parts = [
        integrate_singular(paired, 0.0, half, Some(p - 1.0 - sp), None, tol_parts)?,
        integrate_singular(plain, 0.0, half, Some(origin_exponent), None, tol_parts)?,
        integrate(plain, 3.0 * half, 4.0 * rho_x, tol_parts)?,
        integrate_to_infinity(plain, 4.0 * rho_x, decay, tol_parts)?,
    ];
    if let Some(err) = failure.take() {
        return Err(err.into());
    }
    Ok(sum_results(&parts))
}

/// `|(−Δ_p)^s u(x) − C|x|^{−n/r}| / |C|x|^{−n/r}|` for each radius.
pub fn pointwise_residual(spec: &CounterexampleSpec, radii: &[f64], tol: f64) -> Result<Vec<f64>, OracleError> {
    let c = spec.c.ok_or(OracleError::MissingConstant)?;
    radii
        .iter()
        .map(|&rho| {
            let lu = operator_at(spec, rho, tol)?.value;
            let target = c * rho.powf(-spec.f_amplitude_exponent);
            Ok((lu - target).abs() / target.abs())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Finite,
    Divergent,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Finite => "finite",
            Verdict::Divergent => "divergent",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipRow {
    pub qtilde: f64,
    /// `‖∇u‖_{L^{q̃}(B_R)}` from the closed form, `None` when infinite.
    pub norm: Option<f64>,
    pub verdict: Verdict,
    /// Same norm from numerical radial integration.
    pub numeric_norm: Option<f64>,
    pub numeric_verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub rows: Vec<MembershipRow>,
    /// Smallest grid exponent with an infinite closed-form norm.
    pub boundary: Option<f64>,
    pub numeric_boundary: Option<f64>,
    /// `[u]_{W^{s,p}(B_1)}`.
    pub seminorm: f64,
    /// `∫ |u|^{p−1}(1+|x|)^{−n−sp} dx`.
    pub weighted_integral: f64,
}

/// Grid `k/50` strictly inside `(p, 1.2q)`.
pub fn default_q_grid(spec: &CounterexampleSpec) -> Vec<f64> {
    let lo = (spec.params.p * 50.0).floor() as i64 + 1;
    let hi = (1.2 * spec.q * 50.0).ceil() as i64 - 1;
    (lo..=hi).map(|k| k as f64 / 50.0).filter(|&x| x > spec.params.p && x < 1.2 * spec.q).collect()
}

/// `n − (γ+1)q̃` with values within rounding of zero snapped to zero.
fn radial_gap(spec: &CounterexampleSpec, qtilde: f64) -> f64 {
    let nf = spec.params.dim();
    let g = nf - (spec.gamma + 1.0) * qtilde;
    if g.abs() <= 1e-12 * nf {
        0.0
    } else {
        g
    }
}

/// `∫_{B_R}|∇u|^{q̃} = |γ|^{q̃}|S^{n−1}|R^{n−(γ+1)q̃}/(n−(γ+1)q̃)` when finite.
pub fn gradient_norm_closed_form(spec: &CounterexampleSpec, qtilde: f64, radius: f64) -> Option<f64> {
    let g = radial_gap(spec, qtilde);
    if g <= 0.0 {
        return None;
    }
    let power = spec.gamma.abs().powf(qtilde) * sphere_area(spec.params.n - 1) * radius.powf(g) / g;
    Some(power.powf(1.0 / qtilde))
}

/// Radial integral in `y = −ln(ρ/R)`, extended by doubling until it settles or
/// clearly grows without bound.
fn gradient_norm_numeric(spec: &CounterexampleSpec, qtilde: f64, radius: f64) -> Result<Option<f64>, OracleError> {
    let g = spec.params.dim() - (spec.gamma + 1.0) * qtilde;
    let amp = spec.gamma.abs().powf(qtilde) * sphere_area(spec.params.n - 1) * radius.powf(g);
    let integrand = |y: f64| amp * (-g * y).exp();
    let mut total = integrate(integrand, 0.0, 1.0, 1e-13)?.value;
    let mut upper = 1.0;
    for _ in 0..40 {
        let piece = integrate(integrand, upper, 2.0 * upper, 1e-13)?.value;
        total += piece;
        upper *= 2.0;
        if piece <= 1e-14 * total {
            return Ok(Some(total.powf(1.0 / qtilde)));
        }
        if piece >= amp * upper * 0.5 {
            // Each doubling adds at least a fixed fraction of the window length.
            return Ok(None);
        }
    }
    Ok(None)
}

/// `[u]^p_{W^{s,p}(B_1)} = 2|S^{n−1}| Z/(n−sp−γp)`, `Z = ∫_0^1 z^{n−1}|z^{−γ}−1|^pΨ(z) dz`.
pub fn seminorm_on_unit_ball(spec: &CounterexampleSpec, tol: f64) -> Result<QuadratureResult, OracleError> {
    let (n, p, sp, gamma) = (spec.params.n, spec.params.p, spec.params.sp(), spec.gamma);
    let nf = n as f64;
    let denom = nf - sp - gamma * p;
    if denom <= 0.0 {
        return Err(OracleError::PreconditionViolated(format!("seminorm on B_1 diverges (n−sp−γp = {denom})")));
    }
    let e = nf + sp;
    let inner = Tolerance::from(0.05 * tol);
    let failure = std::cell::Cell::new(None::<QuadError>);
    let z_integrand = |z: f64| -> f64 {
        if z >= 1.0 || (z <= 0.0 && gamma > 0.0) {
            return 0.0;
        }
        let a = if z == 0.0 { 1.0 } else { (z.powf(-gamma) - 1.0).abs() };
        match angular_weight_with_gap(n, z, 1.0 - z, e, inner) {
            Ok(w) => z.powi(n as i32 - 1) * a.powf(p) * w.value,
            Err(err) => {
                failure.set(Some(err));
                0.0
            }
        }
    };
    let origin_exponent = if gamma > 0.0 { nf - 1.0 - gamma * p } else { nf - 1.0 - gamma };
    let z = integrate_singular(z_integrand, 0.0, 1.0, Some(origin_exponent), Some(p - 1.0 - sp), tol)?;
    if let Some(err) = failure.take() {
        return Err(err.into());
    }
    Ok(z.scaled(2.0 * sphere_area(n - 1) / denom))
}

/// `∫_{ℝⁿ} |u|^{p−1}(1+|x|)^{−n−sp} dx`.
pub fn weighted_integral(spec: &CounterexampleSpec, tol: f64) -> Result<QuadratureResult, OracleError> {
    let (n, p, sp, gamma) = (spec.params.n, spec.params.p, spec.params.sp(), spec.gamma);
    let nf = n as f64;
    let b = -gamma * (p - 1.0);
    let integrand = move |t: f64| if t <= 0.0 { 0.0 } else { t.powf(nf - 1.0 + b) * (1.0 + t).powf(-nf - sp) };
    let decay = sp - b.max(0.0);
    if decay <= 0.0 {
        return Err(OracleError::PreconditionViolated("u leaves the weighted space".into()));
    }
    let half = Tolerance::from(tol).split(2);
    let near = integrate_singular(integrand, 0.0, 1.0, Some(nf - 1.0 + b), None, half)?;
    let far = integrate_to_infinity(integrand, 1.0, sp - b, half)?;
    Ok(sum_results(&[near, far]).scaled(sphere_area(n - 1)))
}

/// Closed-form and numerical memberships of `∇u` in `L^{q̃}(B_R)` along `q_grid`,
/// plus the finite seminorm and weighted-space quantities.
pub fn membership_report(spec: &CounterexampleSpec, q_grid: &[f64], radius: f64) -> Result<MembershipReport, OracleError> {
    let mut rows = Vec::with_capacity(q_grid.len());
    for &qt in q_grid {
        let norm = gradient_norm_closed_form(spec, qt, radius);
        let numeric_norm = if radial_gap(spec, qt) == 0.0 { None } else { gradient_norm_numeric(spec, qt, radius)? };
        let verdict = if norm.is_some() { Verdict::Finite } else { Verdict::Divergent };
        let numeric_verdict = if numeric_norm.is_some() { Verdict::Finite } else { Verdict::Divergent };
        rows.push(MembershipRow { qtilde: qt, norm, verdict, numeric_norm, numeric_verdict });
    }
    let first_divergent = |f: fn(&MembershipRow) -> Verdict| {
        rows.iter().filter(|row| f(row) == Verdict::Divergent).map(|row| row.qtilde).fold(None, |acc: Option<f64>, x| {
            Some(acc.map_or(x, |a| a.min(x)))
        })
    };
    let boundary = first_divergent(|r| r.verdict);
    let numeric_boundary = first_divergent(|r| r.numeric_verdict);
    let seminorm = seminorm_on_unit_ball(spec, 1e-9)?.value.powf(1.0 / spec.params.p);
    let weighted = weighted_integral(spec, 1e-10)?.value;
    Ok(MembershipReport { rows, boundary, numeric_boundary, seminorm, weighted_integral: weighted })
}

/// Solid angle of the spherical cap `{ω : ω·ê ≥ cos θ}` in `S^{n−1}`, `n ≥ 2`.
fn cap_measure(n: usize, cos_theta: f64) -> f64 {
    let c = cos_theta.clamp(-1.0, 1.0);
    match n {
        2 => 2.0 * c.acos(),
        3 => 2.0 * std::f64::consts::PI * (1.0 - c),
        _ => {
            let theta = c.acos();
            let k = (n - 2) as i32;
            let v = integrate(|phi: f64| phi.sin().powi(k), 0.0, theta, 1e-13).map(|r| r.value).unwrap_or(f64::NAN);
            sphere_area(n - 2) * v
        }
    }
}

/// `∫_{B_R(c)} g(|x|) dx` for a ball whose centre sits at distance `d` from the
/// origin; `origin_power` is the exponent of `g` at `0`.
pub fn radial_ball_integral(
    n: usize,
    d: f64,
    radius: f64,
    g: &dyn Fn(f64) -> f64,
    origin_power: f64,
    tol: f64,
) -> Result<f64, OracleError> {
    let nf = n as f64;
    let contains_origin = d < radius;
    if contains_origin && nf - 1.0 + origin_power <= -1.0 {
        return Ok(f64::INFINITY);
    }
    let origin_exp = nf - 1.0 + origin_power;
    if n == 1 {
        let f = |x: f64| if x == 0.0 { 0.0 } else { g(x.abs()) };
        let (lo, hi) = (d - radius, d + radius);
        let val = if contains_origin {
            let half = Tolerance::from(tol).split(2);
            integrate_singular(f, lo, 0.0, None, Some(origin_exp), half)?.value
                + integrate_singular(f, 0.0, hi, Some(origin_exp), None, half)?.value
        } else {
            integrate(f, lo, hi, tol)?.value
        };
        return Ok(val);
    }
    let full = sphere_area(n - 1);
    let cap_exp = 0.5 * (nf - 1.0);
    let partial = |rho: f64| -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        let cos_t = (rho * rho + d * d - radius * radius) / (2.0 * rho * d);
        g(rho) * rho.powi(n as i32 - 1) * cap_measure(n, cos_t)
    };
    if d == 0.0 {
        let f = |rho: f64| if rho <= 0.0 { 0.0 } else { g(rho) * rho.powi(n as i32 - 1) * full };
        return Ok(integrate_singular(f, 0.0, radius, Some(origin_exp), None, tol)?.value);
    }
    if contains_origin {
        let third = Tolerance::from(tol).split(2);
        let inner_r = radius - d;
        let f = |rho: f64| if rho <= 0.0 { 0.0 } else { g(rho) * rho.powi(n as i32 - 1) * full };
        let a = integrate_singular(f, 0.0, inner_r, Some(origin_exp), None, third)?.value;
        let b = integrate_singular(partial, inner_r, d + radius, None, Some(cap_exp), third)?.value;
        Ok(a + b)
    } else {
        Ok(integrate_singular(partial, d - radius, d + radius, Some(cap_exp), Some(cap_exp), tol)?.value)
    }
}

/// `Tail(u − m; B_R(c))` for the power-law solution, `|c| = d`.
fn tail_about(spec: &CounterexampleSpec, d: f64, radius: f64, m: f64, tol: f64) -> Result<f64, OracleError> {
    let (n, p, sp, gamma) = (spec.params.n, spec.params.p, spec.params.sp(), spec.gamma);
    let w = |x: f64| (if x == 0.0 { if gamma < 0.0 { 0.0 } else { f64::INFINITY } } else { x.powf(-gamma) } - m).abs().powf(p - 1.0);
    let inner = Tolerance::from(0.05 * tol);
    let failure = std::cell::Cell::new(None::<QuadError>);
    let theta_avg = |rho: f64| -> f64 {
        if n == 1 {
            return w((d + rho).abs()) + w((d - rho).abs());
        }
        let k = (n - 2) as i32;
        let f = |th: f64| {
            let x2 = d * d + rho * rho + 2.0 * d * rho * th.cos();
            w(x2.max(0.0).sqrt()) * th.sin().powi(k)
        };
        match integrate(f, 0.0, std::f64::consts::PI, inner) {
            Ok(r) => sphere_area(n - 2) * r.value,
            Err(err) => {
                failure.set(Some(err));
                0.0
            }
        }
    };
    let radial = |rho: f64| rho.powf(-1.0 - sp) * theta_avg(rho);
    let decay = sp + gamma.min(0.0) * (p - 1.0);
    let split = 2.0 * (radius + d);
    let parts = Tolerance::from(tol).split(3);
    let mut total = 0.0;
    if d > radius {
        total += integrate(radial, radius, d, parts)?.value + integrate(radial, d, split, parts)?.value;
    } else {
        total += integrate(radial, radius, split, parts)?.value;
    }
    total += integrate_to_infinity(radial, split, decay, parts)?.value;
    if let Some(err) = failure.take() {
        return Err(err.into());
    }
    Ok((radius.powf(sp) * total).powf(1.0 / (p - 1.0)))
}

/// Distance from the origin of the ball centres used for the regular rows.
pub const CZ_CENTER_DISTANCE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CzWitnessRow {
    pub radius: f64,
    pub center_distance: f64,
    pub contains_origin: bool,
    /// `[⨍_{B_{R/2}}|∇u|^q]^{1/q}`.
    pub lhs: f64,
    /// `[⨍_{B_R}|∇u|^p]^{1/p}`.
    pub gradient_term: f64,
    /// `R^{−1}[⨍_{B_R}|R^{sp}f|^r]^{1/(r(p−1))}`.
    pub f_term: f64,
    /// `R^{−1}Tail(u−(u)_R; B_R)`.
    pub tail_term: f64,
    /// `lhs / (gradient_term + f_term + tail_term)`.
    pub ratio: f64,
}

/// Both sides of the gradient estimate on balls of the given radii, centred at
/// distance [`CZ_CENTER_DISTANCE`] from the origin and at the origin itself.
pub fn cz_estimate_witness(spec: &CounterexampleSpec, radii: &[f64], tol: f64) -> Result<Vec<CzWitnessRow>, OracleError> {
    let c = spec.c.ok_or(OracleError::MissingConstant)?;
    let (n, p, sp, gamma, q, r) = (spec.params.n, spec.params.p, spec.params.sp(), spec.gamma, spec.q, spec.r);
    let mut rows = Vec::new();
    for &d in &[CZ_CENTER_DISTANCE, 0.0] {
        for &radius in radii {
            let vol = |rad: f64| unit_ball_volume(n) * rad.powi(n as i32);
            let avg = |g: &dyn Fn(f64) -> f64, power: f64, rad: f64| -> Result<f64, OracleError> {
                Ok(radial_ball_integral(n, d, rad, g, power, tol)? / vol(rad))
            };
            let lhs = avg(&|x| spec.gradient(x).powf(q), -(gamma + 1.0) * q, 0.5 * radius)?.powf(1.0 / q);
            let gradient_term = avg(&|x| spec.gradient(x).powf(p), -(gamma + 1.0) * p, radius)?.powf(1.0 / p);
            let f_avg = avg(&|x| (radius.powf(sp) * c.abs() * x.powf(-spec.f_amplitude_exponent)).powf(r), -(n as f64), radius)?;
            let f_term = f_avg.powf(1.0 / (r * (p - 1.0))) / radius;
            let mean = avg(&|x| spec.u(x), -gamma, radius)?;
            let tail_term = tail_about(spec, d, radius, mean, tol)? / radius;
            let ratio = lhs / (gradient_term + f_term + tail_term);
            rows.push(CzWitnessRow { radius, center_distance: d, contains_origin: d < radius, lhs, gradient_term, f_term, tail_term, ratio });
        }
    }
    Ok(rows)
}
