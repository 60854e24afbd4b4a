//! One-dimensional adaptive quadrature.
//!
//! The workhorse is a globally adaptive 21-point Gauss–Kronrod scheme with
//! bisection. On top of it sit algebraic endpoint substitutions, mapped
//! semi-infinite integrals, symmetric principal values with Richardson
//! extrapolation, and the angular reduction of radial kernels in `ℝⁿ`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl QuadratureResult {
    pub fn exact(value: f64) -> Self {
        Self { value, error_estimate: 0.0, evaluations: 0, converged: true }
    }

    fn combine(self, other: Self) -> Self {
        Self {
            value: self.value + other.value,
            error_estimate: self.error_estimate + other.error_estimate,
            evaluations: self.evaluations + other.evaluations,
            converged: self.converged && other.converged,
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            error_estimate: self.error_estimate * factor.abs(),
            ..self
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("quadrature did not converge ({reason}); best value {} with error {}", partial.value, partial.error_estimate)]
    NonConvergence { partial: QuadratureResult, reason: String },
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("angular weight is singular at t = {t}")]
    SingularArgument { t: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl QuadError {
    fn non_convergence(partial: QuadratureResult, reason: impl Into<String>) -> Self {
        Self::NonConvergence { partial, reason: reason.into() }
    }
}

/// Mixed absolute/relative tolerance: the target is `max(abs, rel·|value|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    pub fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }

    pub fn split(&self, parts: usize) -> Self {
        let k = parts.max(1) as f64;
        Self { abs: self.abs / k, rel: self.rel / k }
    }
}

impl From<f64> for Tolerance {
    fn from(tol: f64) -> Self {
        Self { abs: tol, rel: tol }
    }
}

/// Default evaluation budget for a single adaptive integral.
pub const DEFAULT_MAX_EVALS: usize = 400_000;

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208980172195,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (1.0f64).min((200.0 * error / res_asc).powf(1.5));
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(floor);
    }
    Segment { a, b, value, error }
}

/// Globally adaptive Gauss–Kronrod integration on a finite interval.
pub fn integrate<F, T>(f: F, a: f64, b: f64, tol: T) -> Result<QuadratureResult, QuadError>
where
    F: Fn(f64) -> f64,
    T: Into<Tolerance>,
{
    integrate_budget(f, a, b, tol.into(), DEFAULT_MAX_EVALS)
}

pub fn integrate_budget<F>(
    f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
    max_evals: usize,
) -> Result<QuadratureResult, QuadError>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(QuadError::InvalidInterval { a, b });
    }
    if a == b {
        return Ok(QuadratureResult::exact(0.0));
    }
    let first = kronrod(&f, a, b);
    let mut evals = 21;
    let mut heap = BinaryHeap::new();
    let mut done_value = 0.0;
    let mut done_error = 0.0;
    let mut total_value = first.value;
    let mut total_error = first.error;
    heap.push(first);
    loop {
        if !total_value.is_finite() || !total_error.is_finite() {
            let partial = QuadratureResult { value: total_value, error_estimate: f64::INFINITY, evaluations: evals, converged: false };
            return Err(QuadError::non_convergence(partial, "non-finite integrand values"));
        }
        if total_error <= tol.target(total_value) {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) <= 8.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE) {
            done_value += worst.value;
            done_error += worst.error;
            continue;
        }
        if evals + 42 > max_evals {
            heap.push(worst);
            let partial = QuadratureResult { value: total_value, error_estimate: total_error, evaluations: evals, converged: false };
            return Err(QuadError::non_convergence(partial, "evaluation budget exhausted"));
        }
        let left = kronrod(&f, worst.a, mid);
        let right = kronrod(&f, mid, worst.b);
        evals += 42;
        total_value += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum in a fixed order to keep results independent of heap history.
    let mut segs: Vec<Segment> = heap.into_vec();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = neumaier_sum(segs.iter().map(|s| s.value)) + done_value;
    let error = segs.iter().map(|s| s.error).sum::<f64>() + done_error;
    let converged = error <= tol.target(value) * (1.0 + 1e-12);
    let result = QuadratureResult { value, error_estimate: error, evaluations: evals, converged };
    if converged {
        Ok(result)
    } else {
        Err(QuadError::non_convergence(result, "subdivision limit reached"))
    }
}

/// Compensated summation (Neumaier variant of Kahan).
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Substitution power that smooths a `(x−a)^λ` endpoint behaviour.
fn substitution_power(lambda: f64) -> u32 {
    if lambda >= 0.0 && lambda.fract() == 0.0 {
        return 1;
    }
    ((3.0 / (lambda + 1.0)).ceil() as i64).clamp(1, 16) as u32
}

/// Integral with declared algebraic endpoint behaviour `(x−a)^λ_left` and
/// `(b−x)^λ_right`, each exponent greater than −1.
pub fn integrate_singular<F, T>(
    f: F,
    a: f64,
    b: f64,
    left: Option<f64>,
    right: Option<f64>,
    tol: T,
) -> Result<QuadratureResult, QuadError>
where
    F: Fn(f64) -> f64,
    T: Into<Tolerance>,
{
    let tol = tol.into();
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(QuadError::InvalidInterval { a, b });
    }
    for lam in [left, right].into_iter().flatten() {
        if !(lam > -1.0) {
            return Err(QuadError::InvalidInput(format!("endpoint exponent {lam} must exceed -1")));
        }
    }
    match (left, right) {
        (None, None) => integrate(f, a, b, tol),
        (Some(l), None) => left_mapped(&f, a, b, l, tol),
        (None, Some(r)) => right_mapped(&f, a, b, r, tol),
        (Some(l), Some(r)) => {
            let m = 0.5 * (a + b);
            let half = tol.split(2);
            let lo = left_mapped(&f, a, m, l, half)?;
            let hi = right_mapped(&f, m, b, r, half)?;
            Ok(lo.combine(hi))
        }
    }
}

fn left_mapped<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, lam: f64, tol: Tolerance) -> Result<QuadratureResult, QuadError> {
    endpoint_mapped(f, a, b - a, lam, tol)
}

fn right_mapped<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, lam: f64, tol: Tolerance) -> Result<QuadratureResult, QuadError> {
    endpoint_mapped(f, b, a - b, lam, tol)
}

/// `∫` over the segment from `anchor` to `anchor + span` (either sign) with
/// `x = anchor + span·u^k`, so that points near the singular end are formed
/// from the anchor without cancellation.
fn endpoint_mapped<F: Fn(f64) -> f64>(f: &F, anchor: f64, span: f64, lam: f64, tol: Tolerance) -> Result<QuadratureResult, QuadError> {
    let k = substitution_power(lam);
    let (lo, hi) = if span >= 0.0 { (anchor, anchor + span) } else { (anchor + span, anchor) };
    if k == 1 {
        return integrate(f, lo, hi, tol);
    }
    let w = span.abs();
    let kf = k as f64;
    integrate(
        |u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            let uk1 = u.powi(k as i32 - 1);
            let offset = span * uk1 * u;
            let x = anchor + offset;
            if offset == 0.0 || x == anchor {
                return 0.0;
            }
            f(x) * kf * w * uk1
        },
        0.0,
        1.0,
        tol,
    )
}

/// `∫_a^∞ f` for integrands decaying like `t^{−1−c}` with `c > 0`.
///
/// Uses `t = a + w(u^{−1/c} − 1)`, which turns a pure power tail into a
/// bounded integrand on `(0, 1]`.
pub fn integrate_to_infinity<F, T>(f: F, a: f64, decay: f64, tol: T) -> Result<QuadratureResult, QuadError>
where
    F: Fn(f64) -> f64,
    T: Into<Tolerance>,
{
    if !(decay > 0.0) {
        return Err(QuadError::InvalidInput(format!("decay exponent {decay} must be positive")));
    }
    let w = a.abs().max(1.0);
    let inv = 1.0 / decay;
    // The extra cube smooths the fractional-power corrections at u = 0.
    integrate(
        |v: f64| {
            if v <= 0.0 {
                return 0.0;
            }
            let u = v * v * v;
            let g = u.powf(-inv);
            let t = a + w * (g - 1.0);
            if !t.is_finite() {
                return 0.0;
            }
            let val = f(t) * w * inv * g * 3.0 / v;
            if val.is_finite() {
                val
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// Sum of integrals over consecutive breakpoints.
pub fn integrate_pieces<F, T>(f: F, points: &[f64], tol: T) -> Result<QuadratureResult, QuadError>
where
    F: Fn(f64) -> f64,
    T: Into<Tolerance>,
{
    let tol = tol.into().split(points.len().saturating_sub(1));
    let mut acc = QuadratureResult::exact(0.0);
    for w in points.windows(2) {
        acc = acc.combine(integrate(&f, w[0], w[1], tol)?);
    }
    Ok(acc)
}

/// Description of a symmetric principal value at a single point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrincipalValueSpec {
    pub singular_point: f64,
    /// Largest excluded half-width `δ₀`; cutoffs are `δ₀·2^{−k}`.
    pub delta0: f64,
    /// Number of halvings, at most 12.
    pub levels: usize,
    pub extrapolation_order: usize,
}

impl PrincipalValueSpec {
    pub fn new(singular_point: f64, delta0: f64) -> Self {
        Self { singular_point, delta0, levels: 12, extrapolation_order: 3 }
    }

    pub fn cutoffs(&self) -> Vec<f64> {
        (0..=self.levels).map(|k| self.delta0 * 0.5f64.powi(k as i32)).collect()
    }
}

/// Principal value `lim_{δ→0} ∫_{[a,b]∖(x₀−δ,x₀+δ)} f`.
pub fn pv_integrate<F, T>(f: F, spec: &PrincipalValueSpec, a: f64, b: f64, tol: T) -> Result<QuadratureResult, QuadError>
where
    F: Fn(f64) -> f64,
    T: Into<Tolerance>,
{
    let tol = tol.into();
    let x0 = spec.singular_point;
    if !(a < x0 && x0 < b) {
        return Err(QuadError::InvalidInput(format!("singular point {x0} must lie inside ({a}, {b})")));
    }
    if spec.levels == 0 || spec.levels > 12 || spec.extrapolation_order == 0 {
        return Err(QuadError::InvalidInput("levels must lie in 1..=12 and order must be positive".into()));
    }
    let reach = (x0 - a).min(b - x0);
    let delta0 = spec.delta0.min(0.5 * reach);
    if !(delta0 > 0.0) {
        return Err(QuadError::InvalidInput("delta0 must be positive".into()));
    }
    let pieces = spec.levels + 3;
    let sub = Tolerance::new(tol.abs / pieces as f64, tol.rel / pieces as f64);
    let mut outer = QuadratureResult::exact(0.0);
    if x0 - reach > a {
        outer = outer.combine(integrate(&f, a, x0 - reach, sub)?);
    }
    if x0 + reach < b {
        outer = outer.combine(integrate(&f, x0 + reach, b, sub)?);
    }
    let paired = |tau: f64| f(x0 + tau) + f(x0 - tau);
    let mut evals = outer.evaluations;
    let mut quad_err = outer.error_estimate;
    let base = integrate(&paired, delta0, reach, sub)?;
    evals += base.evaluations;
    quad_err += base.error_estimate;
    let mut running = base.value;
    let mut partial_sums = vec![running];
    let mut delta = delta0;
    for _ in 0..spec.levels {
        let next = 0.5 * delta;
        let inc = integrate(&paired, next, delta, sub)?;
        evals += inc.evaluations;
        quad_err += inc.error_estimate;
        running += inc.value;
        partial_sums.push(running);
        delta = next;
    }
    // Richardson table for J(δ) = J₀ + c₁δ + c₂δ² + …, ratio 2.
    let order = spec.extrapolation_order.min(spec.levels);
    let mut table = vec![partial_sums.clone()];
    for j in 1..=order {
        let prev = &table[j - 1];
        let factor = 2f64.powi(j as i32) - 1.0;
        let row: Vec<f64> = (1..prev.len()).map(|k| prev[k] + (prev[k] - prev[k - 1]) / factor).collect();
        table.push(row);
    }
    let last = &table[order];
    let best = last[last.len() - 1];
    let extrap_err = if last.len() >= 2 { (best - last[last.len() - 2]).abs() } else { f64::INFINITY };
    let value = outer.value + best;
    let error = extrap_err + quad_err;
    let result = QuadratureResult { value, error_estimate: error, evaluations: evals, converged: error <= tol.target(value) };
    if result.converged {
        Ok(result)
    } else {
        Err(QuadError::non_convergence(result, "principal-value extrapolants did not stabilise"))
    }
}

/// Surface measure of the unit sphere `S^k ⊂ ℝ^{k+1}`.
pub fn sphere_area(k: usize) -> f64 {
    let m = (k + 1) as f64;
    2.0 * std::f64::consts::PI.powf(0.5 * m) / gamma(0.5 * m)
}

/// Volume of the unit ball in `ℝⁿ`.
pub fn unit_ball_volume(n: usize) -> f64 {
    sphere_area(n - 1) / n as f64
}

/// `Ψ(t) = ∫_{S^{n−1}} |e − tω|^{−exponent} dσ(ω)`.
pub fn angular_weight<T: Into<Tolerance>>(n: usize, t: f64, exponent: f64, tol: T) -> Result<QuadratureResult, QuadError> {
    angular_weight_with_gap(n, t, (1.0 - t).abs(), exponent, tol)
}

/// [`angular_weight`] with `|1 − t|` supplied by the caller, for arguments
/// so close to `1` that forming the gap from `t` would lose digits.
pub fn angular_weight_with_gap<T: Into<Tolerance>>(
    n: usize,
    t: f64,
    gap: f64,
    exponent: f64,
    tol: T,
) -> Result<QuadratureResult, QuadError> {
    let tol = tol.into();
    if n == 0 || !(t >= 0.0) || !t.is_finite() {
        return Err(QuadError::InvalidInput(format!("angular weight needs n ≥ 1 and finite t ≥ 0, got n={n}, t={t}")));
    }
    if gap == 0.0 {
        return Err(QuadError::SingularArgument { t });
    }
    if n == 1 {
        return Ok(QuadratureResult::exact(gap.powf(-exponent) + (1.0 + t).powf(-exponent)));
    }
    let half_e = 0.5 * exponent;
    let sin_pow = (n - 2) as i32;
    let integrand = move |phi: f64| {
        let sh = (0.5 * phi).sin();
        let d2 = gap * gap + 4.0 * t * sh * sh;
        d2.powf(-half_e) * phi.sin().powi(sin_pow)
    };
    let pi = std::f64::consts::PI;
    let mut breaks = vec![0.0];
    if t > 0.0 {
        let mut w = gap;
        while w < pi {
            breaks.push(w);
            w *= 2.0;
        }
    }
    breaks.push(pi);
    let res = integrate_pieces(integrand, &breaks, tol)?;
    Ok(res.scaled(sphere_area(n - 2)))
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if m == 1 {
                p0 = 1.0;
                p1 = x;
            }
            dp = mf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_weights_sum_to_two() {
        let s: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        assert!((s - 2.0).abs() < 1e-14);
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((g - 2.0).abs() < 1e-14);
    }

    #[test]
    fn single_rule_exact_for_high_degree_polynomials() {
        for deg in 0..=29 {
            let seg = kronrod(&|x: f64| x.powi(deg), 0.0, 1.0);
            assert!((seg.value - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        for deg in 0..16 {
            let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
            assert!((v - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn substitution_power_values() {
        assert_eq!(substitution_power(0.0), 1);
        assert_eq!(substitution_power(-0.5), 6);
        assert_eq!(substitution_power(2.5), 1);
    }
}
