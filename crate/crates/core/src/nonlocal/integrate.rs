//! Integration of expressions in a grid function over unions of intervals.
//!
//! Mesh segments use fixed Gauss–Legendre panels on the linear interpolant,
//! split at sign changes and graded towards a declared kernel singularity.
//! Parts outside the mesh use adaptive quadrature on the exterior model.

use std::sync::OnceLock;

use crate::quad::{gauss_legendre, integrate, integrate_to_infinity, neumaier_sum, QuadratureResult, Tolerance};

use super::{Ball, GridFunction, NonlocalError};

const PANEL_ORDER: usize = 10;

fn panel() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

/// Integrand `φ(x, u(x))` together with the information the integrator needs.
pub struct RegionIntegrand<'a> {
    pub phi: &'a (dyn Fn(f64, f64) -> f64 + Sync),
    /// Point where `φ` may blow up; it must lie outside the region.
    pub singular_at: Option<f64>,
    /// `c` with `|φ(x, u(x))| ≲ |x|^{−1−c}` as `|x| → ∞`.
    pub far_decay: Option<f64>,
}

fn exterior_tol() -> Tolerance {
    Tolerance::new(1e-15, 1e-12)
}

fn gl_panel(a: f64, b: f64, f: &dyn Fn(f64) -> f64) -> f64 {
    let (x, w) = panel();
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let mut acc = 0.0;
    for k in 0..x.len() {
        acc += w[k] * f(c + hw * x[k]);
    }
    acc * hw
}

fn graded_pieces(a: f64, b: f64, singular_at: Option<f64>) -> Vec<(f64, f64)> {
    let Some(x0) = singular_at else { return vec![(a, b)] };
    let d = if x0 < a {
        a - x0
    } else if x0 > b {
        x0 - b
    } else {
        0.0
    };
    let len = b - a;
    if d > 0.0 {
        let k = ((2.0 * len / d).ceil() as usize).clamp(1, 256);
        let step = len / k as f64;
        return (0..k).map(|j| (a + j as f64 * step, if j + 1 == k { b } else { a + (j + 1) as f64 * step })).collect();
    }
    // Singular point on the boundary: geometric grading towards it.
    let toward_left = (x0 - a).abs() <= (x0 - b).abs();
    let mut cuts = vec![0.0];
    let mut t = 1.0;
    while t > 1e-14 {
        cuts.push(t);
        t *= 0.5;
    }
    cuts.sort_by(f64::total_cmp);
    let pieces: Vec<(f64, f64)> = cuts
        .windows(2)
        .map(|w| if toward_left { (a + w[0] * len, a + w[1] * len) } else { (b - w[1] * len, b - w[0] * len) })
        .collect();
    pieces
}

fn mesh_part(u: &GridFunction, a: f64, b: f64, ig: &RegionIntegrand) -> f64 {
    let mesh = u.mesh();
    let lo = a.max(mesh.x_lo());
    let hi = b.min(mesh.x_hi());
    if !(hi > lo) {
        return 0.0;
    }
    let vals = u.values();
    let (i0, _) = mesh.locate(lo).expect("inside mesh");
    let (i1, _) = mesh.locate(hi).expect("inside mesh");
    let mut parts = Vec::new();
    for i in i0..=i1 {
        let xa = mesh.x(i);
        let xb = mesh.x(i + 1);
        let sa = xa.max(lo);
        let sb = xb.min(hi);
        if !(sb > sa) {
            continue;
        }
        let (ua, ub) = (vals[i], vals[i + 1]);
        let interp = move |x: f64| {
            let t = (x - xa) / (xb - xa);
            ua * (1.0 - t) + ub * t
        };
        let mut cuts = vec![sa];
        if ua * ub < 0.0 {
            let root = xa + (xb - xa) * ua / (ua - ub);
            if root > sa && root < sb {
                cuts.push(root);
            }
        }
        cuts.push(sb);
        let f = |x: f64| (ig.phi)(x, interp(x));
        for w in cuts.windows(2) {
            for (pa, pb) in graded_pieces(w[0], w[1], ig.singular_at) {
                parts.push(gl_panel(pa, pb, &f));
            }
        }
    }
    neumaier_sum(parts)
}

fn exterior_piece(u: &GridFunction, a: f64, b: f64, ig: &RegionIntegrand) -> Result<QuadratureResult, NonlocalError> {
    // Clip to the support of the exterior when it is bounded.
    let (mut a, mut b) = (a, b);
    if let Some(r) = u.support_radius() {
        a = a.max(-r);
        b = b.min(r);
    }
    if !(b > a) {
        return Ok(QuadratureResult::exact(0.0));
    }
    let f = |x: f64| (ig.phi)(x, u.exterior_value(x));
    let res = match (a.is_finite(), b.is_finite()) {
        (true, true) => integrate(f, a, b, exterior_tol())?,
        (true, false) => {
            let c = ig.far_decay.ok_or_else(|| NonlocalError::InvalidInput("unbounded region needs a decay rate".into()))?;
            integrate_to_infinity(f, a, c, exterior_tol())?
        }
        (false, true) => {
            let c = ig.far_decay.ok_or_else(|| NonlocalError::InvalidInput("unbounded region needs a decay rate".into()))?;
            integrate_to_infinity(|y: f64| f(-y), -b, c, exterior_tol())?
        }
        (false, false) => {
            return Err(NonlocalError::InvalidInput("split doubly infinite intervals before integrating".into()));
        }
    };
    Ok(res)
}

/// `∫_{∪[a_k,b_k]} φ(x, u(x)) dx`; interval ends may be infinite.
pub fn integrate_region(
    u: &GridFunction,
    intervals: &[(f64, f64)],
    ig: &RegionIntegrand,
) -> Result<QuadratureResult, NonlocalError> {
    let mesh = u.mesh();
    let mut values = Vec::new();
    let mut err = 0.0;
    let mut evals = 0;
    for &(a0, b0) in intervals {
        if !(b0 > a0) {
            continue;
        }
        let mut split = vec![(a0, b0)];
        if a0 == f64::NEG_INFINITY && b0 == f64::INFINITY {
            split = vec![(a0, 0.0), (0.0, b0)];
        }
        for (a, b) in split {
            values.push(mesh_part(u, a, b, ig));
            if a < mesh.x_lo() {
                let r = exterior_piece(u, a, b.min(mesh.x_lo()), ig)?;
                values.push(r.value);
                err += r.error_estimate;
                evals += r.evaluations;
            }
            if b > mesh.x_hi() {
                let r = exterior_piece(u, a.max(mesh.x_hi()), b, ig)?;
                values.push(r.value);
                err += r.error_estimate;
                evals += r.evaluations;
            }
        }
    }
    Ok(QuadratureResult { value: neumaier_sum(values), error_estimate: err, evaluations: evals, converged: true })
}

/// `∫_B φ(x, u(x)) dx` over a ball.
pub fn integrate_ball(u: &GridFunction, ball: &Ball, phi: &(dyn Fn(f64, f64) -> f64 + Sync)) -> Result<f64, NonlocalError> {
    let ig = RegionIntegrand { phi, singular_at: None, far_decay: None };
    Ok(integrate_region(u, &[(ball.lo(), ball.hi())], &ig)?.value)
}

/// Mean value `(u)_B`.
pub fn mean(u: &GridFunction, ball: &Ball) -> Result<f64, NonlocalError> {
    Ok(integrate_ball(u, ball, &|_, v| v)? / ball.measure())
}

/// `∫_B |u|^p`.
pub fn lp_power(u: &GridFunction, ball: &Ball, p: f64) -> Result<f64, NonlocalError> {
    integrate_ball(u, ball, &|_, v: f64| v.abs().powf(p))
}

/// Mean oscillation `⨍_B |u − (u)_B|^p`.
pub fn mean_oscillation_power(u: &GridFunction, ball: &Ball, p: f64) -> Result<f64, NonlocalError> {
    let m = mean(u, ball)?;
    Ok(integrate_ball(u, ball, &|_, v: f64| (v - m).abs().powf(p))? / ball.measure())
}

/// Weighted integral `∫_ℝ |u|^{p−1}(1+|x|)^{−1−sp}`; finite exactly when `u` lies in the tail space.
pub fn weighted_integral(u: &GridFunction, p: f64, s: f64) -> Result<f64, NonlocalError> {
    let decay = super::tail::check_tail_decay(u, p, s)?;
    let sp = s * p;
    let phi = move |x: f64, v: f64| v.abs().powf(p - 1.0) * (1.0 + x.abs()).powf(-1.0 - sp);
    let ig = RegionIntegrand { phi: &phi, singular_at: None, far_decay: Some(decay) };
    Ok(integrate_region(u, &[(f64::NEG_INFINITY, f64::INFINITY)], &ig)?.value)
}
