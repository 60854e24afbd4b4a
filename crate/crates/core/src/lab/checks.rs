//! Seeded property sweeps and exact fixtures aggregated by the `check` scenario.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::diagnostics::{lambda_o, second_difference_scaling, LevelInputs};
use super::fit::fit_slope;
use crate::nonlocal::{
    cover, elementary_superlevel_inequality, gagliardo_seminorm, interpolation_inequality, minkowski_sum_inequality, tail,
    tail_decomposition, AnalyticClosure, Ball, Exterior, GridFunction, Mesh, NonlocalError,
};
use crate::params::{a_tilde_window, fw_exponent_identity, interpolation_exponents, sharp_exponents, ProblemParams};

/// How a CSV row is interpreted: plain values, diagnostics that never fail a
/// run, or assertions that do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Value,
    Diagnostic,
    Assert,
}

impl Label {
    pub fn name(&self) -> &'static str {
        match self {
            Label::Value => "value",
            Label::Diagnostic => "diagnostic",
            Label::Assert => "assert",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub suite: String,
    pub samples: usize,
    pub failures: usize,
    /// Largest observed error or violation ratio; meaning depends on the suite.
    pub worst: f64,
    pub tolerance: f64,
    pub label: Label,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn outcome(suite: &str, samples: usize, failures: usize, worst: f64, tolerance: f64) -> SuiteOutcome {
    SuiteOutcome { suite: suite.into(), samples, failures, worst, tolerance, label: Label::Assert }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(a.abs()).max(f64::MIN_POSITIVE)
}

/// A random `(n, p, s, r)` with `p ∈ [1.05, 3.95]`, `sp′ > 1` and `r` strictly inside its interval.
pub fn random_admissible(rng: &mut ChaCha8Rng) -> (ProblemParams, f64) {
    loop {
        let n = rng.gen_range(1..=3);
        let p = rng.gen_range(1.05..3.95);
        let s_lo = (p - 1.0) / p;
        let s = s_lo + (1.0 - s_lo) * rng.gen_range(0.02..0.98);
        if let Ok(params) = ProblemParams::new(n, p, s) {
            let (lo, hi) = (params.r_min(), params.r_max());
            return (params, lo + (hi - lo) * rng.gen_range(0.02..0.98));
        }
    }
}

pub const EXPONENT_TOL: f64 = 1e-12;

/// `q > p`, `q = n/(γ+1)`, `μq = r`, the weight-exponent identity and the
/// interpolation bookkeeping on random admissible tuples.
pub fn exponent_identities(rng: &mut ChaCha8Rng, samples: usize) -> SuiteOutcome {
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let (params, r) = random_admissible(rng);
        let Ok(sharp) = sharp_exponents(&params, r) else {
            failures += 1;
            continue;
        };
        let mut errors = vec![rel(sharp.q, params.dim() / (sharp.gamma_example + 1.0)), rel(sharp.mu * sharp.q, r)];
        let mut ok = sharp.q > params.p;
        let a = params.alpha() + rng.gen_range(0.0..1.0) * (1.0 / (params.p - 1.0) - params.alpha());
        let fw = fw_exponent_identity(&params, a);
        errors.push((fw.lhs - fw.rhs).abs() / fw.lhs.abs().max(fw.rhs.abs()).max(1.0));
        if let Ok((lo, hi)) = a_tilde_window(&params, &sharp) {
            let a = lo + (hi - lo) * rng.gen_range(0.05..0.95);
            match interpolation_exponents(&params, &sharp, a) {
                Ok(ie) => {
                    for check in [ie.total_power, ie.holder_first, ie.holder_second] {
                        errors.push((check.lhs - check.rhs).abs() / check.lhs.abs().max(check.rhs.abs()).max(1.0));
                    }
                    ok &= ie.theta_holder > 0.0 && ie.theta_holder < 1.0;
                }
                Err(_) => ok = false,
            }
        }
        let e = errors.into_iter().fold(0.0, f64::max);
        worst = worst.max(e);
        if !ok || e > EXPONENT_TOL {
            failures += 1;
        }
    }
    outcome("exponent_identities", samples, failures, worst, EXPONENT_TOL)
}

/// Ratio `lhs / rhs` of a check, the quantity reported as `worst` by the sweeps.
fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        lhs / rhs
    } else if lhs > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

pub fn superlevel_sweep(rng: &mut ChaCha8Rng, samples: usize) -> SuiteOutcome {
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let dim = rng.gen_range(1..=3);
        let gamma = rng.gen_range(1.0..4.0);
        let alpha = gamma + rng.gen_range(0.0..3.0);
        let k = rng.gen_range(0.01..5.0);
        let mut a: Vec<f64> = (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        if na < k {
            let scale = k / na.max(1e-12) * rng.gen_range(1.0..3.0);
            a.iter_mut().for_each(|x| *x *= scale);
        }
        let b: Vec<f64> = (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect();
        match elementary_superlevel_inequality(gamma, alpha, k, &a, &b) {
            Ok(check) => {
                worst = worst.max(ratio(check.lhs, check.rhs));
                failures += usize::from(!check.holds);
            }
            Err(_) => failures += 1,
        }
    }
    outcome("superlevel_inequality", samples, failures, worst, 1.0)
}

pub fn minkowski_sweep(rng: &mut ChaCha8Rng, samples: usize) -> SuiteOutcome {
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let rows = rng.gen_range(1..=6);
        let len = rng.gen_range(1..=8);
        let p = rng.gen_range(1.0..4.0);
        let data: Vec<Vec<f64>> = (0..rows).map(|_| (0..len).map(|_| rng.gen_range(-100.0..100.0)).collect()).collect();
        match minkowski_sum_inequality(&data, p) {
            Ok(check) => {
                worst = worst.max(ratio(check.lhs, check.rhs));
                failures += usize::from(!check.holds);
            }
            Err(_) => failures += 1,
        }
    }
    outcome("minkowski_sum", samples, failures, worst, 1.0)
}

pub const INTERPOLATION_SLACK: f64 = 1e-10;

/// Interpolation with constant one for random admissible exponents on random
/// weighted grid functions.
pub fn interpolation_sweep(rng: &mut ChaCha8Rng, samples: usize) -> SuiteOutcome {
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < samples {
        let (params, r) = random_admissible(rng);
        let Ok(sharp) = sharp_exponents(&params, r) else { continue };
        let Ok((lo, hi)) = a_tilde_window(&params, &sharp) else { continue };
        let a = lo + (hi - lo) * rng.gen_range(0.05..0.95);
        let Ok(ie) = interpolation_exponents(&params, &sharp, a) else { continue };
        let len = rng.gen_range(1..=16);
        let values: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0) * 10f64.powf(rng.gen_range(-3.0..3.0))).collect();
        let weights: Vec<f64> = (0..len).map(|_| rng.gen_range(0.01..1.0)).collect();
        let check = interpolation_inequality(
            &values,
            &weights,
            a * params.p,
            ie.inner_exponent,
            sharp.mu,
            sharp.mu * sharp.q,
            ie.tail_power,
            params.p,
            INTERPOLATION_SLACK,
        );
        worst = worst.max(ratio(check.lhs, check.rhs));
        failures += usize::from(!check.holds);
        done += 1;
    }
    outcome("interpolation_inequality", samples, failures, worst, 1.0 + INTERPOLATION_SLACK)
}

/// Bound on the far piece of the tail decomposition,
/// `r^{sp}∫_{ℝ∖B_R}|w|^{p−1}|x−y_o|^{−1−sp} ≤ (1+d/r)^{1+sp}(r/R)^{sp}R^{sp}∫_{ℝ∖B_R}|w|^{p−1}|x−x_o|^{−1−sp}`,
/// on random discrete exterior measures, followed by the full decomposition on
/// a few random grid functions.
pub fn tail_term_sweep(rng: &mut ChaCha8Rng, samples: usize) -> SuiteOutcome {
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let p = rng.gen_range(1.05..4.0);
        let s = rng.gen_range(0.05..0.95);
        let sp = s * p;
        let big_r = rng.gen_range(0.2..2.0);
        let r = big_r * rng.gen_range(0.02..0.98);
        let d = (big_r - r) * rng.gen_range(0.0..1.0);
        let y_o = if rng.gen_bool(0.5) { d } else { -d };
        let mut near = 0.0;
        let mut far = 0.0;
        for _ in 0..rng.gen_range(1..=16) {
            let dist = big_r * (1.0 + rng.gen_range(0.0f64..3.0).exp_m1());
            let x = if rng.gen_bool(0.5) { dist } else { -dist };
            let w = rng.gen_range(0.0..1.0) * rng.gen_range(-5.0f64..5.0).abs().powf(p - 1.0);
            near += w * (x - y_o).abs().powf(-1.0 - sp);
            far += w * x.abs().powf(-1.0 - sp);
        }
        let inv = 1.0 / (p - 1.0);
        let term = (r.powf(sp) * near).powf(inv);
        let bound = (1.0 + d / r).powf(inv + sp * inv) * (r / big_r).powf(sp * inv) * (big_r.powf(sp) * far).powf(inv);
        worst = worst.max(ratio(term, bound));
        failures += usize::from(term > bound * (1.0 + 1e-12));
    }
    let full = (samples / 10_000).clamp(1, 10);
    for _ in 0..full {
        let p = rng.gen_range(1.5..3.0);
        let s = rng.gen_range(0.6..0.95);
        let (c1, c2) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let mesh = Mesh::new(-2.0, 2.0, 161).expect("fixed mesh");
        let u = GridFunction::from_fn(mesh, |x| c1 * x + c2 * (3.0 * x).sin(), Exterior::AnalyticClosure(AnalyticClosure::affine(c1, 0.0)))
            .expect("finite values");
        let inner = Ball::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.1..0.5)).expect("positive radius");
        let result = tail_decomposition(&u, &inner, &Ball::new(0.0, 1.0).expect("unit ball"), p, s);
        match result {
            Ok(rep) => {
                worst = worst.max(ratio(rep.decomposition.first, rep.bound_i));
                failures += usize::from(!rep.first_term_bounded());
            }
            Err(_) => failures += 1,
        }
    }
    outcome("tail_term_i_bound", samples + full, failures, worst, 1.0)
}

/// Cover property on `sample_count` random points for `n = 1, 2, 3`.
pub fn cover_property(rng: &mut ChaCha8Rng, sample_count: usize) -> SuiteOutcome {
    let mut failures = 0;
    let mut samples_used = 0;
    for (center, radius, small) in [(vec![0.0], 1.0, 0.1), (vec![0.3, -0.2], 1.0, 0.2), (vec![0.0, 0.0, 0.0], 1.0, 0.3)] {
        let dim = center.len();
        let Ok(c) = cover(&center, radius, small) else {
            failures += 1;
            continue;
        };
        let mut points: Vec<Vec<f64>> = Vec::with_capacity(sample_count);
        while points.len() < sample_count {
            let z: Vec<f64> = center.iter().map(|c| c + rng.gen_range(-radius..radius)).collect();
            let dist = z.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            if dist < radius {
                points.push(z);
            }
        }
        if dim == 1 {
            points.push(vec![center[0] - radius * (1.0 - 1e-12)]);
            points.push(vec![center[0] + radius * (1.0 - 1e-12)]);
        }
        samples_used += points.len();
        failures += c.uncovered(&points).len();
    }
    outcome("cover_property", samples_used, failures, failures as f64, 0.0)
}

/// Overlap of `{B_{2^k r}(z_i)}` for `n = 1`, `k ≤ 5`, against `8·2^k`; `worst`
/// is the fitted constant `max_k overlap_k/2^k`.
pub fn cover_overlap() -> SuiteOutcome {
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    let mut levels = 0;
    for small in [0.05, 0.1, 0.2] {
        match cover(&[0.0], 1.0, small) {
            Ok(c) => {
                let profile = c.overlap_profile(5, 4001);
                for &(k, count) in &profile.levels {
                    levels += 1;
                    failures += usize::from(count as f64 > 8.0 * 2f64.powi(k as i32));
                }
                worst = worst.max(profile.overlap_constant);
            }
            Err(_) => failures += 1,
        }
    }
    outcome("cover_overlap", levels, failures, worst, 8.0)
}

fn fixture(suite: &str, error: f64, tolerance: f64) -> SuiteOutcome {
    outcome(suite, 1, usize::from(!(error <= tolerance)), error, tolerance)
}

fn error_or_inf<T>(r: Result<T, NonlocalError>, f: impl FnOnce(T) -> f64) -> f64 {
    r.map(f).unwrap_or(f64::INFINITY)
}

/// `[x]²_{W^{1/2,2}((−1,1))} = 4` and `[c] = 0`.
pub fn gagliardo_fixtures() -> Vec<SuiteOutcome> {
    let mesh = Mesh::new(-1.0, 1.0, 201).expect("fixed mesh");
    let unit = Ball::new(0.0, 1.0).expect("unit ball");
    let x = GridFunction::from_closure(mesh.clone(), AnalyticClosure::affine(1.0, 0.0));
    let c = GridFunction::from_closure(mesh, AnalyticClosure::constant(2.5));
    vec![
        fixture("gagliardo_identity", error_or_inf(gagliardo_seminorm(&x, &unit, 0.5, 2.0), |r| rel(r.power, 4.0)), 1e-4),
        fixture("gagliardo_constant", error_or_inf(gagliardo_seminorm(&c, &unit, 0.5, 2.0), |r| r.power.abs()), 1e-12),
    ]
}

pub const TAIL_FIXTURE_TOL: f64 = 1e-6;

/// `Tail(c) = |c|(2/(sp))^{1/(p−1)}`, `Tail(x; B_R) = (2/(sp−p+1))^{1/(p−1)}R`
/// and `λ_o = √17` for `u = x`, `f = 0`, `p = 2`, `s = 3/4`, `R = 1`.
pub fn tail_fixtures(configs: &[(f64, f64)]) -> Vec<SuiteOutcome> {
    let mut out = Vec::new();
    let mesh = Mesh::new(-1.0, 1.0, 81).expect("fixed mesh");
    let mut worst_constant: f64 = 0.0;
    let mut worst_identity: f64 = 0.0;
    for &(p, s) in configs {
        let sp = s * p;
        let inv = 1.0 / (p - 1.0);
        for (value, radius) in [(1.0, 0.5), (-2.5, 1.0)] {
            let u = GridFunction::from_closure(mesh.clone(), AnalyticClosure::constant(value));
            let expected = value.abs() * (2.0 / sp).powf(inv);
            let e = error_or_inf(tail(&u, &Ball::new(0.0, radius).expect("positive radius"), p, s), |t| rel(t, expected));
            worst_constant = worst_constant.max(e);
        }
        if sp > p - 1.0 {
            let x = GridFunction::from_closure(mesh.clone(), AnalyticClosure::affine(1.0, 0.0));
            for radius in [0.5, 1.0, 2.0] {
                let expected = (2.0 / (sp - p + 1.0)).powf(inv) * radius;
                let e = error_or_inf(tail(&x, &Ball::new(0.0, radius).expect("positive radius"), p, s), |t| rel(t, expected));
                worst_identity = worst_identity.max(e);
            }
        }
    }
    out.push(outcome("tail_of_constant", configs.len() * 2, usize::from(!(worst_constant <= TAIL_FIXTURE_TOL)), worst_constant, TAIL_FIXTURE_TOL));
    out.push(outcome("tail_of_identity", configs.len() * 3, usize::from(!(worst_identity <= TAIL_FIXTURE_TOL)), worst_identity, TAIL_FIXTURE_TOL));
    out.push(fixture("lambda_o_identity", lambda_fixture_error(), TAIL_FIXTURE_TOL));
    out
}

/// Relative error of `λ_o` against `√17` for the affine fixture.
pub fn lambda_fixture_error() -> f64 {
    let mesh = Mesh::new(-1.0, 1.0, 201).expect("fixed mesh");
    let u = GridFunction::from_closure(mesh.clone(), AnalyticClosure::affine(1.0, 0.0));
    let f = GridFunction::from_closure(mesh, AnalyticClosure::constant(0.0));
    let ball = Ball::new(0.0, 1.0).expect("unit ball");
    error_or_inf(lambda_o(&u, &f, &ball, &LevelInputs::new(2.0, 0.75, 1.0, 1.0, 1.0)), |d| rel(d.lambda_o, 17f64.sqrt()))
}

/// `ys = xs²` gives slope 2 exactly; seeded 1% noise on `xs^{1.5}` stays within `0.05`.
pub fn fit_fixtures(rng: &mut ChaCha8Rng) -> Vec<SuiteOutcome> {
    let xs: Vec<f64> = (1..=8).map(|k| 0.1 * k as f64).collect();
    let squares: Vec<f64> = xs.iter().map(|x| x * x).collect();
    let exact = fit_slope(&xs, &squares).map(|(m, _)| (m - 2.0).abs()).unwrap_or(f64::INFINITY);
    let noisy: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(1.5) * (1.0 + 0.01 * rng.gen_range(-1.0..1.0))).collect();
    let band = fit_slope(&xs, &noisy).map(|(m, _)| (m - 1.5).abs()).unwrap_or(f64::INFINITY);
    vec![fixture("fit_exact_power", exact, 1e-12), fixture("fit_noisy_power", band, 0.05)]
}

/// `τ²_h` annihilates affine functions and gives slope `2p` on `x²`.
pub fn second_difference_fixtures() -> Vec<SuiteOutcome> {
    let mesh = Mesh::new(-2.0, 2.0, 257).expect("fixed mesh");
    let ball = Ball::new(0.0, 1.0).expect("unit ball");
    let steps = [1.0 / 64.0, 1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0];
    let p = 1.5;
    let affine = GridFunction::from_closure(mesh.clone(), AnalyticClosure::affine(0.75, -0.25));
    let square = GridFunction::from_fn(mesh, |x| x * x, Exterior::AnalyticClosure(AnalyticClosure::power(1.0, 2.0))).expect("finite values");
    let affine_err = error_or_inf(second_difference_scaling(&affine, &ball, &steps, p), |f| f.integrals.iter().fold(0.0, |m, v| m.max(v.abs())));
    let square_err = error_or_inf(second_difference_scaling(&square, &ball, &steps, p), |f| f.slope.map_or(f64::INFINITY, |m| (m - 2.0 * p).abs()));
    vec![fixture("second_difference_affine", affine_err, 0.0), fixture("second_difference_square", square_err, 1e-9)]
}
