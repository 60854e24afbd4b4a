//! Exponent calculus for the fractional (s,p)-Poisson problem.
//!
//! Everything here is a pure function of the tuple `(n, p, s)` plus the
//! auxiliary parameters `r`, `ã` and `χ`. Other modules query these values
//! instead of recomputing them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative margin applied at the endpoints of open parameter intervals.
pub const OPEN_MARGIN: f64 = 1e-9;

/// Absolute tolerance used by the identity checks in this module.
pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamsError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid regime: s*p' = {sp_conj} must exceed 1")]
    InvalidRegime { sp_conj: f64 },
    #[error("r = {r} outside the admissible interval ({r_min}, {r_max})")]
    OutOfRange { r: f64, r_min: f64, r_max: f64 },
    #[error("r = {r} sits on the pole of q at r_max = {r_max}")]
    Pole { r: f64, r_max: f64 },
    #[error("a_tilde = {a_tilde} outside [{lo}, {hi}]")]
    AuxiliaryOutOfRange { a_tilde: f64, lo: f64, hi: f64 },
    #[error("chi = {chi} must lie in (0,1)")]
    InvalidChi { chi: f64 },
    #[error("empty window for a_tilde: ({lo}, {hi})")]
    EmptyWindow { lo: f64, hi: f64 },
    #[error("a_tilde = {a_tilde} outside the window ({lo}, {hi})")]
    OutsideWindow { a_tilde: f64, lo: f64, hi: f64 },
}

/// Which candidate realises the maximum defining `α`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlphaBranch {
    /// `s ≤ s_o`: `α = n/((p−1)[n+p(sp′−1)])`.
    SubThreshold,
    /// `s > s_o`: `α = 1/p`.
    SuperThreshold,
}

/// Validated `(n, p, s)` with `sp′ > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub n: usize,
    pub p: f64,
    pub s: f64,
}

impl ProblemParams {
    pub fn new(n: usize, p: f64, s: f64) -> Result<Self, ParamsError> {
        if n == 0 {
            return Err(ParamsError::InvalidInput("dimension must be at least 1".into()));
        }
        if !(p.is_finite() && p > 1.0) {
            return Err(ParamsError::InvalidInput(format!("p = {p} must exceed 1")));
        }
        if !(s.is_finite() && s > 0.0 && s < 1.0) {
            return Err(ParamsError::InvalidInput(format!("s = {s} must lie in (0,1)")));
        }
        let sp_conj = s * p / (p - 1.0);
        if sp_conj <= 1.0 {
            return Err(ParamsError::InvalidRegime { sp_conj });
        }
        Ok(Self { n, p, s })
    }

    pub fn dim(&self) -> f64 {
        self.n as f64
    }

    /// Hölder conjugate `p′ = p/(p−1)`.
    pub fn p_conj(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    pub fn sp(&self) -> f64 {
        self.s * self.p
    }

    pub fn sp_conj(&self) -> f64 {
        self.s * self.p_conj()
    }

    /// Fractional Sobolev exponent `np/(n−sp)`, infinite when `sp ≥ n`.
    pub fn sobolev_exponent(&self) -> f64 {
        let n = self.dim();
        if self.sp() < n {
            n * self.p / (n - self.sp())
        } else {
            f64::INFINITY
        }
    }

    /// Conjugate of the Sobolev exponent; equals 1 when `sp ≥ n`.
    pub fn sobolev_conj(&self) -> f64 {
        let n = self.dim();
        if self.sp() < n {
            n * self.p / (n * self.p - n + self.sp())
        } else {
            1.0
        }
    }

    /// Threshold `s_o = (1/p′)[1 + n/(p(p−1))]`.
    pub fn s_o(&self) -> f64 {
        let p = self.p;
        (1.0 + self.dim() / (p * (p - 1.0))) / self.p_conj()
    }

    fn alpha_first_candidate(&self) -> f64 {
        let n = self.dim();
        n / ((self.p - 1.0) * (n + self.p * (self.sp_conj() - 1.0)))
    }

    pub fn alpha_branch(&self) -> AlphaBranch {
        if self.alpha_first_candidate() >= 1.0 / self.p {
            AlphaBranch::SubThreshold
        } else {
            AlphaBranch::SuperThreshold
        }
    }

    /// `α = max{n/((p−1)[n+p(sp′−1)]), 1/p}`.
    pub fn alpha(&self) -> f64 {
        self.alpha_first_candidate().max(1.0 / self.p)
    }

    pub fn r_min(&self) -> f64 {
        (self.alpha() * self.p).max(1.0)
    }

    pub fn r_max(&self) -> f64 {
        self.dim() / ((self.p - 1.0) * (self.sp_conj() - 1.0))
    }

    /// `q(r)` without range checks; infinite at and beyond the pole.
    pub fn q_of_r(&self, r: f64) -> f64 {
        let n = self.dim();
        let denom = n - r * (self.p - 1.0) * (self.sp_conj() - 1.0);
        if denom <= 0.0 {
            f64::INFINITY
        } else {
            r * n * (self.p - 1.0) / denom
        }
    }

    /// `ε(ã) = sp′ − 1 − (n/p)[1/(ã(p−1)) − 1]`.
    pub fn epsilon(&self, a_tilde: f64) -> f64 {
        self.sp_conj() - 1.0 - (self.dim() / self.p) * (1.0 / (a_tilde * (self.p - 1.0)) - 1.0)
    }

    /// Second-difference exponent: `p + sp/2` for `p < 2`, `sp + 2` otherwise.
    pub fn theta(&self) -> f64 {
        if self.p < 2.0 {
            self.p + 0.5 * self.sp()
        } else {
            self.sp() + 2.0
        }
    }

    /// Exponent of the comparison radius: `(p−1)/χ·[1 + (2−p)₊p′/(p−1)]`.
    pub fn comparison_radius_exponent(&self, chi: f64) -> f64 {
        let p = self.p;
        (p - 1.0) / chi * (1.0 + (2.0 - p).max(0.0) * self.p_conj() / (p - 1.0))
    }
}

/// Exponents that depend only on `(n, p, s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseExponents {
    pub p_conj: f64,
    pub sp: f64,
    pub sp_conj: f64,
    pub sobolev: f64,
    pub sobolev_conj: f64,
    pub s_o: f64,
    pub alpha: f64,
    pub branch: AlphaBranch,
    pub r_min: f64,
    pub r_max: f64,
}

/// Exponents attached to a specific integrability exponent `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedExponents {
    pub alpha: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub r: f64,
    pub q: f64,
    pub mu: f64,
    pub gamma_example: f64,
}

pub fn derive(n: usize, p: f64, s: f64) -> Result<(ProblemParams, BaseExponents), ParamsError> {
    let params = ProblemParams::new(n, p, s)?;
    let base = BaseExponents {
        p_conj: params.p_conj(),
        sp: params.sp(),
        sp_conj: params.sp_conj(),
        sobolev: params.sobolev_exponent(),
        sobolev_conj: params.sobolev_conj(),
        s_o: params.s_o(),
        alpha: params.alpha(),
        branch: params.alpha_branch(),
        r_min: params.r_min(),
        r_max: params.r_max(),
    };
    Ok((params, base))
}

pub fn sharp_exponents(params: &ProblemParams, r: f64) -> Result<DerivedExponents, ParamsError> {
    let r_min = params.r_min();
    let r_max = params.r_max();
    if !r.is_finite() {
        return Err(ParamsError::OutOfRange { r, r_min, r_max });
    }
    if (r - r_max).abs() <= OPEN_MARGIN * r_max {
        return Err(ParamsError::Pole { r, r_max });
    }
    if r <= r_min * (1.0 + OPEN_MARGIN) || r >= r_max * (1.0 - OPEN_MARGIN) {
        return Err(ParamsError::OutOfRange { r, r_min, r_max });
    }
    let q = params.q_of_r(r);
    let gamma = params.dim() / (r * (params.p - 1.0)) - params.sp_conj();
    Ok(DerivedExponents {
        alpha: params.alpha(),
        r_min,
        r_max,
        r,
        q,
        mu: r / q,
        gamma_example: gamma,
    })
}

/// Iteration exponents for one choice of `ε̄`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationExponents {
    pub eps_bar: f64,
    pub beta: f64,
    pub gamma_o: f64,
    pub h_o: f64,
    pub sigma_seq: Vec<f64>,
    pub theta_seq: Vec<f64>,
}

impl IterationExponents {
    fn build(params: &ProblemParams, eps_bar: f64, len: usize) -> Self {
        let p = params.p;
        let sp = params.sp();
        let theta = params.theta();
        let gap = theta - sp;
        let denom = gap + eps_bar * p;
        let beta = gap / denom;
        let gamma_o = eps_bar * (theta - p) / denom;
        let h_o = (1.0f64 / 16.0).powf(1.0 / beta).min((1.0f64 / 7.0).powf(1.0 / (1.0 - beta)));
        let ratio = gap / (gap + eps_bar);
        let sigma_seq: Vec<f64> = (0..len)
            .map(|i| 1.0 - (1.0 - params.s) * ratio.powi(i as i32))
            .collect();
        let theta_seq = sigma_seq
            .iter()
            .map(|sig| (sig * gap + eps_bar * theta) / denom)
            .collect();
        Self { eps_bar, beta, gamma_o, h_o, sigma_seq, theta_seq }
    }

    /// Limit of the `θ_j` sequence.
    pub fn theta_limit(&self) -> f64 {
        1.0 + self.gamma_o
    }
}

/// Whether the `θ_j` sequence approaches its limit from below or above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Approach {
    FromBelow,
    FromAbove,
    Stationary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HigherDiffBudget {
    pub a_tilde: f64,
    pub epsilon: f64,
    pub eps_bar_const: f64,
    pub eps_bar_var: Option<f64>,
    pub theta: f64,
    pub usable: bool,
    /// Exponents built from `ε̄_const`.
    pub constant: IterationExponents,
    /// Exponents built from `ε̄_var`, present when `χ` was supplied.
    pub variable: Option<IterationExponents>,
}

impl HigherDiffBudget {
    pub fn beta(&self) -> f64 {
        self.constant.beta
    }

    pub fn gamma_o(&self) -> f64 {
        self.constant.gamma_o
    }

    pub fn h_o(&self) -> f64 {
        self.constant.h_o
    }

    pub fn sigma(&self, i: usize) -> f64 {
        self.constant.sigma_seq[i]
    }

    pub fn theta_approach(&self) -> Approach {
        let lim = self.constant.theta_limit();
        match self.constant.theta_seq.first() {
            Some(t) if *t < lim => Approach::FromBelow,
            Some(t) if *t > lim => Approach::FromAbove,
            _ => Approach::Stationary,
        }
    }
}

/// Number of sequence terms stored in a budget.
pub const SEQUENCE_LEN: usize = 24;

pub fn budget(
    params: &ProblemParams,
    a_tilde: f64,
    chi: Option<f64>,
) -> Result<HigherDiffBudget, ParamsError> {
    let lo = params.alpha();
    let hi = 1.0 / (params.p - 1.0);
    if !(a_tilde.is_finite() && a_tilde >= lo - IDENTITY_TOL && a_tilde <= hi + IDENTITY_TOL) {
        return Err(ParamsError::AuxiliaryOutOfRange { a_tilde, lo, hi });
    }
    if let Some(c) = chi {
        if !(c > 0.0 && c < 1.0) {
            return Err(ParamsError::InvalidChi { chi: c });
        }
    }
    let p = params.p;
    let mut epsilon = params.epsilon(a_tilde);
    if epsilon.abs() < IDENTITY_TOL {
        epsilon = 0.0;
    }
    let eps_bar_const = epsilon * (p - 1.0).min(1.0);
    let eps_bar_var = chi.map(|c| (p - 1.0).powi(2).min(1.0) * epsilon.min(c / (p - 1.0)));
    Ok(HigherDiffBudget {
        a_tilde,
        epsilon,
        eps_bar_const,
        eps_bar_var,
        theta: params.theta(),
        usable: epsilon > 0.0,
        constant: IterationExponents::build(params, eps_bar_const, SEQUENCE_LEN),
        variable: eps_bar_var.map(|e| IterationExponents::build(params, e, SEQUENCE_LEN)),
    })
}

/// Open window for `ã` given the sharp exponents at `r`.
pub fn a_tilde_window(params: &ProblemParams, sharp: &DerivedExponents) -> Result<(f64, f64), ParamsError> {
    let lo = params.alpha();
    let n = params.dim();
    let p = params.p;
    let hi = (1.0 / (p - 1.0))
        .min(n / (p * (p - 1.0) * (params.sp_conj() - 1.0)))
        .min(sharp.mu * sharp.q / p);
    if hi <= lo * (1.0 + OPEN_MARGIN) {
        return Err(ParamsError::EmptyWindow { lo, hi });
    }
    Ok((lo, hi))
}

/// Budget together with validation of the window attached to `r`.
pub fn budget_for_r(
    params: &ProblemParams,
    sharp: &DerivedExponents,
    a_tilde: f64,
    chi: Option<f64>,
) -> Result<HigherDiffBudget, ParamsError> {
    let (lo, hi) = a_tilde_window(params, sharp)?;
    if a_tilde <= lo * (1.0 + OPEN_MARGIN) || a_tilde >= hi * (1.0 - OPEN_MARGIN) {
        return Err(ParamsError::OutsideWindow { a_tilde, lo, hi });
    }
    budget(params, a_tilde, chi)
}

/// Midpoint of the window; a convenient default for `ã`.
pub fn default_a_tilde(params: &ProblemParams, sharp: &DerivedExponents) -> Result<f64, ParamsError> {
    let (lo, hi) = a_tilde_window(params, sharp)?;
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl IdentityCheck {
    fn new(lhs: f64, rhs: f64, tol: f64) -> Self {
        Self { lhs, rhs, holds: (lhs - rhs).abs() <= tol * lhs.abs().max(rhs.abs()).max(1.0) }
    }
}

/// `n − n/p + s − n/(ãp) = (1−s+ε)(p−1)`.
pub fn fw_exponent_identity(params: &ProblemParams, a_tilde: f64) -> IdentityCheck {
    let n = params.dim();
    let p = params.p;
    let s = params.s;
    let lhs = n - n / p + s - n / (a_tilde * p);
    let rhs = (1.0 - s + params.epsilon(a_tilde)) * (p - 1.0);
    IdentityCheck::new(lhs, rhs, IDENTITY_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpolationExponents {
    pub a_tilde: f64,
    pub epsilon: f64,
    pub inner_exponent: f64,
    pub tail_power: f64,
    pub theta_holder: f64,
    pub total_power: IdentityCheck,
    pub holder_first: IdentityCheck,
    pub holder_second: IdentityCheck,
}

impl InterpolationExponents {
    pub fn all_hold(&self) -> bool {
        self.total_power.holds
            && self.holder_first.holds
            && self.holder_second.holds
            && self.theta_holder > 0.0
            && self.theta_holder < 1.0
    }
}

pub fn interpolation_exponents(
    params: &ProblemParams,
    sharp: &DerivedExponents,
    a_tilde: f64,
) -> Result<InterpolationExponents, ParamsError> {
    let (lo, hi) = a_tilde_window(params, sharp)?;
    if a_tilde <= lo || a_tilde >= hi {
        return Err(ParamsError::OutsideWindow { a_tilde, lo, hi });
    }
    let n = params.dim();
    let p = params.p;
    let mu = sharp.mu;
    let q = sharp.q;
    let eps = params.epsilon(a_tilde);
    let inner = n * mu * p / (n - eps * p);
    let tail_power = mu * q * (params.sp_conj() - 1.0) / n;
    let th = a_tilde * p * (p - 1.0) * (params.sp_conj() - 1.0) / n;
    Ok(InterpolationExponents {
        a_tilde,
        epsilon: eps,
        inner_exponent: inner,
        tail_power,
        theta_holder: th,
        total_power: IdentityCheck::new(mu + tail_power, 1.0 / (p - 1.0), IDENTITY_TOL),
        holder_first: IdentityCheck::new((1.0 - th) / (a_tilde * (p - 1.0)), 1.0 - eps * p / n, IDENTITY_TOL),
        holder_second: IdentityCheck::new((a_tilde * p - th * mu * q) / (1.0 - th), inner, IDENTITY_TOL),
    })
}
