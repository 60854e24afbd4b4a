#![allow(dead_code)]

use statrs::function::gamma::gamma;

/// `C` for `p = 2`: the classical symbol of `(−Δ)^s` on `|x|^{−β}`,
/// `2^{2s}Γ((n−β)/2)Γ((β+2s)/2)/(Γ(β/2)Γ((n−β−2s)/2))`, divided by
/// `c_{n,s} = 4^sΓ(n/2+s)/(π^{n/2}|Γ(−s)|)`.
pub fn quadratic_constant(n: usize, s: f64, beta: f64) -> f64 {
    let nf = n as f64;
    let symbol = 2f64.powf(2.0 * s) * gamma(0.5 * (nf - beta)) * gamma(0.5 * (beta + 2.0 * s))
        / (gamma(0.5 * beta) * gamma(0.5 * (nf - beta - 2.0 * s)));
    let c_ns = 4f64.powf(s) * gamma(0.5 * nf + s) / (std::f64::consts::PI.powf(0.5 * nf) * gamma(-s).abs());
    symbol / c_ns
}

/// `f` for the linear oracle `u(x) = (1−x²)_+^s` in one dimension, `p = 2`:
/// the classical value `2^{2s}Γ(1+s)Γ(1/2+s)/Γ(1/2)` divided by `c_{1,s}`.
pub fn linear_torsion_rhs(s: f64) -> f64 {
    let classical = 2f64.powf(2.0 * s) * gamma(1.0 + s) * gamma(0.5 + s) / gamma(0.5);
    let c_1s = 4f64.powf(s) * gamma(0.5 + s) / (std::f64::consts::PI.sqrt() * gamma(-s).abs());
    classical / c_1s
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
