//! Numerical laboratory for the fractional (s,p)-Poisson equation
//! `(−aΔ_p)^s u = f`.

pub mod lab;
pub mod nonlocal;
pub mod oracle;
pub mod params;
pub mod quad;
pub mod solver;
