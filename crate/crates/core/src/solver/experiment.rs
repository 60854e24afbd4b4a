//! Comparison with the homogeneous replacement on shrinking balls, and the
//! inhomogeneity created by freezing the coefficient.

use serde::{Deserialize, Serialize};

use crate::lab::fit_slope;
use crate::nonlocal::{gagliardo_seminorm, lp_power, Ball, Exterior, GridFunction, Mesh};
use crate::oracle::signed_power;
use crate::params::ProblemParams;
use crate::quad::{integrate_pieces, integrate_to_infinity, Tolerance};

use super::{assemble, solve, CoefficientField, DiscreteProblem, SolverError};

const INHOMOGENEITY_TOL: f64 = 1e-11;

/// `g(x) = 2∫_{ℝ∖B_R} ((a)_R − a(x,y))/(a)_R · J(v(x)−v(y))|x−y|^{−1−sp} dy`
/// on `nodes` equally spaced points of `B_{R/2}(x_o)`.
pub fn induced_inhomogeneity(
    v: &GridFunction,
    coefficient: &CoefficientField,
    center: f64,
    radius: f64,
    s: f64,
    p: f64,
    nodes: usize,
) -> Result<GridFunction, SolverError> {
    let mesh = Mesh::new(center - 0.5 * radius, center + 0.5 * radius, nodes)?;
    let average = coefficient.average(center, radius)?;
    let sp = s * p;
    let growth = v.growth().unwrap_or(0.0).max(0.0);
    let decay = sp - growth * (p - 1.0);
    if !(decay > 0.0) {
        return Err(SolverError::InvalidInput(format!("v grows like |x|^{growth}, too fast for sp = {sp}")));
    }
    let (lo, hi) = (center - radius, center + radius);
    let vm = v.mesh();
    let right_points: Vec<f64> = std::iter::once(hi)
        .chain(vm.coords().into_iter().filter(|&x| x > hi))
        .collect();
    let mut left_points: Vec<f64> = vm.coords().into_iter().filter(|&x| x < lo).collect();
    left_points.push(lo);
    let right_end = *right_points.last().unwrap();
    let left_end = left_points[0];
    let tol = Tolerance::new(INHOMOGENEITY_TOL, INHOMOGENEITY_TOL);
    let values = mesh
        .coords()
        .into_iter()
        .map(|x| -> Result<f64, SolverError> {
            let vx = v.value_at(x);
            let integrand =
                |y: f64| (average - coefficient.eval(x, y)) / average * signed_power(vx - v.value_at(y), p) * (x - y).abs().powf(-1.0 - sp);
            let mut total = integrate_pieces(integrand, &right_points, tol)?.value;
            total += integrate_pieces(integrand, &left_points, tol)?.value;
            total += integrate_to_infinity(integrand, right_end, decay, tol)?.value;
            total += integrate_to_infinity(|t| integrand(-t), -left_end, decay, tol)?.value;
            Ok(2.0 * total)
        })
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(GridFunction::new(mesh, values, Exterior::zero())?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub radius: f64,
    /// `R^{−sp}‖u−v‖^p_{L^p(B_R)}`.
    pub lhs_lp: f64,
    /// `[u−v]^p_{W^{s,p}(ℝ)}`.
    pub lhs_seminorm: f64,
    /// `‖f‖^{p′}_{L^{ãp}(B_R)}`.
    pub f_norm_power: f64,
    /// `R^{(1−s+ε)p}‖f‖^{p′}_{L^{ãp}(B_R)}`.
    pub rhs_f_term: f64,
    /// `R^{χp/(p−1)}[u]^p_{W^{s,p}(B_R)}` for non-constant coefficients.
    pub rhs_chi_term: Option<f64>,
    /// Optimality residual of `v` against the frozen weights, relative to its initial residual.
    pub frozen_residual: f64,
    /// Residual of the same `v` against the unfrozen weights, same normalisation.
    pub unfrozen_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub s: f64,
    pub p: f64,
    pub a_tilde: f64,
    pub epsilon: f64,
    pub chi: Option<f64>,
    /// `(1−s+ε)p`.
    pub target_slope: f64,
    /// Log–log slope of `lhs_lp / ‖f‖^{p′}_{L^{ãp}(B_R)}` against `R`.
    pub fitted_slope: Option<f64>,
    pub fit_r2: Option<f64>,
    /// Log–log slope of `rhs_chi_term`.
    pub chi_slope: Option<f64>,
    pub rows: Vec<ComparisonRow>,
}

/// Resolution and tolerance shared by all solves of one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSetup {
    pub a_tilde: f64,
    pub tol: f64,
}

/// Solve `u` on the base problem, then for every `R` the homogeneous
/// replacement `v` on `B_R` (centre of the base mesh) with frozen coefficient
/// and `v = u` outside, and tabulate both sides of the comparison estimate.
/// Ball meshes use the spacing of the base mesh as closely as the radius allows.
pub fn comparison_experiment(
    base: &DiscreteProblem,
    radii: &[f64],
    setup: &ComparisonSetup,
) -> Result<ComparisonTable, SolverError> {
    let (s, p) = (base.s(), base.p());
    let params = ProblemParams::new(1, p, s).map_err(|e| SolverError::InvalidInput(e.to_string()))?;
    let epsilon = params.epsilon(setup.a_tilde);
    if !(epsilon > 0.0) {
        return Err(SolverError::InvalidInput(format!("ε(ã) = {epsilon} must be positive for ã = {}", setup.a_tilde)));
    }
    let target_slope = (1.0 - s + epsilon) * p;
    let mesh = base.mesh();
    let h = mesh.spacing();
    let centre = 0.5 * (mesh.x_lo() + mesh.x_hi());
    let half = 0.5 * (mesh.x_hi() - mesh.x_lo());
    let coefficient = base.coefficient();
    let variable = !coefficient.is_constant();
    let chi = variable.then_some(coefficient.chi);

    let u = solve(base, setup.tol)?.u;
    let zero = GridFunction::from_fn(mesh.clone(), |_| 0.0, Exterior::zero())?;
    let unit = CoefficientField::constant(1.0)?;
    let p_conj = p / (p - 1.0);

    let mut rows = Vec::with_capacity(radii.len());
    for &radius in radii {
        if !(radius > 0.0 && 2.0 * radius <= half * (1.0 + 1e-12)) {
            return Err(SolverError::InvalidInput(format!("B_2R must fit in the domain, got R = {radius}")));
        }
        let cells = ((2.0 * radius / h).round() as usize).max(2);
        let ball_mesh = Mesh::new(centre - radius, centre + radius, cells + 1)?;
        let frozen = coefficient.freeze(centre, radius)?;
        let local = assemble(&ball_mesh, s, p, &frozen, &zero, &u)?;
        let v = solve(&local, setup.tol)?;
        let u_local = local.initial_guess();
        let w: Vec<f64> = u_local.iter().zip(&v.free_values).map(|(a, b)| a - b).collect();

        let lp: f64 = w.iter().map(|x| x.abs().powf(p)).sum::<f64>() * ball_mesh.spacing();
        let kernel = assemble(&ball_mesh, s, p, &unit, &zero, &zero)?;
        let seminorm = kernel.interaction_power(&w);
        let ball = Ball::new(centre, radius)?;
        let at_p = setup.a_tilde * p;
        let f_norm_power = lp_power(base.rhs(), &ball, at_p)?.powf(p_conj / at_p);
        let rhs_chi_term = if variable {
            let semi = gagliardo_seminorm(&u, &ball, s, p)?.power;
            Some(radius.powf(coefficient.chi * p / (p - 1.0)) * semi)
        } else {
            None
        };
        let relative = |r: f64| if v.scale > 0.0 { r / v.scale } else { 0.0 };
        let frozen_residual = relative(v.residual);
        let unfrozen_residual = if variable {
            let plain = assemble(&ball_mesh, s, p, coefficient, &zero, &u)?;
            let g = plain.gradient(&v.free_values);
            Some(relative(g.iter().fold(0.0, |m, x| m.max(x.abs()))))
        } else {
            None
        };
        rows.push(ComparisonRow {
            radius,
            lhs_lp: radius.powf(-s * p) * lp,
            lhs_seminorm: seminorm,
            f_norm_power,
            rhs_f_term: radius.powf(target_slope) * f_norm_power,
            rhs_chi_term,
            frozen_residual,
            unfrozen_residual,
        });
    }

    let xs: Vec<f64> = rows.iter().map(|r| r.radius).collect();
    let normalised: Vec<f64> = rows.iter().map(|r| r.lhs_lp / r.f_norm_power).collect();
    let fit = fit_slope(&xs, &normalised).ok();
    let chi_slope = if variable {
        let ys: Vec<f64> = rows.iter().filter_map(|r| r.rhs_chi_term).collect();
        fit_slope(&xs, &ys).ok().map(|f| f.0)
    } else {
        None
    };
    Ok(ComparisonTable {
        s,
        p,
        a_tilde: setup.a_tilde,
        epsilon,
        chi,
        target_slope,
        fitted_slope: fit.map(|f| f.0),
        fit_r2: fit.map(|f| f.1),
        chi_slope,
        rows,
    })
}
