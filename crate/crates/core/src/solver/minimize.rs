//! Minimisation of the discrete energy.
//!
//! Every step solves `H d = −∇J` for a positive definite model Hessian and
//! backtracks on the unsmoothed energy with the Armijo rule, so recorded
//! energies never increase. For `p = 2` the first step is the exact linear
//! solve. For `p > 2` the curvature `(p−1)|t|^{p−2}` is regularised by `ε`,
//! which starts at a tenth of the data scale and is divided by ten after each
//! full step, down to `1e−8` of the data scale. For `p < 2` pairs with small
//! differences use the secant curvature `|t|^{p−2}` of the quadratic majorant,
//! which stops sign flips of nearly equal values.
//!
//! For `p < 2` the gradient is only `(p−1)`-Hölder at coinciding values, so
//! rounding sets a floor on the attainable residual; runs that stop making
//! progress are reported as ill-conditioned.

use nalgebra::{DVector, Dyn};
use serde::{Deserialize, Serialize};

use super::{DiscreteProblem, SolverError};
use crate::nonlocal::GridFunction;

/// Curvature floor for `p < 2`, relative to the data scale.
const SINGULAR_FLOOR: f64 = 1e-14;
/// Differences below this fraction of the data scale use the secant curvature.
const SECANT_THRESHOLD: f64 = 1e-6;
/// Iterations without a 10% residual reduction before giving up.
const STAGNATION_WINDOW: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// First-order optimality target relative to the initial residual.
    pub tol: f64,
    pub max_iterations: usize,
    pub armijo: f64,
    pub min_step: f64,
}

impl SolveOptions {
    pub fn new(tol: f64) -> Self {
        Self { tol, max_iterations: 200, armijo: 1e-4, min_step: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub energy: f64,
    /// `sup_i |∂J/∂u_i|`.
    pub residual: f64,
    pub step: f64,
    pub regularisation: f64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub u: GridFunction,
    pub free_values: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    /// Initial residual; convergence means `residual ≤ tol·scale`.
    pub scale: f64,
    pub energy_history: Vec<f64>,
    pub log: Vec<IterationRecord>,
    /// Pointwise operator contribution from beyond the truncation radius.
    pub truncation_bound: f64,
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn solve(problem: &DiscreteProblem, tol: f64) -> Result<Solution, SolverError> {
    solve_with(problem, &SolveOptions::new(tol), None)
}

/// Minimise from `start` (default: exterior data at the free nodes).
pub fn solve_with(problem: &DiscreteProblem, opts: &SolveOptions, start: Option<&[f64]>) -> Result<Solution, SolverError> {
    if !(opts.tol > 0.0) {
        return Err(SolverError::InvalidInput(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let mut u = match start {
        Some(s) if s.len() == problem.free_count() => s.to_vec(),
        Some(s) => return Err(SolverError::InvalidInput(format!("start has {} values, need {}", s.len(), problem.free_count()))),
        None => problem.initial_guess(),
    };
    let quadratic = problem.p() == 2.0;
    let data = problem.data_scale();
    let (mut eps, eps_min) = if quadratic {
        (0.0, 0.0)
    } else if problem.p() > 2.0 {
        (0.1 * data, 1e-8 * data)
    } else {
        (SINGULAR_FLOOR * data, SINGULAR_FLOOR * data)
    };
    let secant_below = if problem.p() < 2.0 { SECANT_THRESHOLD * data } else { 0.0 };
    let mut best = f64::INFINITY;
    let mut since_best = 0usize;

    let mut grad = problem.gradient(&u);
    let scale = sup_norm(&grad);
    let mut energy = problem.energy(&u);
    let mut log = vec![IterationRecord { iteration: 0, energy, residual: scale, step: 0.0, regularisation: eps }];
    let finish = |u: Vec<f64>, log: Vec<IterationRecord>, residual: f64| -> Result<Solution, SolverError> {
        Ok(Solution {
            u: problem.to_grid_function(&u)?,
            truncation_bound: problem.truncation_bound(&u),
            iterations: log.len() - 1,
            residual,
            scale,
            energy_history: log.iter().map(|r| r.energy).collect(),
            log,
            free_values: u,
        })
    };
    if scale == 0.0 {
        return finish(u, log, 0.0);
    }
    let target = opts.tol * scale;
    let mut residual = scale;
    for iteration in 1..=opts.max_iterations {
        if residual <= target {
            return finish(u, log, residual);
        }
        let direction = newton_direction(problem, &u, &grad, eps, secant_below);
        let slope = dot(&grad, &direction);
        let mut step = 1.0;
        let mut accepted = None;
        if slope < 0.0 {
            while step >= opts.min_step {
                let trial: Vec<f64> = u.iter().zip(&direction).map(|(a, d)| a + step * d).collect();
                let e = problem.energy(&trial);
                if e <= energy + opts.armijo * step * slope {
                    accepted = Some((trial, e));
                    break;
                }
                step *= 0.5;
            }
        }
        let (trial, e) = match accepted {
            Some(found) => found,
            None if eps > eps_min => {
                eps = (0.1 * eps).max(eps_min);
                continue;
            }
            None => {
                // Energy differences are below rounding; accept the step if it
                // still reduces the optimality residual without raising J.
                let trial: Vec<f64> = u.iter().zip(&direction).map(|(a, d)| a + d).collect();
                let e = problem.energy(&trial);
                let r = sup_norm(&problem.gradient(&trial));
                if r < residual && e <= energy + 1e-13 * energy.abs().max(f64::MIN_POSITIVE) {
                    step = 1.0;
                    (trial, e.min(energy))
                } else {
                    return Err(SolverError::IllConditioned { iteration, residual, target });
                }
            }
        };
        u = trial;
        energy = e;
        grad = problem.gradient(&u);
        residual = sup_norm(&grad);
        if step == 1.0 && eps > eps_min {
            eps = (0.1 * eps).max(eps_min);
        }
        log.push(IterationRecord { iteration, energy, residual, step, regularisation: eps });
        if residual < 0.9 * best {
            best = residual;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= STAGNATION_WINDOW && residual > target {
                return Err(SolverError::IllConditioned { iteration, residual, target });
            }
        }
    }
    if residual <= target {
        return finish(u, log, residual);
    }
    Err(SolverError::NonConvergence { iterations: opts.max_iterations, residual, target })
}

fn newton_direction(problem: &DiscreteProblem, u: &[f64], grad: &[f64], eps: f64, secant_below: f64) -> Vec<f64> {
    let mut hess = problem.hessian(u, eps, secant_below);
    let rhs = -DVector::from_column_slice(grad);
    let trace = hess.trace().abs() / hess.nrows() as f64;
    let mut shift = 0.0;
    for _ in 0..20 {
        if let Some(chol) = nalgebra::Cholesky::<f64, Dyn>::new(hess.clone()) {
            return chol.solve(&rhs).iter().copied().collect();
        }
        let next = if shift == 0.0 { 1e-12 * trace.max(f64::MIN_POSITIVE) } else { 10.0 * shift };
        for i in 0..hess.nrows() {
            hess[(i, i)] += next - shift;
        }
        shift = next;
    }
    rhs.iter().copied().collect()
}
