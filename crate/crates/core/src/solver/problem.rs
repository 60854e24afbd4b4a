//! Assembly of the discrete energy
//! `J(u) = (1/p)∬ a|u(x)−u(y)|^p|x−y|^{−1−sp} − 2∫ f u`
//! on a uniform mesh of `Ω = (x_lo, x_hi)` with exterior data `g`.
//!
//! Node pairs on a lattice that extends the mesh by its own length on each
//! side use the hat-moment rule of the Gagliardo seminorm. Beyond that band
//! the kernel is integrated with Gauss–Legendre cells out to eight half-widths
//! and a mapped rule `y = T v^{−1/c}` past the truncation radius `T`, where
//! `c = sp − (p−1)·growth(g)` is the decay of the integrand.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::nonlocal::{AnalyticClosure, Exterior, GridFunction, HatMoments, Mesh};
use crate::oracle::signed_power;
use crate::quad::{gauss_legendre, neumaier_sum};

use super::{CoefficientField, SolverError};

/// Truncation radius in units of the domain half-width.
pub const TRUNCATION_FACTOR: f64 = 8.0;
const GEOMETRIC_CELLS: usize = 6;
const CELL_ORDER: usize = 8;
const FAR_ORDER: usize = 16;
const VALIDATION_SAMPLES: usize = 17;

/// Constant right-hand side whose solution on `(−1,1)` with zero exterior data
/// is `(1−x²)_+^s` when `p = 2`: `Γ(1+s)|Γ(−s)|`.
pub fn torsion_rhs(s: f64) -> f64 {
    gamma(1.0 + s) * gamma(-s).abs()
}

#[derive(Debug, Clone)]
pub struct DiscreteProblem {
    mesh: Mesh,
    s: f64,
    p: f64,
    coefficient: CoefficientField,
    f: GridFunction,
    exterior: GridFunction,
    free_x: Vec<f64>,
    f_free: Vec<f64>,
    /// Dense symmetric free–free weights, row-major, zero diagonal.
    pair: Vec<f64>,
    fixed_x: Vec<f64>,
    fixed_g: Vec<f64>,
    /// Free–fixed weights, row-major by free index.
    fixed_w: Vec<f64>,
    far_start: usize,
    truncation_radius: f64,
    tail_decay: f64,
    data_scale: f64,
}

fn gl_on(a: f64, b: f64, order: usize) -> Vec<(f64, f64)> {
    let (gx, gw) = gauss_legendre(order);
    let half = 0.5 * (b - a);
    gx.iter().zip(&gw).map(|(x, w)| (a + half * (1.0 + x), half * w)).collect()
}

/// Build the discrete problem for `mesh` (boundary nodes carry exterior values).
pub fn assemble(
    mesh: &Mesh,
    s: f64,
    p: f64,
    coefficient: &CoefficientField,
    f: &GridFunction,
    exterior_data: &GridFunction,
) -> Result<DiscreteProblem, SolverError> {
    if !(s > 0.0 && s < 1.0 && p > 1.0 && p.is_finite()) {
        return Err(SolverError::InvalidInput(format!("need s in (0,1) and p > 1, got s={s}, p={p}")));
    }
    let cells = mesh.nodes() - 1;
    if cells < 2 {
        return Err(SolverError::InvalidInput("mesh needs at least one interior node".into()));
    }
    let sp = s * p;
    let growth = exterior_data.growth().unwrap_or(0.0).max(0.0);
    let tail_decay = sp - growth * (p - 1.0);
    if !(tail_decay > 0.0) {
        return Err(SolverError::InvalidInput(format!(
            "exterior data grows like |x|^{growth}, too fast for the kernel with sp = {sp}"
        )));
    }
    let h = mesh.spacing();
    let half = 0.5 * (mesh.x_hi() - mesh.x_lo());
    let centre = 0.5 * (mesh.x_hi() + mesh.x_lo());
    let samples: Vec<f64> = (0..VALIDATION_SAMPLES)
        .map(|k| centre - 3.0 * half + 6.0 * half * k as f64 / (VALIDATION_SAMPLES - 1) as f64)
        .collect();
    coefficient.validate(&samples)?;

    let lattice_len = 3 * cells;
    let lattice_x = |l: usize| mesh.x_lo() + (l as f64 - cells as f64) * h;
    let free_lattice: Vec<usize> = (cells + 1..2 * cells).collect();
    let free_x: Vec<f64> = free_lattice.iter().map(|&l| lattice_x(l)).collect();
    let nf = free_x.len();

    let mut fixed_lattice: Vec<usize> = (0..=cells).collect();
    fixed_lattice.extend(2 * cells..=lattice_len);
    let mut fixed_x: Vec<f64> = fixed_lattice.iter().map(|&l| lattice_x(l)).collect();
    let lattice_fixed = fixed_x.len();

    // Exterior cells: (abscissa, weight) with the kernel evaluated per free node.
    let truncation_radius = TRUNCATION_FACTOR * half;
    let mut quad_nodes: Vec<(f64, f64)> = Vec::new();
    let ratio = (TRUNCATION_FACTOR / 3.0).powf(1.0 / GEOMETRIC_CELLS as f64);
    for k in 0..GEOMETRIC_CELLS {
        let a = 3.0 * half * ratio.powi(k as i32);
        let b = 3.0 * half * ratio.powi(k as i32 + 1);
        for (r, w) in gl_on(a, b, CELL_ORDER) {
            quad_nodes.push((centre - r, w));
            quad_nodes.push((centre + r, w));
        }
    }
    let far_start = lattice_fixed + quad_nodes.len();
    for (v, w) in gl_on(0.0, 1.0, FAR_ORDER) {
        let r = truncation_radius * v.powf(-1.0 / tail_decay);
        let jac = truncation_radius / tail_decay * v.powf(-1.0 / tail_decay - 1.0);
        quad_nodes.push((centre - r, w * jac));
        quad_nodes.push((centre + r, w * jac));
    }
    fixed_x.extend(quad_nodes.iter().map(|(x, _)| *x));
    let fixed_g: Vec<f64> = fixed_x.iter().map(|&x| exterior_data.value_at(x)).collect();
    let nfix = fixed_x.len();

    let beta = p - 1.0 - sp;
    let moments = HatMoments::new(beta, lattice_len);
    let scale = h.powf(1.0 - sp);
    let lattice_weight = |li: usize, lj: usize| -> f64 {
        let k = li.abs_diff(lj);
        let reach = if lj < li { li } else { lattice_len - li };
        let m = if k == reach { moments.end[k] } else { moments.full[k] };
        scale * m / (k as f64).powf(p)
    };

    let mut pair = vec![0.0; nf * nf];
    let upper: Vec<Vec<f64>> = (0..nf)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..nf)
                .map(|j| lattice_weight(free_lattice[i], free_lattice[j]) * coefficient.eval(free_x[i], free_x[j]))
                .collect()
        })
        .collect();
    for i in 0..nf {
        for (off, &w) in upper[i].iter().enumerate() {
            let j = i + 1 + off;
            pair[i * nf + j] = w;
            pair[j * nf + i] = w;
        }
    }

    let fixed_rows: Vec<Vec<f64>> = (0..nf)
        .into_par_iter()
        .map(|i| {
            let xi = free_x[i];
            let mut row = Vec::with_capacity(nfix);
            for (m, &l) in fixed_lattice.iter().enumerate() {
                row.push(lattice_weight(free_lattice[i], l) * coefficient.eval(xi, fixed_x[m]));
            }
            for &(y, w) in &quad_nodes {
                row.push(h * w * coefficient.eval(xi, y) * (xi - y).abs().powf(-1.0 - sp));
            }
            row
        })
        .collect();
    let fixed_w: Vec<f64> = fixed_rows.into_iter().flatten().collect();

    let f_free: Vec<f64> = free_x.iter().map(|&x| f.value_at(x)).collect();
    let g_max = fixed_g[..lattice_fixed].iter().fold(0.0f64, |acc, g| acc.max(g.abs()));
    let f_max = f_free.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let f_scale = (f_max * half.powf(sp)).powf(1.0 / (p - 1.0));
    let mut data_scale = g_max.max(f_scale);
    if !(data_scale > 0.0 && data_scale.is_finite()) {
        data_scale = 1.0;
    }

    Ok(DiscreteProblem {
        mesh: mesh.clone(),
        s,
        p,
        coefficient: coefficient.clone(),
        f: f.clone(),
        exterior: exterior_data.clone(),
        free_x,
        f_free,
        pair,
        fixed_x,
        fixed_g,
        fixed_w,
        far_start,
        truncation_radius,
        tail_decay,
        data_scale,
    })
}

impl DiscreteProblem {
    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn coefficient(&self) -> &CoefficientField {
        &self.coefficient
    }

    pub fn rhs(&self) -> &GridFunction {
        &self.f
    }

    pub fn exterior_data(&self) -> &GridFunction {
        &self.exterior
    }

    pub fn free_nodes(&self) -> &[f64] {
        &self.free_x
    }

    pub fn free_count(&self) -> usize {
        self.free_x.len()
    }

    pub fn fixed_count(&self) -> usize {
        self.fixed_x.len()
    }

    pub fn truncation_radius(&self) -> f64 {
        self.truncation_radius
    }

    pub fn tail_decay(&self) -> f64 {
        self.tail_decay
    }

    /// Scale of the data used to size the regularisation of the Hessian.
    pub fn data_scale(&self) -> f64 {
        self.data_scale
    }

    pub fn pair_weight(&self, i: usize, j: usize) -> f64 {
        self.pair[i * self.free_count() + j]
    }

    pub fn fixed_weight(&self, i: usize, m: usize) -> f64 {
        self.fixed_w[i * self.fixed_count() + m]
    }

    /// Exterior data at the free nodes, the default starting point.
    pub fn initial_guess(&self) -> Vec<f64> {
        self.free_x.iter().map(|&x| self.exterior.value_at(x)).collect()
    }

    fn h(&self) -> f64 {
        self.mesh.spacing()
    }

    fn check_len(&self, u: &[f64]) {
        assert_eq!(u.len(), self.free_count(), "free value vector has the wrong length");
    }

    /// Discrete energy; the exterior self-interaction `|g|^p` is subtracted so
    /// that the value stays finite for growing data.
    pub fn energy(&self, u: &[f64]) -> f64 {
        self.check_len(u);
        let nf = self.free_count();
        let nfix = self.fixed_count();
        let p = self.p;
        let rows: Vec<f64> = (0..nf)
            .into_par_iter()
            .map(|i| {
                let ui = u[i];
                let inner = neumaier_sum(((i + 1)..nf).map(|j| 2.0 * self.pair[i * nf + j] * (ui - u[j]).abs().powf(p)));
                let outer = neumaier_sum((0..nfix).map(|m| {
                    let g = self.fixed_g[m];
                    2.0 * self.fixed_w[i * nfix + m] * ((ui - g).abs().powf(p) - g.abs().powf(p))
                }));
                (inner + outer) / p - 2.0 * self.h() * self.f_free[i] * ui
            })
            .collect();
        neumaier_sum(rows)
    }

    /// `∂J/∂u_i`, the residual against the nodal hat test function.
    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        self.check_len(u);
        let nf = self.free_count();
        let nfix = self.fixed_count();
        let p = self.p;
        (0..nf)
            .into_par_iter()
            .map(|i| {
                let ui = u[i];
                let inner = neumaier_sum((0..nf).filter(|&j| j != i).map(|j| self.pair[i * nf + j] * signed_power(ui - u[j], p)));
                let outer =
                    neumaier_sum((0..nfix).map(|m| self.fixed_w[i * nfix + m] * signed_power(ui - self.fixed_g[m], p)));
                2.0 * (inner + outer) - 2.0 * self.h() * self.f_free[i]
            })
            .collect()
    }

    /// Pointwise surrogate `(L u − f)(x_i) = ∂J/∂u_i / (2h)`.
    pub fn pointwise_residual(&self, u: &[f64]) -> Vec<f64> {
        let h2 = 2.0 * self.h();
        self.gradient(u).into_iter().map(|g| g / h2).collect()
    }

    /// Model Hessian with curvature `(p−1)(t²+ε²)^{(p−2)/2}`, or the secant
    /// `(t²+ε²)^{(p−2)/2}` when `p < 2` and `|t| < secant_below`; exact for `p = 2`.
    pub fn hessian(&self, u: &[f64], eps: f64, secant_below: f64) -> DMatrix<f64> {
        self.check_len(u);
        let nf = self.free_count();
        let nfix = self.fixed_count();
        let p = self.p;
        let curvature = |t: f64| -> f64 {
            if p == 2.0 {
                1.0
            } else if p < 2.0 && t.abs() < secant_below {
                (t * t + eps * eps).powf(0.5 * (p - 2.0))
            } else {
                (p - 1.0) * (t * t + eps * eps).powf(0.5 * (p - 2.0))
            }
        };
        let rows: Vec<Vec<f64>> = (0..nf)
            .into_par_iter()
            .map(|i| {
                let ui = u[i];
                let mut row = vec![0.0; nf];
                let mut diag = Vec::with_capacity(nf + nfix);
                for j in 0..nf {
                    if j != i {
                        let c = self.pair[i * nf + j] * curvature(ui - u[j]);
                        row[j] = -2.0 * c;
                        diag.push(c);
                    }
                }
                diag.extend((0..nfix).map(|m| self.fixed_w[i * nfix + m] * curvature(ui - self.fixed_g[m])));
                row[i] = 2.0 * neumaier_sum(diag);
                row
            })
            .collect();
        DMatrix::from_fn(nf, nf, |i, j| rows[i][j])
    }

    /// For `p = 2`: `J(u) = ½uᵀAu − bᵀu + const`.
    pub fn quadratic_system(&self) -> Result<(DMatrix<f64>, DVector<f64>), SolverError> {
        if self.p != 2.0 {
            return Err(SolverError::InvalidInput(format!("quadratic system needs p = 2, got {}", self.p)));
        }
        let zero = vec![0.0; self.free_count()];
        let a = self.hessian(&zero, 0.0, 0.0);
        let b = -DVector::from_vec(self.gradient(&zero));
        Ok((a, b))
    }

    /// `Σ_{i≠j} c_ij|w_i−w_j|^p + 2Σ_{i,m} c_im|w_i|^p`: the discrete
    /// `[w]^p_{W^{s,p}(ℝ)}` of a function vanishing off the free nodes.
    pub fn interaction_power(&self, w: &[f64]) -> f64 {
        self.check_len(w);
        let nf = self.free_count();
        let nfix = self.fixed_count();
        let p = self.p;
        let rows: Vec<f64> = (0..nf)
            .into_par_iter()
            .map(|i| {
                let inner = neumaier_sum(((i + 1)..nf).map(|j| 2.0 * self.pair[i * nf + j] * (w[i] - w[j]).abs().powf(p)));
                let outer: f64 = neumaier_sum((0..nfix).map(|m| self.fixed_w[i * nfix + m]));
                inner + 2.0 * outer * w[i].abs().powf(p)
            })
            .collect();
        neumaier_sum(rows)
    }

    /// Largest pointwise contribution of the exterior beyond the truncation
    /// radius, which plain truncation would drop.
    pub fn truncation_bound(&self, u: &[f64]) -> f64 {
        self.check_len(u);
        let nfix = self.fixed_count();
        let h = self.h();
        (0..self.free_count())
            .map(|i| {
                let far = neumaier_sum(
                    (self.far_start..nfix).map(|m| self.fixed_w[i * nfix + m] * signed_power(u[i] - self.fixed_g[m], self.p)),
                );
                (far / h).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Grid function on the mesh with the exterior data outside it.
    pub fn to_grid_function(&self, u: &[f64]) -> Result<GridFunction, SolverError> {
        self.check_len(u);
        let n = self.mesh.nodes();
        let mut values = Vec::with_capacity(n);
        values.push(self.exterior.value_at(self.mesh.x_lo()));
        values.extend_from_slice(u);
        values.push(self.exterior.value_at(self.mesh.x_hi()));
        let ext = self.exterior.clone();
        let growth = ext.growth().unwrap_or(0.0).max(0.0);
        let closure = AnalyticClosure::new(format!("exterior data on {:?}", (self.mesh.x_lo(), self.mesh.x_hi())), growth, move |x| {
            ext.value_at(x)
        });
        Ok(GridFunction::new(self.mesh.clone(), values, Exterior::AnalyticClosure(closure))?)
    }
}
