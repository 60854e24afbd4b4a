//! Lattice covers of balls by smaller balls and their overlap profile.

use serde::{Deserialize, Serialize};

use super::NonlocalError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cover {
    pub dim: usize,
    pub center: Vec<f64>,
    pub radius: f64,
    pub small_radius: f64,
    pub centers: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapProfile {
    /// `k` with the largest number of balls `B_{2^k r}(z_i)` meeting at one sample point.
    pub levels: Vec<(u32, usize)>,
    /// `max_k overlap_k / 2^{nk}`.
    pub overlap_constant: f64,
    /// `|I| / (R/r)^n`.
    pub count_constant: f64,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Lattice of spacing `r/√n` anchored at the centre, restricted to the closed ball.
pub fn cover(center: &[f64], radius: f64, small_radius: f64) -> Result<Cover, NonlocalError> {
    let dim = center.len();
    if dim == 0 {
        return Err(NonlocalError::InvalidInput("centre must have at least one coordinate".into()));
    }
    if !(small_radius > 0.0 && small_radius < 0.5 * radius) {
        return Err(NonlocalError::PreconditionViolated(format!(
            "need 0 < r < R/2, got r={small_radius}, R={radius}"
        )));
    }
    let spacing = small_radius / (dim as f64).sqrt();
    let reach = (radius / spacing + 1e-9).floor() as i64;
    let mut centers = Vec::new();
    let mut idx = vec![-reach; dim];
    loop {
        let z: Vec<f64> = idx.iter().zip(center).map(|(&k, c)| c + k as f64 * spacing).collect();
        if dist(&z, center) <= radius * (1.0 + 1e-12) {
            centers.push(z);
        }
        let mut d = 0;
        loop {
            if d == dim {
                return Ok(Cover { dim, center: center.to_vec(), radius, small_radius, centers });
            }
            idx[d] += 1;
            if idx[d] <= reach {
                break;
            }
            idx[d] = -reach;
            d += 1;
        }
    }
}

impl Cover {
    /// Sample points of `B_R` not covered by any `B_r(z_i)`.
    pub fn uncovered(&self, samples: &[Vec<f64>]) -> Vec<Vec<f64>> {
        samples
            .iter()
            .filter(|x| dist(x, &self.center) < self.radius)
            .filter(|x| !self.centers.iter().any(|z| dist(x, z) < self.small_radius))
            .cloned()
            .collect()
    }

    /// Largest multiplicity of `{B_{2^k r}(z_i)}` over the sample points.
    pub fn overlap(&self, k: u32, samples: &[Vec<f64>]) -> usize {
        let rk = self.small_radius * 2f64.powi(k as i32);
        samples
            .iter()
            .map(|x| self.centers.iter().filter(|z| dist(x, z) < rk).count())
            .max()
            .unwrap_or(0)
    }

    /// Overlap profile for `k = 0..=k_max` on a regular sample of the enlarged
    /// region (one-dimensional covers also sample every centre and midpoint).
    pub fn overlap_profile(&self, k_max: u32, samples_per_axis: usize) -> OverlapProfile {
        let mut levels = Vec::new();
        let mut constant: f64 = 0.0;
        for k in 0..=k_max {
            let reach = self.radius + self.small_radius * 2f64.powi(k as i32);
            let samples = self.grid_samples(reach, samples_per_axis);
            let count = self.overlap(k, &samples);
            constant = constant.max(count as f64 / 2f64.powi((self.dim as u32 * k) as i32));
            levels.push((k, count));
        }
        let count_constant = self.centers.len() as f64 / (self.radius / self.small_radius).powi(self.dim as i32);
        OverlapProfile { levels, overlap_constant: constant, count_constant }
    }

    /// Regular samples of the cube of half-width `reach` around the centre.
    pub fn grid_samples(&self, reach: f64, per_axis: usize) -> Vec<Vec<f64>> {
        let per_axis = per_axis.max(2);
        let axis: Vec<f64> = (0..per_axis).map(|j| -reach + 2.0 * reach * j as f64 / (per_axis - 1) as f64).collect();
        let mut out = Vec::new();
        let mut idx = vec![0usize; self.dim];
        'outer: loop {
            out.push(idx.iter().zip(&self.center).map(|(&j, c)| c + axis[j]).collect());
            let mut d = 0;
            loop {
                if d == self.dim {
                    break 'outer;
                }
                idx[d] += 1;
                if idx[d] < per_axis {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
        if self.dim == 1 {
            let spacing = self.small_radius;
            for z in &self.centers {
                out.push(z.clone());
                out.push(vec![z[0] + 0.5 * spacing]);
            }
        }
        out
    }
}
