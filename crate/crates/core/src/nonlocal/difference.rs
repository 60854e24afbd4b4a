//! First and second order finite differences of grid functions.

use super::{AnalyticClosure, Exterior, GridFunction, Mesh, NonlocalError};

/// `τ_h w(x) = w(x+h) − w(x)` on the nodes where `x+h` stays on the mesh;
/// `τ²_h = τ_h ∘ τ_h`.
pub fn finite_difference(w: &GridFunction, h: f64, order: u8) -> Result<GridFunction, NonlocalError> {
    match order {
        1 => first_difference(w, h),
        2 => first_difference(&first_difference(w, h)?, h),
        _ => Err(NonlocalError::InvalidInput(format!("order must be 1 or 2, got {order}"))),
    }
}

fn first_difference(w: &GridFunction, h: f64) -> Result<GridFunction, NonlocalError> {
    let mesh = w.mesh();
    if !(h.is_finite() && h != 0.0) {
        return Err(NonlocalError::InvalidInput(format!("step {h} must be finite and non-zero")));
    }
    let dx = mesh.spacing();
    let ratio = h / dx;
    let shift = ratio.round();
    let aligned = (ratio - shift).abs() < 1e-9 && shift != 0.0;
    let n = mesh.nodes();
    let k = if aligned { shift.abs() as usize } else { (h.abs() / dx).ceil() as usize };
    if k + 2 > n {
        return Err(NonlocalError::InvalidInput(format!("step {h} leaves fewer than two nodes")));
    }
    let keep = n - k;
    let (start, new_mesh) = if h > 0.0 {
        (0, Mesh::new(mesh.x(0), mesh.x(keep - 1), keep)?)
    } else {
        (k, Mesh::new(mesh.x(k), mesh.x(n - 1), keep)?)
    };
    let vals = w.values();
    let values: Vec<f64> = (0..keep)
        .map(|j| {
            let i = start + j;
            if aligned {
                let target = if h > 0.0 { i + k } else { i - k };
                vals[target] - vals[i]
            } else {
                w.value_at(mesh.x(i) + h) - vals[i]
            }
        })
        .collect();
    let base = w.clone();
    let growth = w.growth().unwrap_or(0.0).max(0.0);
    let closure = AnalyticClosure::new(format!("difference step {h}"), growth, move |x| base.value_at(x + h) - base.value_at(x));
    GridFunction::new(new_mesh, values, Exterior::AnalyticClosure(closure))
}
