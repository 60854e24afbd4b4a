//! Least-squares power-law fits in log–log coordinates.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("all abscissae coincide")]
    DegenerateFit,
    #[error("point ({x}, {y}) is not strictly positive")]
    NonPositive { x: f64, y: f64 },
}

/// Slope and coefficient of determination of `log y = a + b log x`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Result<(f64, f64), FitError> {
    if xs.len() != ys.len() || xs.len() < 3 {
        // A single repeated abscissa is reported as degenerate rather than short.
        if !xs.is_empty() && xs.iter().all(|&x| x == xs[0]) {
            return Err(FitError::DegenerateFit);
        }
        return Err(FitError::TooFewPoints { needed: 3, got: xs.len().min(ys.len()) });
    }
    if let Some((&x, &y)) = xs.iter().zip(ys).find(|(&x, &y)| !(x > 0.0 && y > 0.0)) {
        return Err(FitError::NonPositive { x, y });
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 1e-24 * n {
        return Err(FitError::DegenerateFit);
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok((slope, r2))
}
