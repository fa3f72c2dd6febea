//! Pearson correlation and cosine similarity.

use crate::error::{Error, Result};

/// Sample Pearson correlation coefficient. Requires equal lengths of at
/// least two and nonzero variance on both sides.
pub fn pearson_r(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::DegenerateSeries("fewer than two points"));
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(Error::DegenerateSeries("zero variance"));
    }
    Ok(cov / (var_x.sqrt() * var_y.sqrt()))
}

/// Cosine of the angle between two equal-length nonzero vectors.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let dot: f64 = u.iter().zip(v).map(|(&a, &b)| a * b).sum();
    let norm_u = u.iter().map(|&a| a * a).sum::<f64>().sqrt();
    let norm_v = v.iter().map(|&a| a * a).sum::<f64>().sqrt();
    if norm_u == 0.0 || norm_v == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(dot / (norm_u * norm_v))
}
