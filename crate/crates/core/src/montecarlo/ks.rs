//! One-sample Kolmogorov–Smirnov distance.

use crate::error::{Error, Result};

/// Sup-distance between the empirical CDF of `samples` and `reference_cdf`.
pub fn empirical_cdf_distance<F>(samples: &[f64], reference_cdf: F) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if samples.is_empty() {
        return Err(Error::arg("samples", "at least one sample is required"));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::arg("samples", "NaN sample"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let m = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in xs.iter().enumerate() {
        let f = reference_cdf(*x);
        let above = (i + 1) as f64 / m - f;
        let below = f - i as f64 / m;
        d = d.max(above).max(below);
    }
    Ok(d)
}

/// Asymptotic critical value of the KS distance at significance 0.01.
pub fn critical_value_99(samples: usize) -> f64 {
    1.628 / (samples as f64).sqrt()
}
