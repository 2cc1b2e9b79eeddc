//! Sample means with normal-approximation confidence intervals.

/// Two-sided 95% standard-normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// A sample mean and the half-width of its 95% confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeanCi {
    pub mean: f64,
    pub ci: f64,
}

impl MeanCi {
    pub fn new(mean: f64, ci: f64) -> Self {
        MeanCi { mean, ci }
    }

    /// Mean and CI of `values`, summed in slice order so the result does not
    /// depend on how the values were produced.
    pub fn from_samples(values: &[f64]) -> Self {
        let m = values.len();
        if m == 0 {
            return MeanCi::new(f64::NAN, f64::NAN);
        }
        let mean = values.iter().sum::<f64>() / m as f64;
        if m == 1 {
            return MeanCi::new(mean, 0.0);
        }
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        let sd = (ss / (m - 1) as f64).sqrt();
        MeanCi::new(mean, Z95 * sd / (m as f64).sqrt())
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.ci
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.ci
    }

    /// Standard error implied by the half-width.
    pub fn std_error(&self) -> f64 {
        self.ci / Z95
    }
}

/// Result of a weighted straight-line fit `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub intercept_se: f64,
    pub slope_se: f64,
}

/// Weighted least squares with weights `1/sigma_i^2`.
///
/// Falls back to ordinary least squares when any sigma is zero. Standard
/// errors are inflated by the reduced chi-square when it exceeds one, so a
/// misspecified line never reports tighter errors than its residuals allow.
pub fn weighted_line_fit(x: &[f64], y: &[f64], sigma: &[f64]) -> Option<LineFit> {
    let m = x.len();
    if m < 2 || y.len() != m || sigma.len() != m {
        return None;
    }
    let weighted = sigma.iter().all(|s| *s > 0.0 && s.is_finite());
    let w: Vec<f64> = if weighted {
        sigma.iter().map(|s| 1.0 / (s * s)).collect()
    } else {
        vec![1.0; m]
    };
    let sw: f64 = w.iter().sum();
    let sx: f64 = w.iter().zip(x).map(|(w, x)| w * x).sum();
    let sy: f64 = w.iter().zip(y).map(|(w, y)| w * y).sum();
    let sxx: f64 = w.iter().zip(x).map(|(w, x)| w * x * x).sum();
    let sxy: f64 = w.iter().zip(x).zip(y).map(|((w, x), y)| w * x * y).sum();
    let det = sw * sxx - sx * sx;
    if !(det.abs() > 0.0) {
        return None;
    }
    let slope = (sw * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / sw;

    let chi2: f64 = w
        .iter()
        .zip(x)
        .zip(y)
        .map(|((w, x), y)| w * (y - intercept - slope * x).powi(2))
        .sum();
    let dof = (m as f64 - 2.0).max(1.0);
    let scale = if weighted { (chi2 / dof).max(1.0) } else { chi2 / dof };
    Some(LineFit {
        intercept,
        slope,
        intercept_se: (scale * sxx / det).sqrt(),
        slope_se: (scale * sw / det).sqrt(),
    })
}

/// Least-squares coefficient of `y = k * x` (line through the origin).
pub fn fit_through_origin(x: &[f64], y: &[f64]) -> Option<f64> {
    let sxx: f64 = x.iter().map(|x| x * x).sum();
    if !(sxx > 0.0) || x.len() != y.len() {
        return None;
    }
    Some(x.iter().zip(y).map(|(x, y)| x * y).sum::<f64>() / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn mean_ci_basic() {
        let s = MeanCi::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        let sd = (5.0f64 / 3.0).sqrt();
        assert_relative_eq!(s.ci, Z95 * sd / 2.0, epsilon = 1e-15);
        assert_eq!(MeanCi::from_samples(&[7.0]).ci, 0.0);
        assert!(MeanCi::from_samples(&[]).mean.is_nan());
    }

    #[test]
    fn ci_shrinks_with_root_trials() {
        let xs: Vec<f64> = (0..4000).map(|i| ((i * 7919) % 1000) as f64).collect();
        let a = MeanCi::from_samples(&xs[..1000]);
        let b = MeanCi::from_samples(&xs[..4000]);
        assert!((a.ci / b.ci - 2.0).abs() < 0.05);
    }

    #[test]
    fn line_fit_exact() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|x| 3.0 - 0.5 * x).collect();
        let f = weighted_line_fit(&x, &y, &[0.1; 4]).unwrap();
        assert_relative_eq!(f.intercept, 3.0, epsilon = 1e-12);
        assert_relative_eq!(f.slope, -0.5, epsilon = 1e-12);
        let g = weighted_line_fit(&x, &y, &[0.0; 4]).unwrap();
        assert_relative_eq!(g.slope, -0.5, epsilon = 1e-12);
        assert!(g.slope_se < 1e-12);
        assert!(weighted_line_fit(&[1.0, 1.0], &[0.0, 1.0], &[1.0, 1.0]).is_none());
    }

    #[test]
    fn origin_fit() {
        assert_relative_eq!(fit_through_origin(&[1.0, 2.0], &[3.0, 6.0]).unwrap(), 3.0);
        assert!(fit_through_origin(&[0.0], &[1.0]).is_none());
    }
}
