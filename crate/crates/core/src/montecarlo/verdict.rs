//! Mechanical convergence diagnosis of a Monte Carlo curve.
//!
//! Given values `v_i ± ci_i` at user counts `n_i`, only the tail (the last
//! `max(4, ceil(len / 2))` points) is examined:
//!
//! 1. Trend: weighted fit of `v` against `log2 n`. The slope per doubling is
//!    `decreasing` / `increasing` when its 95% interval excludes zero,
//!    otherwise `flat`.
//! 2. Extrapolated limit: weighted fit `v = L + b / ln n`; `L` is the
//!    intercept at `n -> inf`.
//! 3. `vanishing` when the last value is below the quantity's threshold, the
//!    trend is not increasing, and the 95% interval of `L` reaches zero.
//! 4. `positive-limit` when the last value's interval excludes zero, each of
//!    the last three successive differences is below 5% of the level, and the
//!    tail has stopped moving: either the slope is not significant or it is
//!    below 1% of the level per doubling.
//! 5. Otherwise `inconclusive`, reported together with the trend.

use std::fmt;

use super::stats::{weighted_line_fit, MeanCi, Z95};
use super::CurvePoint;
use crate::error::{Error, Result};
use crate::scheduling::SchedulerKind;

/// Relative step size below which successive values count as settled.
pub const SETTLED_STEP: f64 = 0.05;
/// Relative slope per doubling below which a significant trend still counts as flat.
pub const SETTLED_SLOPE: f64 = 0.01;

/// Curve quantity a verdict is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    DeltaR,
    MeanBeta(SchedulerKind),
    MeanRate(SchedulerKind),
    JpRate,
}

impl Quantity {
    /// Level under which the quantity may be declared vanishing.
    pub fn vanishing_threshold(self) -> f64 {
        match self {
            Quantity::MeanBeta(_) => 0.1,
            _ => 0.05,
        }
    }

    pub fn extract(self, point: &CurvePoint) -> Option<MeanCi> {
        match self {
            Quantity::DeltaR => Some(point.delta_r),
            Quantity::MeanBeta(k) => point.scheduler(k).map(|s| s.beta),
            Quantity::MeanRate(k) => point.scheduler(k).map(|s| s.rate),
            Quantity::JpRate => point.jp_rate,
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::DeltaR => write!(f, "delta_R"),
            Quantity::MeanBeta(k) => write!(f, "{k}_mean_beta_norm"),
            Quantity::MeanRate(k) => write!(f, "{k}_mean_rate"),
            Quantity::JpRate => write!(f, "jp_rate"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Vanishing,
    PositiveLimit,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    Decreasing,
    Flat,
    Increasing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub tail_points: usize,
    pub slope_per_doubling: f64,
    pub slope_se: f64,
    pub trend: Trend,
    /// Largest `|v_i - v_{i-1}| / |v_last|` over the last three steps.
    pub max_relative_step: f64,
    pub extrapolated_limit: MeanCi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceVerdict {
    pub quantity: Quantity,
    pub verdict: Verdict,
    pub limit_estimate: MeanCi,
    pub diagnostics: Diagnostics,
}

impl ConvergenceVerdict {
    /// `vanishing`, `positive-limit` or `inconclusive-<trend>`.
    pub fn label(&self) -> String {
        match self.verdict {
            Verdict::Vanishing => "vanishing".into(),
            Verdict::PositiveLimit => "positive-limit".into(),
            Verdict::Inconclusive => format!(
                "inconclusive-{}",
                match self.diagnostics.trend {
                    Trend::Decreasing => "decreasing",
                    Trend::Flat => "flat",
                    Trend::Increasing => "increasing",
                }
            ),
        }
    }
}

/// Diagnoses `quantity` along `curve` (ascending `n`).
pub fn convergence_verdict(curve: &[CurvePoint], quantity: Quantity) -> Result<ConvergenceVerdict> {
    let series: Vec<(f64, MeanCi)> = curve
        .iter()
        .map(|p| {
            quantity
                .extract(p)
                .map(|v| (p.n as f64, v))
                .ok_or_else(|| Error::arg("quantity", format!("{quantity} missing at n = {}", p.n)))
        })
        .collect::<Result<_>>()?;
    diagnose(&series, quantity)
}

/// Same procedure on raw `(n, value ± ci)` pairs.
pub fn diagnose(series: &[(f64, MeanCi)], quantity: Quantity) -> Result<ConvergenceVerdict> {
    if series.len() < 4 {
        return Err(Error::arg("curve", format!("need >= 4 points, got {}", series.len())));
    }
    let (first, last) = (series[0].0, series[series.len() - 1].0);
    if !(first >= 2.0 && last / first >= 100.0) {
        return Err(Error::arg(
            "curve",
            format!("grid must span >= 2 decades of n >= 2 (got {first}..{last})"),
        ));
    }
    if series.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::arg("curve", "n must be strictly increasing"));
    }

    let tail_len = (series.len().div_ceil(2)).max(4);
    let tail = &series[series.len() - tail_len..];
    let y: Vec<f64> = tail.iter().map(|(_, v)| v.mean).collect();
    let sigma: Vec<f64> = tail.iter().map(|(_, v)| v.std_error()).collect();

    let log_n: Vec<f64> = tail.iter().map(|(n, _)| n.log2()).collect();
    let trend_fit = weighted_line_fit(&log_n, &y, &sigma)
        .ok_or_else(|| Error::arg("curve", "degenerate trend fit"))?;
    let (s, s_se) = (trend_fit.slope, trend_fit.slope_se);
    let trend = if s + Z95 * s_se < 0.0 {
        Trend::Decreasing
    } else if s - Z95 * s_se > 0.0 {
        Trend::Increasing
    } else {
        Trend::Flat
    };

    let inv_log: Vec<f64> = tail.iter().map(|(n, _)| 1.0 / n.ln()).collect();
    let limit_fit = weighted_line_fit(&inv_log, &y, &sigma)
        .ok_or_else(|| Error::arg("curve", "degenerate limit fit"))?;
    let extrapolated = MeanCi::new(limit_fit.intercept, Z95 * limit_fit.intercept_se);

    let last_point = tail[tail.len() - 1].1;
    let level = last_point.mean.abs();
    let steps = &tail[tail.len() - 4..];
    let max_relative_step = steps
        .windows(2)
        .map(|w| (w[1].1.mean - w[0].1.mean).abs())
        .fold(0.0, f64::max)
        / level;

    let diagnostics = Diagnostics {
        tail_points: tail_len,
        slope_per_doubling: s,
        slope_se: s_se,
        trend,
        max_relative_step,
        extrapolated_limit: extrapolated,
    };

    let vanishing = last_point.mean < quantity.vanishing_threshold()
        && trend != Trend::Increasing
        && extrapolated.lower() <= 0.0;
    let settled = max_relative_step < SETTLED_STEP
        && (trend == Trend::Flat || s.abs() < SETTLED_SLOPE * level);
    let positive = last_point.lower() > 0.0 && settled;

    let (verdict, limit_estimate) = if vanishing {
        (Verdict::Vanishing, extrapolated)
    } else if positive {
        (Verdict::PositiveLimit, last_point)
    } else {
        (Verdict::Inconclusive, extrapolated)
    };
    Ok(ConvergenceVerdict {
        quantity,
        verdict,
        limit_estimate,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        (4..=14).map(|k| (1u64 << k) as f64).collect()
    }

    fn series(f: impl Fn(f64) -> MeanCi) -> Vec<(f64, MeanCi)> {
        grid().into_iter().map(|n| (n, f(n))).collect()
    }

    #[test]
    fn constant_zero_is_vanishing() {
        let v = diagnose(&series(|_| MeanCi::new(0.0, 0.0)), Quantity::DeltaR).unwrap();
        assert_eq!(v.verdict, Verdict::Vanishing);
        assert_eq!(v.label(), "vanishing");
    }

    #[test]
    fn constant_five_is_positive() {
        let v = diagnose(&series(|n| MeanCi::new(5.0, 1.0 / n.sqrt())), Quantity::DeltaR).unwrap();
        assert_eq!(v.verdict, Verdict::PositiveLimit);
        assert_eq!(v.limit_estimate.mean, 5.0);
    }

    #[test]
    fn slow_logarithmic_decay_is_not_positive() {
        // 8 / ln n: still dropping several percent per doubling at n = 2^14.
        let v = diagnose(
            &series(|n| MeanCi::new(8.0 / n.ln(), 0.005)),
            Quantity::MeanBeta(SchedulerKind::MaxSinr),
        )
        .unwrap();
        assert_eq!(v.verdict, Verdict::Inconclusive);
        assert_eq!(v.label(), "inconclusive-decreasing");
        assert!(v.diagnostics.extrapolated_limit.mean.abs() < 1e-9);
    }

    #[test]
    fn fast_decay_to_zero_is_vanishing() {
        let v = diagnose(&series(|n| MeanCi::new(1.0 / n.ln().powi(3), 1e-4)), Quantity::DeltaR).unwrap();
        assert_eq!(v.verdict, Verdict::Vanishing);
    }

    #[test]
    fn decay_to_constant_is_positive() {
        let v = diagnose(
            &series(|n| MeanCi::new(3.0 + 10.0 / n, 0.02)),
            Quantity::MeanBeta(SchedulerKind::MaxSinr),
        )
        .unwrap();
        assert_eq!(v.verdict, Verdict::PositiveLimit);
        assert!((v.limit_estimate.mean - 3.0).abs() < 0.01);
    }

    #[test]
    fn short_or_narrow_curves_rejected() {
        let s = series(|_| MeanCi::new(1.0, 0.1));
        assert!(diagnose(&s[..3], Quantity::DeltaR).is_err());
        assert!(diagnose(&s[..7], Quantity::DeltaR).is_err()); // 16..1024 spans < 2 decades
        assert!(diagnose(&s[..8], Quantity::DeltaR).is_ok()); // 16..2048
    }
}
