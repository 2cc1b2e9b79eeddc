//! Closed-form large-`n` approximations for the scheduled rates and the
//! limiting distributions of the scheduled gains.
//!
//! Every bound here is first order: the `o(log log n / log n)` remainders are
//! dropped, so finite-`n` Monte Carlo values are only expected to sit near
//! these envelopes, not inside them.

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// A `(lower, upper)` pair in bits/channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

fn check_users(n: f64, min: f64) -> Result<()> {
    if !(n >= min && n.is_finite()) {
        return Err(Error::arg("n", format!("must be >= {min}, got {n}")));
    }
    Ok(())
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::arg("rho", format!("must be positive, got {rho}")));
    }
    Ok(())
}

fn check_interferers(count: usize) -> Result<()> {
    if count == 0 {
        return Err(Error::arg("interferers", "at least one interferer is required"));
    }
    Ok(())
}

/// `log2(log n) / log n`, the convergence speed shared by all symmetric bounds.
pub fn log_correction(n: f64) -> Result<f64> {
    check_users(n, 3.0)?;
    let l = n.ln();
    Ok(l.log2() / l)
}

/// Centering `log2(rho * ln n)` of the scheduled rate in the symmetric model.
///
/// Meaningful once `rho * ln n > 1`; below that the value is negative.
pub fn f_centering(n: f64, rho: f64) -> Result<f64> {
    if !(n > 1.0 && n.is_finite()) {
        return Err(Error::arg("n", format!("must be > 1, got {n}")));
    }
    check_rho(rho)?;
    Ok((rho * n.ln()).log2())
}

/// Bounds on the mean interference-free rate `E[log2(1 + max_k alpha_k)]`.
pub fn lemma1_bounds(n: f64, rho: f64) -> Result<Bounds> {
    let f = f_centering(n, rho)?;
    let c = log_correction(n)?;
    Ok(Bounds {
        lower: f - c,
        upper: f + c,
    })
}

/// Bounds on the mean max-SINR rate with `interferers` equal-path-loss neighbours.
pub fn lemma2_bounds(n: f64, rho: f64, interferers: usize) -> Result<Bounds> {
    check_interferers(interferers)?;
    let f = f_centering(n, rho)?;
    let c = log_correction(n)?;
    let k = interferers as f64;
    Ok(Bounds {
        lower: f - (k + 1.0) * c,
        upper: f - (k - 1.0) * c,
    })
}

/// Envelope `[(N-2) c(n), (N+2) c(n)]` of the rate gap; the lower edge is
/// clamped at zero since the gap is nonnegative on every drop.
pub fn theorem1_envelope(n: f64, interferers: usize) -> Result<Bounds> {
    check_interferers(interferers)?;
    let c = log_correction(n)?;
    let k = interferers as f64;
    Ok(Bounds {
        lower: ((k - 2.0) * c).max(0.0),
        upper: (k + 2.0) * c,
    })
}

/// Limiting CDF `exp(-exp(-u))` of `max_i x_i - ln n` for unit exponentials.
pub fn gumbel_cdf_approx(u: f64) -> f64 {
    (-(-u).exp()).exp()
}

/// Limiting CDF `exp(-t^(-2/epsilon))` of the rescaled best direct gain in
/// the asymmetric model.
pub fn frechet_cdf(t: f64, epsilon: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::arg("t", format!("must be positive, got {t}")));
    }
    check_epsilon(epsilon)?;
    Ok((-t.powf(-2.0 / epsilon)).exp())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::arg("epsilon", format!("must be positive, got {epsilon}")));
    }
    Ok(())
}

/// Scale of the Fréchet limit and its moment term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrechetScale {
    pub lambda: f64,
    pub epsilon: f64,
    /// `E[Y^(2/eps)]^(eps/2)` for a unit-mean exponential `Y`.
    pub moment_term: f64,
}

impl FrechetScale {
    pub fn new(lambda: f64, epsilon: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::arg("lambda", format!("must be positive, got {lambda}")));
        }
        check_epsilon(epsilon)?;
        Ok(FrechetScale {
            lambda,
            epsilon,
            moment_term: gamma(1.0 + 2.0 / epsilon).powf(epsilon / 2.0),
        })
    }

    /// `lambda * moment_term * n^(eps/2)`.
    pub fn at(&self, n: f64) -> Result<f64> {
        check_users(n, 1.0)?;
        Ok(self.lambda * self.moment_term * n.powf(self.epsilon / 2.0))
    }
}

/// Normalizer for the best direct gain among `n` users uniform on a unit
/// disc with path loss `lambda * d^-epsilon` and unit SNR at unit distance.
pub fn frechet_scale(n: f64, lambda: f64, epsilon: f64) -> Result<f64> {
    FrechetScale::new(lambda, epsilon)?.at(n)
}

/// Growth `(epsilon/2) * log2 n` of the interference-free rate in the
/// asymmetric model, reading the logarithm as base 2 (rates are in bits).
pub fn lemma3_rate_asymptote(n: f64, epsilon: f64) -> Result<f64> {
    check_users(n, 2.0)?;
    check_epsilon(epsilon)?;
    Ok(epsilon / 2.0 * n.log2())
}

/// Same growth with the natural logarithm, `(epsilon/2) * ln n`.
pub fn lemma3_rate_asymptote_natural(n: f64, epsilon: f64) -> Result<f64> {
    check_users(n, 2.0)?;
    check_epsilon(epsilon)?;
    Ok(epsilon / 2.0 * n.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{E, PI};

    // Reference values computed with 30-digit mpmath.
    const C_EE: f64 = 0.530_737_845_423_043;

    #[test]
    fn centering_examples() {
        assert_relative_eq!(f_centering(E, 1.0).unwrap(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(f_centering(E, 2.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(f_centering(E.exp(), 1.0).unwrap(), 1.442_695_040_888_963, epsilon = 1e-12);
        assert!(f_centering(1.0, 1.0).is_err());
        assert!(f_centering(10.0, 0.0).is_err());
    }

    #[test]
    fn lemma1_examples() {
        let n = E.exp();
        assert_relative_eq!(log_correction(n).unwrap(), C_EE, epsilon = 1e-12);
        let b = lemma1_bounds(n, 1.0).unwrap();
        assert_relative_eq!(b.lower, 0.911_957_195_465_920, epsilon = 1e-12);
        assert_relative_eq!(b.upper, 1.973_432_886_312_006, epsilon = 1e-12);
        assert_relative_eq!(b.width(), 2.0 * C_EE, epsilon = 1e-12);
        assert_relative_eq!(log_correction(1e6).unwrap(), 0.274_200_287_968_154, epsilon = 1e-12);
        assert!(lemma1_bounds(2.0, 1.0).is_err());
    }

    #[test]
    fn lemma2_examples() {
        let n = E.exp();
        let one = lemma2_bounds(n, 1.0, 1).unwrap();
        assert_eq!(one.upper, f_centering(n, 1.0).unwrap());
        let six = lemma2_bounds(n, 1.0, 6).unwrap();
        assert_relative_eq!(six.lower, -2.272_469_877_072_338, epsilon = 1e-12);
        assert_relative_eq!(six.upper, -1.210_994_186_226_252, epsilon = 1e-12);
        assert!(lemma2_bounds(n, 1.0, 0).is_err());
    }

    #[test]
    fn theorem1_examples() {
        let n = E.exp();
        assert_eq!(theorem1_envelope(n, 2).unwrap().lower, 0.0);
        assert_eq!(theorem1_envelope(n, 1).unwrap().lower, 0.0);
        let b = theorem1_envelope(n, 6).unwrap();
        assert_relative_eq!(b.lower, 2.122_951_381_692_172, epsilon = 1e-12);
        assert_relative_eq!(b.upper, 4.245_902_763_384_344, epsilon = 1e-12);
    }

    #[test]
    fn gumbel_examples() {
        assert_relative_eq!(gumbel_cdf_approx(0.0), 0.367_879_441_171_442, epsilon = 1e-15);
        // u = log log n with n = e^e
        assert_relative_eq!(gumbel_cdf_approx(1.0), 0.692_200_627_555_346, epsilon = 1e-15);
        assert_eq!(gumbel_cdf_approx(1e3), 1.0);
        assert_eq!(gumbel_cdf_approx(-1e3), 0.0);
    }

    #[test]
    fn frechet_examples() {
        for eps in [0.5, 2.0, 3.719, 4.0] {
            assert_relative_eq!(frechet_cdf(1.0, eps).unwrap(), (-1.0f64).exp(), epsilon = 1e-15);
        }
        assert_relative_eq!(frechet_cdf(4.0, 2.0).unwrap(), 0.778_800_783_071_405, epsilon = 1e-15);
        assert!(frechet_cdf(1e12, 2.0).unwrap() > 1.0 - 1e-11);
        assert!(frechet_cdf(0.0, 2.0).is_err());
        assert!(frechet_cdf(-1.0, 2.0).is_err());
    }

    #[test]
    fn frechet_scale_examples() {
        assert_relative_eq!(frechet_scale(37.0, 2.5, 2.0).unwrap(), 2.5 * 37.0, max_relative = 1e-13);
        assert_relative_eq!(frechet_scale(10.0, 1.0, 4.0).unwrap(), PI / 4.0 * 100.0, max_relative = 1e-12);
        assert_relative_eq!(frechet_scale(10.0, 1.0, 4.0).unwrap(), 78.539_816_339_744_83, epsilon = 1e-9);
        assert!(frechet_scale(0.5, 1.0, 4.0).is_err());
        assert!(frechet_scale(10.0, 0.0, 4.0).is_err());
    }

    #[test]
    fn rate_asymptote_examples() {
        assert_eq!(lemma3_rate_asymptote(2.0, 2.0).unwrap(), 1.0);
        assert_relative_eq!(lemma3_rate_asymptote_natural(E, 2.0).unwrap(), 1.0, epsilon = 1e-15);
        for eps in [2.0, 3.719, 4.0] {
            let a = lemma3_rate_asymptote(50.0, eps).unwrap();
            let b = lemma3_rate_asymptote(2500.0, eps).unwrap();
            assert_relative_eq!(a / b, 0.5, epsilon = 1e-14);
        }
        assert!(lemma3_rate_asymptote(1.0, 2.0).is_err());
    }

    proptest! {
        #[test]
        fn bound_widths(n in 3.0f64..1e12, rho in 1e-3f64..1e6, k in 1usize..20) {
            let c = log_correction(n).unwrap();
            let l1 = lemma1_bounds(n, rho).unwrap();
            let l2 = lemma2_bounds(n, rho, k).unwrap();
            prop_assert!((l1.width() - 2.0 * c).abs() <= 1e-9 * (1.0 + c));
            prop_assert!((l2.width() - 2.0 * c).abs() <= 1e-9 * (1.0 + c));
            prop_assert!(l1.upper >= l2.upper);
            let t = theorem1_envelope(n, k).unwrap();
            prop_assert!((t.upper - (l1.upper - l2.lower)).abs() <= 1e-9 * (1.0 + t.upper.abs()));
            if k >= 2 {
                prop_assert!((t.lower - (l1.lower - l2.upper)).abs() <= 1e-9 * (1.0 + t.upper.abs()));
                prop_assert!((t.width() - 4.0 * c).abs() <= 1e-9 * (1.0 + c));
            }
        }

        #[test]
        fn limit_cdfs_monotone(a in -20.0f64..20.0, d in 1e-6f64..5.0, eps in 0.5f64..8.0) {
            prop_assert!(gumbel_cdf_approx(a + d) >= gumbel_cdf_approx(a));
            let t = a.abs() + 1e-3;
            prop_assert!(frechet_cdf(t + d, eps).unwrap() >= frechet_cdf(t, eps).unwrap());
            let p = frechet_cdf(t, eps).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
        }

        #[test]
        fn frechet_scale_ratio(n in 1.0f64..1e5, k in 1.0f64..100.0, eps in 0.5f64..8.0, lambda in 1e-3f64..1e3) {
            let a = frechet_scale(n, lambda, eps).unwrap();
            let b = frechet_scale(n * k, lambda, eps).unwrap();
            prop_assert!((b / a / k.powf(eps / 2.0) - 1.0).abs() <= 1e-12);
            prop_assert!(b >= a);
        }
    }
}
