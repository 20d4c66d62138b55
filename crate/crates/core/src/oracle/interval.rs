//! Exact binomial (Clopper–Pearson) confidence intervals and the normal CDF.

use statrs::function::beta::beta_reg;

use crate::error::{validation, Result};

/// Default two-sided confidence level for tail estimates.
pub const DEFAULT_CONFIDENCE: f64 = 0.99;

/// `Φ(x)`, accurate in both tails.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// `1 − Φ(x)` without cancellation for large `x`.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Two-sided Clopper–Pearson interval for `successes` out of `trials`.
///
/// The endpoints are the quantiles `α/2` of Beta(k, n−k+1) and `1 − α/2` of
/// Beta(k+1, n−k), found by bisection on the regularised incomplete beta
/// function.
pub fn clopper_pearson(successes: u64, trials: u64, confidence: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(validation("confidence interval needs at least one trial"));
    }
    if successes > trials {
        return Err(validation(format!("{successes} successes out of {trials} trials")));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(validation(format!("confidence level must lie in (0, 1), got {confidence}")));
    }
    let alpha = 1.0 - confidence;
    let k = successes as f64;
    let n = trials as f64;
    let low = if successes == 0 {
        0.0
    } else {
        beta_quantile(k, n - k + 1.0, 0.5 * alpha)
    };
    let high = if successes == trials {
        1.0
    } else {
        beta_quantile(k + 1.0, n - k, 1.0 - 0.5 * alpha)
    };
    Ok((low, high))
}

fn beta_quantile(a: f64, b: f64, p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..1100 {
        let mid = if hi < 1e-3 {
            // geometric midpoint resolves tiny quantiles to full relative precision
            if lo > 0.0 { (lo * hi).sqrt() } else { hi * 1e-3 }
        } else {
            0.5 * (lo + hi)
        };
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_successes_matches_closed_form() {
        let (lo, hi) = clopper_pearson(0, 1_000_000, 0.99).unwrap();
        assert_eq!(lo, 0.0);
        let closed = -(0.005f64.ln() / 1e6).exp_m1();
        assert!((hi - closed).abs() < 1e-9 * closed, "{hi} vs {closed}");
        assert!((hi - 5.3e-6).abs() < 0.05e-6);
    }

    #[test]
    fn all_successes() {
        let (lo, hi) = clopper_pearson(50, 50, 0.95).unwrap();
        assert_eq!(hi, 1.0);
        assert!((lo - 0.025f64.powf(1.0 / 50.0)).abs() < 1e-10);
    }

    #[test]
    fn textbook_value() {
        // 7 of 20 at 95%: (0.1539092, 0.5921885)
        let (lo, hi) = clopper_pearson(7, 20, 0.95).unwrap();
        assert!((lo - 0.153_909_2).abs() < 1e-6, "{lo}");
        assert!((hi - 0.592_188_5).abs() < 1e-6, "{hi}");
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(clopper_pearson(0, 0, 0.99).is_err());
        assert!(clopper_pearson(3, 2, 0.99).is_err());
        assert!(clopper_pearson(1, 2, 1.0).is_err());
    }

    #[test]
    fn normal_cdf_landmarks() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-15);
        assert!((normal_sf(8.0) - 6.220_960_574_271_74e-16).abs() < 1e-27);
    }
}
