//! Univariate standard normal kernels.

use libm::erfc;
use statrs::function::erf::erfc_inv;
use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI, SQRT_2};

/// `ln(2 pi) / 2`
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Below this argument `erfc` approaches the subnormal range and the
/// asymptotic expansion of the Mills ratio takes over for `ln Phi`.
const LOG_CDF_ASYMPTOTIC: f64 = -37.0;

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

pub fn log_std_normal_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// `Phi(x) = erfc(-x / sqrt 2) / 2`.
pub fn std_normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// `ln Phi(x)`, accurate far into both tails.
pub fn log_std_normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if x > 0.0 {
        // ln(1 - Phi(-x)) keeps the tiny upper tail mass
        return (-0.5 * erfc(x * FRAC_1_SQRT_2)).ln_1p();
    }
    if x > LOG_CDF_ASYMPTOTIC {
        return (0.5 * erfc(-x * FRAC_1_SQRT_2)).ln();
    }
    // Phi(x) = phi(x)/|x| * (1 - 1/x^2 + 3/x^4 - 15/x^6 + ...)
    let x2 = x * x;
    let mut term = 1.0;
    let mut series = 1.0;
    for k in 1..12 {
        term *= -((2 * k - 1) as f64) / x2;
        series += term;
    }
    log_std_normal_pdf(x) - (-x).ln() + series.ln()
}

/// Inverse of the standard normal CDF.
pub fn std_normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let mut x = -SQRT_2 * erfc_inv(2.0 * p);
    // polish the rational approximation with Newton steps on ln Phi
    for _ in 0..2 {
        if !x.is_finite() {
            break;
        }
        let step = if p < 0.5 {
            (log_std_normal_cdf(x) - p.ln()) * (log_std_normal_cdf(x) - log_std_normal_pdf(x)).exp()
        } else {
            (std_normal_cdf(x) - p) / std_normal_pdf(x)
        };
        x -= step;
    }
    x
}

/// `E|U|` for `U ~ N(0, 1)`.
pub fn half_normal_mean() -> f64 {
    (2.0 / PI).sqrt()
}

/// `ln 2`, re-exported for the `2^m` normalizers.
pub const LN2: f64 = LN_2;
