//! Special functions needed by the distribution laws.

use core::f64::consts::{PI, SQRT_2};

/// Above this argument the asymptotic expansion of `I₀` is used; below it
/// the power series. Both are accurate to a few ulps at the crossover.
const I0_SERIES_LIMIT: f64 = 30.0;

/// Exponentially scaled modified Bessel function `e^{-|x|} I₀(x)`.
pub fn bessel_i0e(x: f64) -> f64 {
    let x = x.abs();
    if x <= I0_SERIES_LIMIT {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            term *= q / (k * k);
            sum += term;
            if term <= 1e-17 * sum {
                break;
            }
            k += 1.0;
        }
        sum * (-x).exp()
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            let next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * x);
            if next >= term || next <= 1e-17 * sum {
                sum += next;
                break;
            }
            term = next;
            sum += term;
            k += 1.0;
        }
        sum / (2.0 * PI * x).sqrt()
    }
}

/// Modified Bessel function of the first kind, order zero.
pub fn bessel_i0(x: f64) -> f64 {
    bessel_i0e(x) * x.abs().exp()
}

/// Standard normal cumulative distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// `(1 − e^{−d·x}) / d`, continuous through `d = 0` where it equals `x`.
pub fn one_minus_exp_over(d: f64, x: f64) -> f64 {
    if (d * x).abs() < 1e-300 {
        x
    } else {
        -libm::expm1(-d * x) / d
    }
}
