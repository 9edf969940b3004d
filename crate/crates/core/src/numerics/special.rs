//! Closed-form densities and distribution functions shared by the samplers
//! and the prior.

use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;
use std::f64::consts::{LN_2, SQRT_2};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

#[inline]
pub fn std_normal_log_pdf(x: f64) -> f64 {
    -0.5 * x * x - HALF_LN_2PI
}

/// `Φ(x)`.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// `log(1 − Φ(a))`, accurate far into the upper tail.
pub fn std_normal_log_sf(a: f64) -> f64 {
    if a < 30.0 {
        (0.5 * erfc(a / SQRT_2)).ln()
    } else {
        // Mills-ratio expansion; relative error below 1e-13 for a >= 30.
        let inv2 = 1.0 / (a * a);
        let series = 1.0 - inv2 + 3.0 * inv2 * inv2 - 15.0 * inv2 * inv2 * inv2;
        std_normal_log_pdf(a) - a.ln() + series.ln()
    }
}

/// `log n!`.
pub fn ln_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `log(a + b)` from `log a` and `log b`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Log-pmf of the Poisson(`rate`) law truncated to `lo..=hi`; `None` outside
/// the support.
pub fn truncated_poisson_log_pmf(m: u64, rate: f64, lo: u64, hi: u64) -> Option<f64> {
    if m < lo || m > hi {
        return None;
    }
    let log_w = |j: u64| j as f64 * rate.ln() - ln_factorial(j);
    let norm: Vec<f64> = (lo..=hi).map(log_w).collect();
    Some(log_w(m) - log_sum_exp(&norm))
}

/// Log-density of the exponential law with rate `lambda` truncated to
/// `(0, upper)`.
///
/// The wrapped exponential on the circle only adds mass at `θ + 2πj` for
/// `j >= 1`, so under truncation below `2π` it coincides with this density.
pub fn truncated_exponential_log_pdf(theta: f64, lambda: f64, upper: f64) -> Option<f64> {
    if !(theta > 0.0 && theta < upper) {
        return None;
    }
    Some(lambda.ln() - lambda * theta - truncated_exponential_log_norm(lambda, upper))
}

/// `log(1 − e^{−λ a})`.
#[inline]
pub fn truncated_exponential_log_norm(lambda: f64, upper: f64) -> f64 {
    (-(-lambda * upper).exp_m1()).ln()
}

/// CDF of the truncated exponential on `(0, upper)`.
pub fn truncated_exponential_cdf(theta: f64, lambda: f64, upper: f64) -> f64 {
    if theta <= 0.0 {
        0.0
    } else if theta >= upper {
        1.0
    } else {
        (-lambda * theta).exp_m1() / (-lambda * upper).exp_m1()
    }
}

/// Log-density of `N(mean, sd²)` truncated to `(lo, hi)`.
pub fn truncated_normal_log_pdf(x: f64, mean: f64, sd: f64, lo: f64, hi: f64) -> Option<f64> {
    if !(x > lo && x < hi) {
        return None;
    }
    let mass = std_normal_cdf((hi - mean) / sd) - std_normal_cdf((lo - mean) / sd);
    Some(std_normal_log_pdf((x - mean) / sd) - sd.ln() - mass.ln())
}

/// Log-density of `Dirichlet(alpha)` at `q`; `None` off the open simplex.
pub fn dirichlet_log_pdf(q: &[f64], alpha: &[f64]) -> Option<f64> {
    if q.len() != alpha.len() || q.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    let total: f64 = alpha.iter().sum();
    let mut acc = ln_gamma(total);
    for (&qi, &ai) in q.iter().zip(alpha) {
        acc += (ai - 1.0) * qi.ln() - ln_gamma(ai);
    }
    Some(acc)
}

/// `log(2/π)`, the log-density of a uniform draw on an interval of width π/2.
pub const LN_TWO_OVER_PI: f64 = LN_2 - 1.144_729_885_849_400_2;
