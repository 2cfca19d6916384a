//! Log-domain numerics for extreme tail probabilities.
//!
//! The shot/thermal bit-error formulas involve Poisson masses like
//! exp(-1000) and erfc arguments past 60, far below what direct f64
//! evaluation can represent, so everything here works in natural-log space.

use std::f64::consts::{LN_2, PI};

/// ln(erfc(x)) for x >= 0, stable far into the tail.
///
/// Below x = 8, erfc(x) is comfortably above the f64 underflow limit and the
/// libm value is taken directly. Above that, the asymptotic expansion
/// erfc(x) = exp(-x^2) / (x sqrt(pi)) * sum_k (-1)^k (2k-1)!! / (2x^2)^k
/// is truncated at its smallest term (relative error < 1e-12 for x >= 8).
pub fn ln_erfc(x: f64) -> f64 {
    assert!(x >= 0.0, "ln_erfc domain is x >= 0");
    if x < 8.0 {
        return libm::erfc(x).ln();
    }
    let inv2x2 = 1.0 / (2.0 * x * x);
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    for k in 1..30 {
        term *= -((2 * k - 1) as f64) * inv2x2;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        sum += term;
    }
    -x * x - (x * PI.sqrt()).ln() + sum.ln()
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// ln(Phi(x)), stable for very negative x via the erfc tail expansion.
pub fn ln_normal_cdf(x: f64) -> f64 {
    if x >= 0.0 {
        normal_cdf(x).ln()
    } else {
        -LN_2 + ln_erfc(-x / std::f64::consts::SQRT_2)
    }
}

/// ln(n!) via lgamma.
pub fn ln_factorial(n: u64) -> f64 {
    libm::lgamma((n + 1) as f64)
}

/// ln of the Poisson pmf at `count` with the given mean.
pub fn ln_poisson_pmf(count: u64, mean: f64) -> f64 {
    debug_assert!(mean > 0.0);
    -mean + count as f64 * mean.ln() - ln_factorial(count)
}

/// ln of the integer-discretized zero-mean Gaussian pmf,
/// pmf(j) = Phi((j+0.5)/sigma) - Phi((j-0.5)/sigma).
pub fn ln_gauss_discrete_pmf(j: i64, sigma: f64) -> f64 {
    debug_assert!(sigma > 0.0);
    let j = j.unsigned_abs() as f64; // symmetric
    if j == 0.0 {
        // Phi(h) - Phi(-h) = erf(h / sqrt(2))
        return libm::erf(0.5 / sigma / std::f64::consts::SQRT_2).ln();
    }
    let lo = (j - 0.5) / sigma;
    let hi = (j + 0.5) / sigma;
    // pmf = 0.5 * (erfc(lo/sqrt2) - erfc(hi/sqrt2)), computed as a log-space
    // difference so the near-cancellation in the far tail stays accurate.
    let ln_a = ln_erfc(lo / std::f64::consts::SQRT_2);
    let ln_b = ln_erfc(hi / std::f64::consts::SQRT_2);
    -LN_2 + ln_a + (-((ln_b - ln_a).exp())).ln_1p()
}

/// log(sum(exp(v))) over a slice of log-domain terms.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}
