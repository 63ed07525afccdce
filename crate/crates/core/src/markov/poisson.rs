//! Poisson arrival probabilities for one scheduling cycle.
//!
//! Tails come from the regularized incomplete gamma function, so they stay
//! accurate far from the mean where `1 - cdf` would cancel.

use statrs::function::factorial::ln_factorial;
use statrs::function::gamma::{gamma_lr, gamma_ur};

/// Probability that exactly `alpha` packets arrive in a cycle of length
/// `cycle` seconds at `lambda` packets/second.
pub fn poisson_arrival_prob(lambda: f64, cycle: f64, alpha: u64) -> f64 {
    let mean = lambda * cycle;
    if mean == 0.0 {
        return if alpha == 0 { 1.0 } else { 0.0 };
    }
    (alpha as f64 * mean.ln() - mean - ln_factorial(alpha)).exp()
}

/// `P(X <= k)` for `X ~ Poisson(mean)`.
pub fn poisson_cdf(mean: f64, k: u64) -> f64 {
    if mean == 0.0 {
        return 1.0;
    }
    gamma_ur(k as f64 + 1.0, mean)
}

/// `P(X >= k)` for `X ~ Poisson(mean)`.
pub fn poisson_sf(mean: f64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if mean == 0.0 {
        return 0.0;
    }
    gamma_lr(k as f64, mean)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pmf_examples() {
        let (lam, t) = (300.0, 0.01);
        assert!((poisson_arrival_prob(lam, t, 0) - (-3.0f64).exp()).abs() < 1e-15);
        assert_eq!(poisson_arrival_prob(0.0, 1.0, 0), 1.0);
        assert_eq!(poisson_arrival_prob(0.0, 1.0, 3), 0.0);
        let expected = 2.0 * (-2.0f64).exp();
        assert!((poisson_arrival_prob(1000.0, 2e-3, 2) - expected).abs() < 1e-12);
        assert!((poisson_arrival_prob(1000.0, 2e-3, 2) - 0.27067).abs() < 1e-5);
    }

    #[test]
    fn stable_for_large_means() {
        let mean = 2e4;
        let p = poisson_arrival_prob(mean, 1.0, 20_000);
        // Stirling: 1/sqrt(2*pi*mean)
        let approx = 1.0 / (2.0 * std::f64::consts::PI * mean).sqrt();
        assert!(p.is_finite() && (p / approx - 1.0).abs() < 1e-3);
        assert!(poisson_sf(mean, 30_000) < 1e-100);
        assert!((poisson_cdf(mean, 30_000) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tails_complement() {
        for &(mean, k) in &[(3.0, 2u64), (2000.0, 1999), (4000.0, 4001), (8000.0, 6000)] {
            let total = poisson_cdf(mean, k) + poisson_sf(mean, k + 1);
            assert!(
                (total - 1.0).abs() < 1e-13,
                "mean={mean} k={k} total={total}"
            );
        }
        assert_eq!(poisson_sf(0.0, 0), 1.0);
        assert_eq!(poisson_sf(0.0, 1), 0.0);
        assert_eq!(poisson_cdf(0.0, 0), 1.0);
    }
}
