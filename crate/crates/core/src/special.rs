//! Gamma-function helpers used by the Mittag-Leffler evaluators.
//!
//! The asymptotic expansion needs `1/Γ(y)` at large negative `y`, where `Γ`
//! itself overflows and has poles. Everything here therefore works with the
//! sign and the logarithm of the magnitude separately.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `sin(πx)` with argument reduction, exact zero at the integers.
pub fn sinpi(x: f64) -> f64 {
    let n = x.round();
    let r = x - n;
    if r == 0.0 {
        return 0.0;
    }
    let s = (PI * r).sin();
    // sin(π(n + r)) = (-1)^n sin(πr)
    if (n as i64) % 2 == 0 {
        s
    } else {
        -s
    }
}

/// Sign and log-magnitude of `1/Γ(y)`.
///
/// Returns `(0.0, -inf)` at the poles `y = 0, -1, -2, ...` where the
/// reciprocal gamma function vanishes.
pub fn ln_abs_rgamma(y: f64) -> (f64, f64) {
    if y > 0.0 {
        return (1.0, -ln_gamma(y));
    }
    if y == y.round() {
        return (0.0, f64::NEG_INFINITY);
    }
    // 1/Γ(y) = sin(πy) Γ(1-y) / π
    let s = sinpi(y);
    (s.signum(), s.abs().ln() + ln_gamma(1.0 - y) - PI.ln())
}

/// `1/Γ(y)`, an entire function; zero at the non-positive integers.
pub fn rgamma(y: f64) -> f64 {
    if y > 0.0 && y <= 20.0 && y.fract() == 0.0 {
        // exact for small integers: 1/(y-1)!
        let fact: f64 = (1..y as u32).map(f64::from).product();
        return 1.0 / fact;
    }
    let (sign, ln_abs) = ln_abs_rgamma(y);
    if sign == 0.0 {
        0.0
    } else {
        sign * ln_abs.exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    #[test]
    fn rgamma_zeros_at_poles() {
        for n in 0..20 {
            assert_eq!(rgamma(-(n as f64)), 0.0);
        }
    }

    #[test]
    fn rgamma_matches_gamma_away_from_poles() {
        for &y in &[0.3, 0.8, 1.0, 2.5, 7.25, -0.5, -1.2, -3.7] {
            let expected = 1.0 / gamma(y);
            assert!(
                (rgamma(y) - expected).abs() < 1e-13 * expected.abs(),
                "y={y}: {} vs {expected}",
                rgamma(y)
            );
        }
    }

    #[test]
    fn sinpi_reduces_exactly() {
        assert_eq!(sinpi(3.0), 0.0);
        assert!((sinpi(0.5) - 1.0).abs() < 1e-16);
        assert!((sinpi(1.5) + 1.0).abs() < 1e-16);
        assert!((sinpi(-2.25) - (-(PI * 0.25).sin())).abs() < 1e-15);
    }
}
