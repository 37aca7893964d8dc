//! The Mittag-Leffler distribution `ML(β, σ)`: the law of `σ·W_β` where
//! `E[exp(-s W_β)] = 1/(1 + s^β)`.
//!
//! With `x = (t/σ)^β`:
//!
//! * survival `S(t) = E_β(-x)`, always evaluated directly;
//! * CDF `F(t) = x·E_{β,1+β}(-x)` near the origin, `1 - S(t)` elsewhere;
//! * density `f(t) = t^{β-1} σ^{-β} E_{β,β}(-x)`.
//!
//! `β = 1` is dispatched to the exponential law with mean `σ`.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::mlf::{ml_neg, taylor};
use crate::sim::stable_variate;

/// Tail parameter `β ∈ (0, 1]` and scale `σ > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlParams {
    beta: f64,
    sigma: f64,
}

impl MlParams {
    pub fn new(beta: f64, sigma: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "tail parameter must lie in (0, 1], got {beta}"
            )));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "scale must be positive and finite, got {sigma}"
            )));
        }
        Ok(Self { beta, sigma })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn is_exponential(&self) -> bool {
        self.beta == 1.0
    }

    /// Same tail parameter, scale multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.beta, self.sigma * factor)
    }
}

/// Density at `t > 0`.
pub fn ml_pdf(t: f64, p: &MlParams) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("density requires t > 0, got {t}")));
    }
    Ok(pdf_unchecked(t, p))
}

pub(crate) fn pdf_unchecked(t: f64, p: &MlParams) -> f64 {
    let u = t / p.sigma;
    if p.is_exponential() {
        return (-u).exp() / p.sigma;
    }
    if u.is_infinite() {
        return 0.0;
    }
    let x = u.powf(p.beta);
    // t^{β-1}/σ^β = x / t
    x / t * ml_neg(p.beta, p.beta, x)
}

/// Log-density; finite for all `t > 0` short of underflow in `E_{β,β}`.
pub(crate) fn ln_pdf_unchecked(t: f64, p: &MlParams) -> f64 {
    if p.is_exponential() {
        return -t / p.sigma - p.sigma.ln();
    }
    let u = t / p.sigma;
    let x = u.powf(p.beta);
    p.beta * u.ln() - t.ln() + ml_neg(p.beta, p.beta, x).ln()
}

/// CDF at `t ≥ 0`, or the survival function when `complement` is set.
pub fn ml_cdf(t: f64, p: &MlParams, complement: bool) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Domain(format!("CDF requires t >= 0, got {t}")));
    }
    Ok(if complement {
        survival_unchecked(t, p)
    } else {
        cdf_unchecked(t, p)
    })
}

/// Survival function `P[T > t]`.
pub fn ml_survival(t: f64, p: &MlParams) -> Result<f64> {
    ml_cdf(t, p, true)
}

pub(crate) fn survival_unchecked(t: f64, p: &MlParams) -> f64 {
    let u = t / p.sigma;
    if p.is_exponential() {
        return (-u).exp();
    }
    ml_neg(p.beta, 1.0, u.powf(p.beta))
}

pub(crate) fn cdf_unchecked(t: f64, p: &MlParams) -> f64 {
    let u = t / p.sigma;
    if p.is_exponential() {
        return -(-u).exp_m1();
    }
    if u == 0.0 {
        return 0.0;
    }
    let x = u.powf(p.beta);
    if u <= 4.0 {
        // the head series only when it is the smaller of F and S
        if let Some(head) = taylor(p.beta, 1.0 + p.beta, x).filter(|h| x * h <= 0.5) {
            return x * head;
        }
    }
    1.0 - ml_neg(p.beta, 1.0, x)
}

/// Quantile function on `[0, 1)`.
///
/// Brackets the root in `ln t` from the small-time power law and the
/// larger of the exponential and Pareto-tail approximations, then runs a
/// Newton iteration safeguarded by bisection. Upper quantiles are solved
/// against the survival function to avoid cancellation.
pub fn ml_quantile(q: f64, p: &MlParams) -> Result<f64> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::Domain(format!("quantile level must lie in [0, 1), got {q}")));
    }
    if q == 0.0 {
        return Ok(0.0);
    }
    if p.is_exponential() {
        return Ok(-p.sigma * (-q).ln_1p());
    }
    let beta = p.beta;
    let tail = 1.0 - q;
    let use_survival = q > 0.5;
    // g(y) = 0 at the root, y = ln t; increasing in y
    let g = |y: f64| {
        let t = y.exp();
        if use_survival {
            tail - survival_unchecked(t, p)
        } else {
            cdf_unchecked(t, p) - q
        }
    };

    // F(t) ≈ (t/σ)^β / Γ(1+β) near 0; S(t) ≈ (t/σ)^{-β} / Γ(1-β) in the tail
    let head_guess = p.sigma * (q * gamma(1.0 + beta)).powf(1.0 / beta);
    let expo_guess = -p.sigma * tail.ln();
    let pareto_guess = p.sigma * (tail * gamma(1.0 - beta)).powf(-1.0 / beta);
    let mut lo = head_guess.min(expo_guess).ln() - 1.0;
    let mut hi = expo_guess.max(pareto_guess).ln() + 1.0;
    while g(lo) > 0.0 {
        lo -= 2.0;
    }
    while g(hi) < 0.0 {
        hi += 2.0;
    }

    let mut y = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gy = g(y);
        if gy == 0.0 {
            break;
        }
        if gy < 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        let t = y.exp();
        // d/dy F(e^y) = f(t) t
        let slope = pdf_unchecked(t, p) * t;
        let step = gy / slope;
        if slope > 0.0 && step.abs() <= 1e-15 * (1.0 + y.abs()) {
            break;
        }
        let newton = y - step;
        y = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-15 * (1.0 + y.abs()) {
            break;
        }
    }
    Ok(y.exp())
}

/// One draw of `σ·X^{1/β}·D` with `X` unit exponential and `D` the
/// positive `β`-stable law with Laplace transform `exp(-s^β)`.
pub fn ml_variate<R: Rng + ?Sized>(p: &MlParams, rng: &mut R) -> f64 {
    let x: f64 = Exp1.sample(rng);
    if p.is_exponential() {
        return p.sigma * x;
    }
    p.sigma * x.powf(1.0 / p.beta) * stable_variate(p.beta, rng)
}

/// `n` i.i.d. draws from `ML(β, σ)`, reproducible for a given seed.
pub fn ml_rand(p: &MlParams, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be at least 1".into()));
    }
    let mut rng = crate::rng(seed);
    Ok((0..n).map(|_| ml_variate(p, &mut rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_points, integrate_to_infinity, Tolerance};

    fn params(b: f64, s: f64) -> MlParams {
        MlParams::new(b, s).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(MlParams::new(0.0, 1.0).is_err());
        assert!(MlParams::new(1.01, 1.0).is_err());
        assert!(MlParams::new(0.5, 0.0).is_err());
        assert!(MlParams::new(0.5, f64::INFINITY).is_err());
        assert!(MlParams::new(1.0, 2.0).is_ok());
    }

    #[test]
    fn exponential_reduction() {
        let p = params(1.0, 1.0);
        assert!((ml_pdf(0.5, &p).unwrap() - 0.606_530_659_712_633_4).abs() < 1e-15);
        let p = params(1.0, 2.0);
        assert!((ml_cdf(2.0, &p, false).unwrap() - 0.632_120_558_828_557_7).abs() < 1e-15);
        assert!((ml_quantile(0.5, &params(1.0, 1.0)).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn density_and_cdf_reference_values() {
        // E_{0.8,0.8}(-1) from the high-precision series
        let f = ml_pdf(1.0, &params(0.8, 1.0)).unwrap();
        assert!((f - 0.255_743_844_758_241_892).abs() < 1e-8);
        // 1 - e·erfc(1)
        let c = ml_cdf(1.0, &params(0.5, 1.0), false).unwrap();
        assert!((c - 0.572_416_423_844_192_995_6).abs() < 1e-10);
        assert_eq!(ml_cdf(0.0, &params(0.7, 3.0), false).unwrap(), 0.0);
        assert_eq!(ml_cdf(0.0, &params(0.7, 3.0), true).unwrap(), 1.0);
    }

    #[test]
    fn domain_errors() {
        let p = params(0.8, 1.0);
        assert!(ml_pdf(0.0, &p).is_err());
        assert!(ml_pdf(-1.0, &p).is_err());
        assert!(ml_cdf(-1e-9, &p, false).is_err());
        assert!(ml_quantile(1.0, &p).is_err());
        assert!(ml_quantile(-0.1, &p).is_err());
        assert!(ml_rand(&p, 0, 1).is_err());
    }

    #[test]
    fn density_integrates_to_one() {
        for &beta in &[0.5, 0.8, 0.95] {
            let p = params(beta, 1.0);
            let f = |t: f64| pdf_unchecked(t, &p);
            let head = integrate_points(f, &[0.0, 1e-6, 1e-3, 0.1, 1.0], Tolerance::relative(1e-10)).value;
            let tail = integrate_to_infinity(f, 1.0, Tolerance::relative(1e-10)).value;
            assert!((head + tail - 1.0).abs() < 1e-4, "beta={beta}: {}", head + tail);
        }
    }

    #[test]
    fn cdf_derivative_matches_density() {
        for &beta in &[0.3, 0.6, 0.8, 0.95, 1.0] {
            let p = params(beta, 2.0);
            for &t in &[1e-3, 0.05, 0.7, 2.0, 9.0, 60.0, 1e3] {
                let h = 1e-5 * t;
                // difference whichever of F and S is small
                let d = if cdf_unchecked(t, &p) < 0.5 {
                    (cdf_unchecked(t + h, &p) - cdf_unchecked(t - h, &p)) / (2.0 * h)
                } else {
                    (survival_unchecked(t - h, &p) - survival_unchecked(t + h, &p)) / (2.0 * h)
                };
                let f = pdf_unchecked(t, &p);
                assert!(((d - f) / f).abs() < 1e-5, "beta={beta} t={t}: {d} vs {f}");
            }
        }
    }

    #[test]
    fn cdf_and_survival_are_complementary() {
        for &beta in &[0.4, 0.8, 0.97] {
            let p = params(beta, 1.0);
            for &t in &[1e-4, 0.3, 1.0, 3.9, 4.1, 50.0] {
                let s = survival_unchecked(t, &p) + cdf_unchecked(t, &p);
                assert!((s - 1.0).abs() < 5e-13, "beta={beta} t={t}: {s}");
            }
        }
    }

    #[test]
    fn heavy_tail_constant() {
        for &beta in &[0.5, 0.8, 0.9] {
            let p = params(beta, 3.0);
            let t = 3.0 * 1e6;
            let scaled = survival_unchecked(t, &p) * (t / 3.0).powf(beta);
            let limit = 1.0 / gamma(1.0 - beta);
            assert!((scaled / limit - 1.0).abs() < 0.01, "beta={beta}");
        }
    }

    #[test]
    fn quantile_reference_values() {
        // bisection on a 30-digit CDF
        let q = ml_quantile(0.9, &params(0.8, 1.0)).unwrap();
        assert!((q - 4.426_246_166_407_898_6).abs() < 1e-8, "{q}");
        assert_eq!(ml_quantile(0.0, &params(0.3, 5.0)).unwrap(), 0.0);
    }

    #[test]
    fn quantile_roundtrip_grid() {
        for &beta in &[0.2, 0.5, 0.8, 0.95, 0.999, 1.0] {
            let p = params(beta, 1.5);
            let mut prev = 0.0;
            for i in 1..=999 {
                let q = i as f64 / 1000.0;
                let t = ml_quantile(q, &p).unwrap();
                assert!(t > prev, "beta={beta} q={q}");
                prev = t;
                let back = cdf_unchecked(t, &p);
                assert!((back - q).abs() < 1e-9, "beta={beta} q={q}: {back}");
            }
        }
    }

    #[test]
    fn sampler_is_deterministic() {
        let p = params(0.7, 2.0);
        assert_eq!(ml_rand(&p, 100, 9).unwrap(), ml_rand(&p, 100, 9).unwrap());
        assert_ne!(ml_rand(&p, 100, 9).unwrap(), ml_rand(&p, 100, 10).unwrap());
    }
}
