//! Distribution of the time to the next threshold crossing, given the time
//! already elapsed since the last one, and the hazard rate.

use serde::{Deserialize, Serialize};

use crate::distribution::{pdf_unchecked, survival_unchecked, MlParams};
use crate::error::{Error, Result};

/// A fitted duration law together with the elapsed time `t0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictiveState {
    params: MlParams,
    t0: f64,
    /// `P[T > t0]`.
    survival_t0: f64,
}

impl PredictiveState {
    pub fn new(params: MlParams, t0: f64) -> Result<Self> {
        if !(t0 >= 0.0 && t0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "elapsed time must be finite and non-negative, got {t0}"
            )));
        }
        let survival_t0 = survival_unchecked(t0, &params);
        // the exponential law never divides by S(t0)
        if !params.is_exponential() && !(survival_t0 >= f64::MIN_POSITIVE) {
            return Err(Error::Underflow(format!(
                "survival at t0 = {t0} is {survival_t0:e}"
            )));
        }
        Ok(Self {
            params,
            t0,
            survival_t0,
        })
    }

    pub fn params(&self) -> &MlParams {
        &self.params
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn survival_t0(&self) -> f64 {
        self.survival_t0
    }

    fn memoryless(&self) -> bool {
        self.params.is_exponential() || self.t0 == 0.0
    }
}

fn check_duration(t: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("duration must be positive, got {t}")));
    }
    Ok(())
}

/// `f(t + t0) / S(t0)`.
pub fn conditional_density(state: &PredictiveState, t: f64) -> Result<f64> {
    check_duration(t)?;
    if state.memoryless() {
        return Ok(pdf_unchecked(t, &state.params));
    }
    Ok(pdf_unchecked(t + state.t0, &state.params) / state.survival_t0)
}

/// `S(t + t0) / S(t0)`.
pub fn conditional_survival(state: &PredictiveState, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("duration must be non-negative, got {t}")));
    }
    if state.memoryless() {
        return Ok(survival_unchecked(t, &state.params));
    }
    Ok(survival_unchecked(t + state.t0, &state.params) / state.survival_t0)
}

/// Smallest `t` with `P[T ≤ t0 + t | T > t0] ≥ q`.
pub fn conditional_survival_quantile(state: &PredictiveState, q: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::Domain(format!("probability must lie in [0, 1), got {q}")));
    }
    if q == 0.0 {
        return Ok(0.0);
    }
    let p = &state.params;
    if p.is_exponential() {
        return Ok(-p.sigma() * (-q).ln_1p());
    }
    if state.t0 == 0.0 {
        return crate::distribution::ml_quantile(q, p);
    }
    let target = 1.0 - q;
    let t0 = state.t0;
    let s0 = state.survival_t0;
    // increasing in y = ln t, zero at the root
    let g = |y: f64| target - survival_unchecked(t0 + y.exp(), p) / s0;

    // the hazard decreases, so P[T ≤ t0 + t | T > t0] ≤ h(t0)·t and q/h(t0)
    // lies at or below the root
    let h0 = pdf_unchecked(t0, p) / s0;
    let mut lo = (q / h0).ln();
    while g(lo) > 0.0 {
        lo -= 1.0;
    }
    let mut hi = lo + 1.0;
    while g(hi) < 0.0 {
        lo = hi;
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
        let slope = pdf_unchecked(t0 + t, p) * t / s0;
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

/// `h(t) = f(t) / S(t)`, the crossing risk per unit time.
pub fn hazard_rate(params: &MlParams, t: f64) -> Result<f64> {
    check_duration(t)?;
    if params.is_exponential() {
        return Ok(1.0 / params.sigma());
    }
    let s = survival_unchecked(t, params);
    if !(s >= f64::MIN_POSITIVE) {
        return Err(Error::Underflow(format!("survival at t = {t} is {s:e}")));
    }
    Ok(pdf_unchecked(t, params) / s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{ml_pdf, ml_quantile};
    use crate::quadrature::{integrate_points, integrate_to_infinity, Tolerance};

    fn params(b: f64, s: f64) -> MlParams {
        MlParams::new(b, s).unwrap()
    }

    #[test]
    fn no_conditioning_at_zero() {
        let p = params(0.8, 1.0);
        let st = PredictiveState::new(p, 0.0).unwrap();
        for &t in &[0.01, 0.5, 3.0, 100.0] {
            assert_eq!(conditional_density(&st, t).unwrap(), ml_pdf(t, &p).unwrap());
        }
    }

    #[test]
    fn exponential_is_memoryless() {
        let p = params(1.0, 2.0);
        for &t0 in &[0.0, 1.0, 50.0, 1e4] {
            let st = PredictiveState::new(p, t0).unwrap();
            for &t in &[0.1, 1.0, 7.0] {
                let d = conditional_density(&st, t).unwrap();
                assert!((d - ml_pdf(t, &p).unwrap()).abs() < 1e-10 * d);
            }
            let med = conditional_survival_quantile(&st, 0.5).unwrap();
            assert!((med - 2.0 * 2f64.ln()).abs() < 1e-12);
        }
        assert_eq!(hazard_rate(&p, 3.0).unwrap(), 0.5);
    }

    #[test]
    fn conditional_median_oracle() {
        // roots of S(t + t0) = S(t0)/2 from a 30-digit bracketing solver
        let p = params(0.8, 1.0);
        let cases = [
            (0.0, 0.643_440_598_968_053_3),
            (1.0, 1.331_700_202_001_241),
            (10.0, 10.922_809_712_252_237),
        ];
        let mut prev = 0.0;
        for (t0, expected) in cases {
            let st = PredictiveState::new(p, t0).unwrap();
            let m = conditional_survival_quantile(&st, 0.5).unwrap();
            assert!((m / expected - 1.0).abs() < 1e-9, "t0={t0}: {m}");
            assert!(m > prev);
            prev = m;
        }
        assert_eq!(conditional_survival_quantile(&PredictiveState::new(p, 3.0).unwrap(), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn hazard_oracle_and_monotone() {
        let p = params(0.8, 1.0);
        let cases = [
            (1.0, 0.660_924_626_396_081),
            (2.0, 0.458_636_065_896_094_8),
            (4.0, 0.265_317_501_065_991_9),
        ];
        for (t, h) in cases {
            assert!((hazard_rate(&p, t).unwrap() / h - 1.0).abs() < 1e-10);
        }
        let mut prev = f64::INFINITY;
        let mut t = 1e-4;
        while t < 1e6 {
            let h = hazard_rate(&p, t).unwrap();
            assert!(h < prev, "t={t}");
            prev = h;
            t *= 1.5;
        }
    }

    #[test]
    fn hazard_small_time_power_law() {
        let p = params(0.8, 1.0);
        let a = hazard_rate(&p, 1e-6).unwrap() * 1e-6f64.powf(0.2);
        let b = hazard_rate(&p, 1e-8).unwrap() * 1e-8f64.powf(0.2);
        assert!((a / b - 1.0).abs() < 0.01);
        assert!(hazard_rate(&p, 0.0).is_err());
    }

    #[test]
    fn conditional_density_normalizes() {
        for &beta in &[0.6, 0.8, 0.95] {
            let p = params(beta, 1.0);
            for &t0 in &[0.0, 1.0, 10.0] {
                let st = PredictiveState::new(p, t0).unwrap();
                let f = |t: f64| conditional_density(&st, t).unwrap_or(0.0);
                let head = integrate_points(f, &[0.0, 1e-6, 1e-3, 0.1, 1.0], Tolerance::relative(1e-10)).value;
                let tail = integrate_to_infinity(f, 1.0, Tolerance::relative(1e-10)).value;
                assert!((head + tail - 1.0).abs() < 1e-4, "beta={beta} t0={t0}: {}", head + tail);
            }
        }
    }

    #[test]
    fn quantile_inverts_integrated_density() {
        let p = params(0.8, 1.0);
        let st = PredictiveState::new(p, 10.0).unwrap();
        for &q in &[0.1, 0.5, 0.9] {
            let t = conditional_survival_quantile(&st, q).unwrap();
            let f = |s: f64| conditional_density(&st, s).unwrap_or(0.0);
            let mass = integrate_points(f, &[0.0, t.min(1.0), t], Tolerance::relative(1e-12)).value;
            assert!((mass - q).abs() < 1e-6, "q={q}: {mass}");
        }
    }

    #[test]
    fn survival_is_stochastically_ordered_in_t0() {
        let p = params(0.7, 1.0);
        for &t in &[0.1, 1.0, 10.0] {
            let mut prev = 0.0;
            for &t0 in &[0.0, 0.5, 2.0, 10.0, 100.0] {
                let s = conditional_survival(&PredictiveState::new(p, t0).unwrap(), t).unwrap();
                assert!(s >= prev);
                prev = s;
            }
        }
    }

    #[test]
    fn quantile_matches_unconditional_at_zero() {
        let p = params(0.8, 2.0);
        let st = PredictiveState::new(p, 0.0).unwrap();
        assert_eq!(
            conditional_survival_quantile(&st, 0.3).unwrap(),
            ml_quantile(0.3, &p).unwrap()
        );
    }

    #[test]
    fn invalid_states() {
        let p = params(0.8, 1.0);
        assert!(PredictiveState::new(p, -1.0).is_err());
        let st = PredictiveState::new(p, 1.0).unwrap();
        assert!(conditional_density(&st, 0.0).is_err());
        assert!(conditional_survival_quantile(&st, 1.0).is_err());
    }
}
