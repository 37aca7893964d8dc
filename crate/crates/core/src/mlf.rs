//! Two-parameter Mittag-Leffler function on the negative real axis.
//!
//! `E_{α,b}(z) = Σ_{k≥0} z^k / Γ(αk + b)` for `0 < α ≤ 1`, `b > 0`, `z ≤ 0`.
//!
//! Three evaluators cover the half-line `z = -x`:
//!
//! * the Taylor series, while its alternating terms stay within three
//!   orders of magnitude of the result (`x^{1/α} ≤ 4`);
//! * the algebraic asymptotic expansion
//!   `-Σ_{k≥1} (-x)^{-k} / Γ(b - αk)`, accepted only when its optimally
//!   truncated remainder and the exponentially small branch
//!   `x^{(1-b)/α} exp(x^{1/α} cos(π/α)) / α` are both below `1e-16·|E|`;
//! * in between, a real integral representation (obtained by collapsing the
//!   Hankel contour onto the negative axis) evaluated with adaptive
//!   Gauss–Kronrod quadrature:
//!
//! ```text
//! E_{α,b}(-x) = x^{p}/(απ) ∫_0^∞ u^{p} e^{-(xu)^{1/α}}
//!               (u sin(π(1-b)) + sin(π(1-b+α))) / (u² + 2u cos(απ) + 1) du,
//! p = (1-b)/α,   valid for 0 < α < 1, b < 1 + α.
//! ```
//!
//! Larger `b` is reduced through `E_{α,b}(-x) = (1/Γ(b-α) - E_{α,b-α}(-x)) / x`,
//! and `α = 1` uses `E_{1,b}(-x) = Γ(b-1)^{-1} ∫_0^1 e^{-xs} (1-s)^{b-2} ds`.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_points, integrate_to_infinity, Tolerance};
use crate::special::{ln_abs_rgamma, rgamma, sinpi};

/// Largest `x^{1/α}` at which the Taylor series is attempted.
const TAYLOR_LIMIT: f64 = 4.0;
/// Largest tolerated ratio `Σ|term| / |Σ term|` in the Taylor series.
const TAYLOR_CANCELLATION: f64 = 1e3;
const ASYMPTOTIC_EPS: f64 = 1e-16;
// a few hundred ulps: the per-segment roundoff floor of GK21 is 50ε
const QUAD_REL_TOL: f64 = 1e-13;

/// Arguments of `E_{α,b}(z)` restricted to the supported region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlfArgs {
    alpha: f64,
    btilde: f64,
    z: f64,
}

impl MlfArgs {
    pub fn new(alpha: f64, btilde: f64, z: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1], got {alpha}"
            )));
        }
        if !(btilde > 0.0 && btilde.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "second parameter must be positive, got {btilde}"
            )));
        }
        if z.is_nan() {
            return Err(Error::Domain("argument is NaN".into()));
        }
        if z > 0.0 {
            return Err(Error::Domain(format!(
                "only non-positive arguments are supported, got z = {z}"
            )));
        }
        Ok(Self { alpha, btilde, z })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn btilde(&self) -> f64 {
        self.btilde
    }

    pub fn z(&self) -> f64 {
        self.z
    }
}

/// `E_{α,b}(z)` for validated arguments.
pub fn mlf_e(args: &MlfArgs) -> f64 {
    ml_neg(args.alpha, args.btilde, -args.z)
}

/// Convenience wrapper validating `(alpha, btilde, z)` and evaluating.
pub fn mittag_leffler(alpha: f64, btilde: f64, z: f64) -> Result<f64> {
    MlfArgs::new(alpha, btilde, z).map(|a| mlf_e(&a))
}

/// Which evaluator produced a value; exposed for crossover tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Exact,
    Taylor,
    Asymptotic,
    Integral,
    Recurrence,
}

/// `E_{α,b}(-x)` for `x ≥ 0`; parameters are assumed valid.
pub(crate) fn ml_neg(alpha: f64, b: f64, x: f64) -> f64 {
    ml_neg_with_scheme(alpha, b, x).0
}

pub fn ml_neg_with_scheme(alpha: f64, b: f64, x: f64) -> (f64, Scheme) {
    if x == 0.0 {
        return (rgamma(b), Scheme::Exact);
    }
    if x.is_infinite() {
        return (0.0, Scheme::Exact);
    }
    if alpha == 1.0 && b == 1.0 {
        return ((-x).exp(), Scheme::Exact);
    }
    if x.powf(1.0 / alpha) <= TAYLOR_LIMIT {
        if let Some(v) = taylor(alpha, b, x) {
            return (v, Scheme::Taylor);
        }
    }
    if let Some(v) = asymptotic(alpha, b, x) {
        return (v, Scheme::Asymptotic);
    }
    if alpha == 1.0 {
        if b > 1.0 {
            return (unit_alpha_integral(b, x), Scheme::Integral);
        }
        // E_{1,b}(-x) = 1/Γ(b) - x E_{1,b+1}(-x)
        return (rgamma(b) - x * ml_neg(1.0, b + 1.0, x), Scheme::Recurrence);
    }
    if b < 1.0 + alpha {
        return (hankel_integral(alpha, b, x), Scheme::Integral);
    }
    (
        (rgamma(b - alpha) - ml_neg(alpha, b - alpha, x)) / x,
        Scheme::Recurrence,
    )
}

/// Taylor series of `E_{α,b}(-x)`; `None` when cancellation is excessive.
pub(crate) fn taylor(alpha: f64, b: f64, x: f64) -> Option<f64> {
    let ln_x = x.ln();
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    let mut prev = f64::INFINITY;
    for k in 0..10_000usize {
        let kf = k as f64;
        let mag = (kf * ln_x - ln_gamma(alpha * kf + b)).exp();
        sum += if k % 2 == 0 { mag } else { -mag };
        abs_sum += mag;
        if k > 0 && mag < prev && mag <= 1e-17 * sum.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        prev = mag;
    }
    if sum != 0.0 && abs_sum <= TAYLOR_CANCELLATION * sum.abs() {
        Some(sum)
    } else {
        None
    }
}

fn asymptotic(alpha: f64, b: f64, x: f64) -> Option<f64> {
    let ln_x = x.ln();
    let mut sum = 0.0;
    let mut prev_envelope = f64::INFINITY;
    let mut converged = false;
    for k in 1..2_000usize {
        let kf = k as f64;
        let y = b - alpha * kf;
        // magnitude without the sin(πy) factor, smooth in k
        let envelope = if y > 0.0 {
            -kf * ln_x - ln_gamma(y)
        } else {
            -kf * ln_x + ln_gamma(1.0 - y) - PI.ln()
        };
        if envelope > prev_envelope && k > 2 {
            return None;
        }
        prev_envelope = envelope;
        let (sign, ln_mag) = ln_abs_rgamma(y);
        if sign != 0.0 {
            let term = if k % 2 == 1 { 1.0 } else { -1.0 } * sign * (ln_mag - kf * ln_x).exp();
            sum += term;
        }
        if sum != 0.0 && envelope.exp() <= ASYMPTOTIC_EPS * sum.abs() {
            converged = true;
            break;
        }
    }
    if !converged {
        return None;
    }
    if alpha > 2.0 / 3.0 {
        let branch = ((1.0 - b) / alpha * ln_x + x.powf(1.0 / alpha) * (PI / alpha).cos()).exp()
            / alpha;
        if branch > ASYMPTOTIC_EPS * sum.abs() {
            return None;
        }
    }
    Some(sum)
}

fn hankel_integral(alpha: f64, b: f64, x: f64) -> f64 {
    let p = (1.0 - b) / alpha;
    let inv_alpha = 1.0 / alpha;
    // u² + 2u cos(απ) + 1 = (u - 1)² + 4u cos²(απ/2), accurate as α → 1
    let c2 = 4.0 * sinpi((1.0 - alpha) / 2.0).powi(2);
    let s1 = sinpi(1.0 - b);
    let s2 = sinpi(1.0 - b + alpha);
    let integrand = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let damp = (-(x * u).powf(inv_alpha)).exp();
        if damp == 0.0 {
            return 0.0;
        }
        u.powf(p) * damp * (u * s1 + s2) / ((u - 1.0) * (u - 1.0) + c2 * u)
    };

    // near-pole half width of the denominator around u = 1
    let width = c2.sqrt();
    let mut points = vec![0.0, 1.0 / x, 8f64.powf(alpha) / x, 40f64.powf(alpha) / x, 1.0, 2.0];
    if width < 0.5 {
        for m in [0.25, 1.0, 4.0, 20.0, 100.0, 1e3, 1e4] {
            points.push((1.0 - m * width).max(0.0));
            points.push(1.0 + m * width);
        }
    }
    points.retain(|p| p.is_finite() && *p >= 0.0);
    points.sort_by(f64::total_cmp);
    points.dedup();
    let upper = *points.last().unwrap();

    let tol = Tolerance::relative(QUAD_REL_TOL);
    let body = integrate_points(integrand, &points, tol).value;
    let tail_tol = Tolerance {
        abs: 1e-3 * QUAD_REL_TOL * body.abs(),
        ..tol
    };
    let tail = integrate_to_infinity(integrand, upper, tail_tol).value;
    (p * x.ln()).exp() / (alpha * PI) * (body + tail)
}

fn unit_alpha_integral(b: f64, x: f64) -> f64 {
    // in r = 1 - s the endpoint singularity sits at r = 0, where r is exact
    let expo = b - 2.0;
    let f = |r: f64| (-x * (1.0 - r)).exp() * r.powf(expo);
    let mut points = vec![0.0, 1.0];
    if x > 1.0 {
        points.push((1.0 - 1.0 / x).max(0.5));
        points.push((1.0 - 30.0 / x).max(0.25));
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    rgamma(b - 1.0) * integrate_points(f, &points, Tolerance::relative(QUAD_REL_TOL)).value
}
