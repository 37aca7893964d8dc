//! Estimation for Mittag-Leffler samples: log-moment and maximum likelihood
//! fits, the likelihood-ratio test against the exponential law, and the
//! QQ tail-exponent estimator.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::distribution::{ln_pdf_unchecked, MlParams};
use crate::error::{Error, Result};
use crate::special::EULER_GAMMA;

/// Lower clamp for the tail parameter.
pub const BETA_FLOOR: f64 = 1e-3;
const Z_95: f64 = 1.959_963_984_540_054;
/// ψ''(1) = -2ζ(3), third cumulant of ln T (independent of β).
const LOG_THIRD_CUMULANT: f64 = -2.404_113_806_319_188_5;
const GRAD_TOL: f64 = 1e-8;
/// `logit` coordinate beyond which `β > 1 - 1e-6` counts as the boundary.
const BOUNDARY_THETA: f64 = 13.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FitMethod {
    #[default]
    #[serde(rename = "logmoment")]
    LogMoment,
    Mle,
}

impl std::fmt::Display for FitMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FitMethod::LogMoment => "logmoment",
            FitMethod::Mle => "mle",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlFit {
    pub params: MlParams,
    /// 95% interval for β, clipped to `(0, 1]`.
    pub ci_beta: (f64, f64),
    /// 95% interval for σ (normal on the log scale).
    pub ci_sigma: (f64, f64),
    pub loglik: f64,
    pub method: FitMethod,
    pub n: usize,
    /// Asymptotic covariance of `(β̂, ln σ̂)`.
    pub covariance: [[f64; 2]; 2],
    /// Raw moment equation gave β̂ outside `(BETA_FLOOR, 1]`.
    pub beta_clamped: bool,
    /// MLE sits on the exponential boundary `β = 1`.
    pub at_boundary: bool,
    /// Gradient norm of the mean log-likelihood in the optimizer's coordinates.
    pub grad_norm: Option<f64>,
}

impl MlFit {
    pub fn beta(&self) -> f64 {
        self.params.beta()
    }

    pub fn sigma(&self) -> f64 {
        self.params.sigma()
    }

    /// Standard error of `ln(k^{1/β̂} σ̂)`, the log of the normalized scale.
    pub fn log_normalized_scale_sd(&self, k: f64) -> f64 {
        let c = self.covariance;
        let b = self.beta();
        // d/dβ (ln σ + ln k / β) = -ln k / β²
        let db = -k.ln() / (b * b);
        (c[1][1] + db * db * c[0][0] + 2.0 * db * c[0][1]).max(0.0).sqrt()
    }
}

fn check_sample(sample: &[f64], min_len: usize) -> Result<()> {
    if sample.len() < min_len {
        return Err(Error::InsufficientData {
            needed: min_len,
            got: sample.len(),
        });
    }
    if let Some(bad) = sample.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::Domain(format!(
            "sample values must be positive and finite, found {bad}"
        )));
    }
    Ok(())
}

/// Log-likelihood of `sample` under `ML(β, σ)`.
pub fn loglik(sample: &[f64], p: &MlParams) -> f64 {
    if p.is_exponential() {
        let s = p.sigma();
        return -(sample.len() as f64) * s.ln() - sample.iter().sum::<f64>() / s;
    }
    // collect first so the summation order does not depend on thread scheduling
    let terms: Vec<f64> = sample.par_iter().map(|&t| ln_pdf_unchecked(t, p)).collect();
    terms.iter().sum()
}

/// Variance of ln T under `ML(β, ·)`: `(π²/6)(2/β² - 1)`.
fn log_variance(beta: f64) -> f64 {
    PI * PI / 6.0 * (2.0 / (beta * beta) - 1.0)
}

fn interval_beta(beta: f64, var: f64) -> (f64, f64) {
    let half = Z_95 * var.max(0.0).sqrt();
    ((beta - half).max(BETA_FLOOR).min(beta), (beta + half).min(1.0).max(beta))
}

fn interval_log(sigma: f64, var_log: f64) -> (f64, f64) {
    let half = Z_95 * var_log.max(0.0).sqrt();
    (sigma * (-half).exp(), sigma * half.exp())
}

/// Log-moment fit without the likelihood evaluation; `loglik` is NaN.
pub(crate) fn logmoment_core(sample: &[f64]) -> Result<MlFit> {
    check_sample(sample, 2)?;
    let n = sample.len();
    let nf = n as f64;
    let logs: Vec<f64> = sample.iter().map(|t| t.ln()).collect();
    let mean = logs.iter().sum::<f64>() / nf;
    let var = logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    if !(var > 0.0) {
        return Err(Error::DegenerateSample(
            "log-sample has zero variance".into(),
        ));
    }
    let raw_beta = PI * (2.0 / (6.0 * var + PI * PI)).sqrt();
    let beta = raw_beta.clamp(BETA_FLOOR, 1.0);
    let beta_clamped = beta != raw_beta;
    let log_sigma = mean + EULER_GAMMA;
    let sigma = log_sigma.exp();

    // delta method on (sample mean, sample variance) of ln T
    let k2 = log_variance(beta);
    let k4 = PI.powi(4) / 15.0 * (2.0 / beta.powi(4) - 1.0);
    let slope = -3.0 * PI * 2f64.sqrt() * (6.0 * k2 + PI * PI).powf(-1.5);
    let var_beta = slope * slope * (k4 + 2.0 * k2 * k2) / nf;
    let var_log_sigma = k2 / nf;
    let cov = slope * LOG_THIRD_CUMULANT / nf;

    Ok(MlFit {
        params: MlParams::new(beta, sigma)?,
        ci_beta: interval_beta(beta, var_beta),
        ci_sigma: interval_log(sigma, var_log_sigma),
        loglik: f64::NAN,
        method: FitMethod::LogMoment,
        n,
        covariance: [[var_beta, cov], [cov, var_log_sigma]],
        beta_clamped,
        at_boundary: false,
        grad_norm: None,
    })
}

/// Method of log-transformed moments.
///
/// With `m̄`, `s²` the mean and variance of `ln T`:
/// `β̂ = π √(2 / (6s² + π²))`, `ln σ̂ = m̄ + γ`.
pub fn logmoment_fit(sample: &[f64]) -> Result<MlFit> {
    let mut fit = logmoment_core(sample)?;
    fit.loglik = loglik(sample, &fit.params);
    Ok(fit)
}

// Unconstrained coordinates: β = ε + (1-ε)·logistic(θ₀), σ = exp(θ₁).
fn to_theta(p: &MlParams) -> [f64; 2] {
    let s = ((p.beta() - BETA_FLOOR) / (1.0 - BETA_FLOOR)).clamp(1e-12, 1.0 - 1e-12);
    [(s / (1.0 - s)).ln(), p.sigma().ln()]
}

fn from_theta(theta: [f64; 2]) -> (f64, f64) {
    let s = 1.0 / (1.0 + (-theta[0]).exp());
    (BETA_FLOOR + (1.0 - BETA_FLOOR) * s, theta[1].exp())
}

fn dbeta_dtheta(theta0: f64) -> f64 {
    let s = 1.0 / (1.0 + (-theta0).exp());
    (1.0 - BETA_FLOOR) * s * (1.0 - s)
}

struct Objective<'a> {
    sample: &'a [f64],
    evaluations: usize,
}

impl Objective<'_> {
    fn mean_loglik(&mut self, theta: [f64; 2]) -> f64 {
        self.evaluations += 1;
        let (beta, sigma) = from_theta(theta);
        match MlParams::new(beta, sigma) {
            Ok(p) => {
                let v = loglik(self.sample, &p) / self.sample.len() as f64;
                if v.is_finite() {
                    v
                } else {
                    f64::NEG_INFINITY
                }
            }
            Err(_) => f64::NEG_INFINITY,
        }
    }

    /// Gradient from the fourth-order central stencil, Hessian from the
    /// second-order 3×3 stencil.
    fn derivatives(&mut self, theta: [f64; 2], f0: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        // larger than the quadrature noise floor of the likelihood allows for h⁴ truncation
        let h = 1e-3;
        let at = |d0: f64, d1: f64| [theta[0] + d0 * h, theta[1] + d1 * h];
        let fpz = self.mean_loglik(at(1.0, 0.0));
        let fmz = self.mean_loglik(at(-1.0, 0.0));
        let fzp = self.mean_loglik(at(0.0, 1.0));
        let fzm = self.mean_loglik(at(0.0, -1.0));
        let fpp = self.mean_loglik(at(1.0, 1.0));
        let fpm = self.mean_loglik(at(1.0, -1.0));
        let fmp = self.mean_loglik(at(-1.0, 1.0));
        let fmm = self.mean_loglik(at(-1.0, -1.0));
        let f2z = self.mean_loglik(at(2.0, 0.0));
        let fm2z = self.mean_loglik(at(-2.0, 0.0));
        let fz2 = self.mean_loglik(at(0.0, 2.0));
        let fzm2 = self.mean_loglik(at(0.0, -2.0));
        let g = [
            (8.0 * (fpz - fmz) - (f2z - fm2z)) / (12.0 * h),
            (8.0 * (fzp - fzm) - (fz2 - fzm2)) / (12.0 * h),
        ];
        let h00 = (fpz - 2.0 * f0 + fmz) / (h * h);
        let h11 = (fzp - 2.0 * f0 + fzm) / (h * h);
        let h01 = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
        (g, [[h00, h01], [h01, h11]])
    }
}

/// Maximum likelihood fit, started from `init` or the log-moment estimate.
///
/// Newton's method with finite-difference derivatives in the coordinates
/// `(logit β, ln σ)`, backtracking on the mean log-likelihood. Returns
/// [`Error::NotConverged`] carrying the best point when the gradient norm
/// stays above `1e-8`.
pub fn mle_fit(sample: &[f64], init: Option<MlParams>) -> Result<MlFit> {
    check_sample(sample, 2)?;
    let n = sample.len();
    let nf = n as f64;
    let start = match init {
        Some(p) => p,
        None => logmoment_core(sample)?.params,
    };
    let mut obj = Objective {
        sample,
        evaluations: 0,
    };

    let mut theta = to_theta(&start);
    theta[0] = theta[0].min(BOUNDARY_THETA - 4.0);
    let mut f = obj.mean_loglik(theta);
    let init_loglik = f * nf;
    let (mut grad, mut hess) = obj.derivatives(theta, f);
    let mut grad_norm = grad[0].hypot(grad[1]);

    let mut hit_boundary = false;
    for _ in 0..200 {
        if grad_norm < GRAD_TOL {
            break;
        }
        if theta[0] > BOUNDARY_THETA && grad[0] > 0.0 {
            // still climbing towards β = 1
            hit_boundary = true;
            break;
        }
        let det = hess[0][0] * hess[1][1] - hess[0][1] * hess[1][0];
        let newton_ok = hess[0][0] < 0.0 && det > 0.0;
        let mut step = if newton_ok {
            [
                -(hess[1][1] * grad[0] - hess[0][1] * grad[1]) / det,
                -(-hess[1][0] * grad[0] + hess[0][0] * grad[1]) / det,
            ]
        } else {
            // scaled ascent direction
            let d0 = hess[0][0].abs().max(1e-2);
            let d1 = hess[1][1].abs().max(1e-2);
            [grad[0] / d0, grad[1] / d1]
        };
        let len = step[0].hypot(step[1]);
        if len > 2.0 {
            step = [2.0 * step[0] / len, 2.0 * step[1] / len];
        }

        let mut accepted = false;
        let mut scale = 1.0;
        // predicted gain of a full Newton step; below the resolution of the
        // likelihood itself the step is taken without a line search
        let gain = grad[0] * step[0] + grad[1] * step[1];
        if newton_ok && gain < 1e-13 {
            theta = [theta[0] + step[0], theta[1] + step[1]];
            f = obj.mean_loglik(theta);
            accepted = true;
        }
        for _ in 0..if accepted { 0 } else { 40 } {
            let cand = [theta[0] + scale * step[0], theta[1] + scale * step[1]];
            let fc = obj.mean_loglik(cand);
            if fc > f {
                theta = cand;
                f = fc;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        (grad, hess) = obj.derivatives(theta, f);
        grad_norm = grad[0].hypot(grad[1]);
        if !accepted {
            break;
        }
    }

    let (beta, sigma) = from_theta(theta);
    let mut params = MlParams::new(beta, sigma)?;
    let mut loglik_best = f * nf;
    let mut at_boundary = false;

    // exponential boundary: compare against the closed-form β = 1 fit, whose
    // projected gradient vanishes at σ = sample mean
    let mean = sample.iter().sum::<f64>() / nf;
    let expo = MlParams::new(1.0, mean)?;
    let expo_loglik = loglik(sample, &expo);
    if hit_boundary || expo_loglik >= loglik_best {
        if expo_loglik >= loglik_best {
            params = expo;
            loglik_best = expo_loglik;
            grad_norm = 0.0;
        }
        at_boundary = true;
    }
    if init_loglik > loglik_best {
        params = start;
        loglik_best = init_loglik;
        at_boundary = start.is_exponential();
    }

    // observed information in (β, ln σ) from the θ-Hessian of the total loglik
    let jac = if at_boundary {
        1.0
    } else {
        dbeta_dtheta(theta[0])
    };
    let h = [
        [hess[0][0] * nf, hess[0][1] * nf],
        [hess[1][0] * nf, hess[1][1] * nf],
    ];
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    let covariance = if det > 0.0 && h[0][0] < 0.0 && !at_boundary {
        let inv = [
            [-h[1][1] / det, h[0][1] / det],
            [h[1][0] / det, -h[0][0] / det],
        ];
        [
            [inv[0][0] * jac * jac, inv[0][1] * jac],
            [inv[1][0] * jac, inv[1][1]],
        ]
    } else {
        // boundary or indefinite curvature: fall back to the log-moment asymptotics
        logmoment_core(sample)?.covariance
    };

    let fit = MlFit {
        params,
        ci_beta: interval_beta(params.beta(), covariance[0][0]),
        ci_sigma: interval_log(params.sigma(), covariance[1][1]),
        loglik: loglik_best,
        method: FitMethod::Mle,
        n,
        covariance,
        beta_clamped: false,
        at_boundary,
        grad_norm: Some(grad_norm),
    };
    if !fit.loglik.is_finite() {
        return Err(Error::NotConverged {
            best: Box::new(fit),
            grad_norm,
        });
    }
    if grad_norm >= GRAD_TOL && !at_boundary {
        return Err(Error::NotConverged {
            best: Box::new(fit),
            grad_norm,
        });
    }
    Ok(fit)
}

/// Fit with the chosen method.
pub fn fit(sample: &[f64], method: FitMethod) -> Result<MlFit> {
    match method {
        FitMethod::LogMoment => logmoment_fit(sample),
        FitMethod::Mle => mle_fit(sample, None),
    }
}

// Log-moment fits skip the likelihood evaluation; used by the stability scan.
pub(crate) fn fit_core(sample: &[f64], method: FitMethod) -> Result<MlFit> {
    match method {
        FitMethod::LogMoment => logmoment_core(sample),
        FitMethod::Mle => mle_fit(sample, None),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodRatio {
    pub deviance: f64,
    pub p_value: f64,
    pub loglik_ml: f64,
    pub loglik_exp: f64,
    pub ml_fit: MlFit,
}

/// Likelihood-ratio test of `H0: β = 1` (exponential) against `ML(β, σ)`,
/// referred to `χ²₁`.
pub fn lr_test_exponential(sample: &[f64]) -> Result<LikelihoodRatio> {
    check_sample(sample, 10)?;
    let nf = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / nf;
    let loglik_exp = -nf * mean.ln() - nf;
    let ml_fit = mle_fit(sample, None)?;
    let loglik_ml = ml_fit.loglik.max(loglik_exp);
    let deviance = (2.0 * (loglik_ml - loglik_exp)).max(0.0);
    // P[χ²₁ > d] = erfc(√(d/2))
    let p_value = erfc((deviance / 2.0).sqrt());
    Ok(LikelihoodRatio {
        deviance,
        p_value,
        loglik_ml,
        loglik_exp,
        ml_fit,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub alpha_hat: f64,
    pub cutoff: usize,
    pub per_cutoff: Vec<(usize, f64)>,
}

/// QQ tail-exponent estimator: least-squares slope of the log order
/// statistics against unit-exponential quantiles at plotting positions
/// `i/(n+1)`, using the `cutoff` largest observations; `α̂ = 1/slope`.
pub fn qq_tail_estimate(sample: &[f64], cutoffs: &[usize]) -> Result<TailEstimate> {
    check_sample(sample, 3)?;
    if cutoffs.is_empty() {
        return Err(Error::InvalidParameter("no cutoffs requested".into()));
    }
    let n = sample.len();
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let x: Vec<f64> = (1..=n).map(|i| -(-(i as f64) / (nf + 1.0)).ln_1p()).collect();
    let y: Vec<f64> = sorted.iter().map(|v| v.ln()).collect();

    let mut per_cutoff = Vec::with_capacity(cutoffs.len());
    for &m in cutoffs {
        if m < 3 || m > n {
            return Err(Error::InsufficientData { needed: m.max(3), got: n });
        }
        let xs = &x[n - m..];
        let ys = &y[n - m..];
        let mf = m as f64;
        let mx = xs.iter().sum::<f64>() / mf;
        let my = ys.iter().sum::<f64>() / mf;
        let sxy: f64 = xs.iter().zip(ys).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = xs.iter().map(|a| (a - mx).powi(2)).sum();
        let slope = sxy / sxx;
        if !(slope > 0.0) {
            return Err(Error::DegenerateSample(format!(
                "non-positive QQ slope at cutoff {m}"
            )));
        }
        per_cutoff.push((m, 1.0 / slope));
    }
    let (cutoff, alpha_hat) = *per_cutoff.iter().max_by_key(|(m, _)| *m).unwrap();
    Ok(TailEstimate {
        alpha_hat,
        cutoff,
        per_cutoff,
    })
}
