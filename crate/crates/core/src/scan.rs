//! Stability scan over order-statistic thresholds and selection of the
//! limiting parameters `(β₀, σ₀)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::MlParams;
use crate::error::{Error, Result};
use crate::estimators::{fit_core, FitMethod, MlFit};
use crate::series::{extract_exceedances_with, EventSeries, ExtractOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub k: usize,
    pub ell: f64,
    /// Number of durations the fit used.
    pub n_durations: usize,
    pub beta_hat: f64,
    pub beta_lo: f64,
    pub beta_hi: f64,
    pub sigma_hat: f64,
    /// `k^{1/β̂} σ̂`.
    pub sigma_norm: f64,
    /// 95% interval for `sigma_norm`.
    pub sigma_lo: f64,
    pub sigma_hi: f64,
    pub ties: usize,
    pub first_dropped: bool,
    pub error: Option<String>,
}

impl ScanRow {
    fn failed(k: usize, ell: f64, n_durations: usize, msg: String) -> Self {
        Self {
            k,
            ell,
            n_durations,
            beta_hat: f64::NAN,
            beta_lo: f64::NAN,
            beta_hi: f64::NAN,
            sigma_hat: f64::NAN,
            sigma_norm: f64::NAN,
            sigma_lo: f64::NAN,
            sigma_hi: f64::NAN,
            ties: 0,
            first_dropped: false,
            error: Some(msg),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityScan {
    pub rows: Vec<ScanRow>,
    pub k_min: usize,
    pub k_max: usize,
    pub method: FitMethod,
}

impl StabilityScan {
    /// Default selection window: the upper half of the scanned `k` range.
    pub fn default_window(&self) -> (usize, usize) {
        ((self.k_min + self.k_max).div_ceil(2), self.k_max)
    }

    pub fn rows_in(&self, window: (usize, usize)) -> impl Iterator<Item = &ScanRow> {
        self.rows
            .iter()
            .filter(move |r| r.k >= window.0 && r.k <= window.1)
    }
}

fn scan_row(
    series: &EventSeries,
    sorted_desc: &[f64],
    k: usize,
    method: FitMethod,
    opts: ExtractOptions,
) -> ScanRow {
    let ell = sorted_desc[k - 1];
    let ex = match extract_exceedances_with(series, ell, opts) {
        Ok(ex) => ex,
        Err(e) => return ScanRow::failed(k, ell, 0, e.to_string()),
    };
    let fit: MlFit = match fit_core(&ex.durations, method) {
        Ok(f) => f,
        Err(e) => return ScanRow::failed(k, ell, ex.len(), e.to_string()),
    };
    let kf = k as f64;
    let sigma_norm = kf.powf(1.0 / fit.beta()) * fit.sigma();
    let half = 1.959_963_984_540_054 * fit.log_normalized_scale_sd(kf);
    ScanRow {
        k,
        ell,
        n_durations: ex.len(),
        beta_hat: fit.beta(),
        beta_lo: fit.ci_beta.0,
        beta_hi: fit.ci_beta.1,
        sigma_hat: fit.sigma(),
        sigma_norm,
        sigma_lo: sigma_norm * (-half).exp(),
        sigma_hi: sigma_norm * half.exp(),
        ties: ex.ties,
        first_dropped: ex.first_dropped,
        error: None,
    }
}

/// Fit the inter-exceedance durations at each order-statistic threshold
/// `k_min..=k_max`. Per-row failures are recorded in the row.
pub fn stability_scan(
    series: &EventSeries,
    k_min: usize,
    k_max: usize,
    method: FitMethod,
) -> Result<StabilityScan> {
    stability_scan_with(series, k_min, k_max, method, ExtractOptions::default())
}

pub fn stability_scan_with(
    series: &EventSeries,
    k_min: usize,
    k_max: usize,
    method: FitMethod,
    opts: ExtractOptions,
) -> Result<StabilityScan> {
    if !(3 <= k_min && k_min < k_max && k_max <= series.len()) {
        return Err(Error::InvalidParameter(format!(
            "scan bounds must satisfy 3 <= k_min < k_max <= n = {}, got [{k_min}, {k_max}]",
            series.len()
        )));
    }
    let sorted = series.sorted_magnitudes_desc();
    let rows = (k_min..=k_max)
        .into_par_iter()
        .map(|k| scan_row(series, &sorted, k, method, opts))
        .collect();
    Ok(StabilityScan {
        rows,
        k_min,
        k_max,
        method,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StableParams {
    pub beta0: f64,
    pub sigma0: f64,
    /// Interquartile range of `β̂(k)` over the window.
    pub beta_iqr: (f64, f64),
    /// Interquartile range of `k^{1/β₀} σ̂(k)` over the window.
    pub sigma0_iqr: (f64, f64),
    pub window: (usize, usize),
    /// Rows in the window with a usable fit.
    pub rows_used: usize,
}

fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    // linear interpolation between order statistics
    let h = q * (v.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Medians of `β̂(k)` and of `k^{1/β₀} σ̂(k)` over the window, the latter
/// normalized with the common `β₀`.
pub fn select_stable_params(scan: &StabilityScan, window: (usize, usize)) -> Result<StableParams> {
    if window.0 > window.1 || window.0 < scan.k_min || window.1 > scan.k_max {
        return Err(Error::InvalidParameter(format!(
            "window [{}, {}] outside scan range [{}, {}]",
            window.0, window.1, scan.k_min, scan.k_max
        )));
    }
    let rows: Vec<&ScanRow> = scan
        .rows_in(window)
        .filter(|r| r.is_ok() && r.beta_hat.is_finite() && r.sigma_hat.is_finite())
        .collect();
    if rows.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut betas: Vec<f64> = rows.iter().map(|r| r.beta_hat).collect();
    betas.sort_by(f64::total_cmp);
    let beta0 = quantile_sorted(&betas, 0.5);
    let mut sigmas: Vec<f64> = rows
        .iter()
        .map(|r| (r.k as f64).powf(1.0 / beta0) * r.sigma_hat)
        .collect();
    sigmas.sort_by(f64::total_cmp);
    Ok(StableParams {
        beta0,
        sigma0: quantile_sorted(&sigmas, 0.5),
        beta_iqr: (quantile_sorted(&betas, 0.25), quantile_sorted(&betas, 0.75)),
        sigma0_iqr: (quantile_sorted(&sigmas, 0.25), quantile_sorted(&sigmas, 0.75)),
        window,
        rows_used: rows.len(),
    })
}

/// `ML(β₀, k^{-1/β₀} σ₀)`, the duration law at the `k`-th order statistic.
pub fn fitted_distribution_at(beta0: f64, sigma0: f64, k: usize) -> Result<MlParams> {
    if k == 0 {
        return Err(Error::InvalidParameter("order index must be at least 1".into()));
    }
    let p = MlParams::new(beta0, sigma0)?;
    MlParams::new(beta0, (k as f64).powf(-1.0 / beta0) * p.sigma())
}

/// Least-squares slope of `ln σ̂(k)` on `ln k` over the window.
pub fn scale_slope(scan: &StabilityScan, window: (usize, usize)) -> Result<f64> {
    let pts: Vec<(f64, f64)> = scan
        .rows_in(window)
        .filter(|r| r.is_ok())
        .map(|r| ((r.k as f64).ln(), r.sigma_hat.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: pts.len(),
        });
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_scan() -> StabilityScan {
        let rows = (10..=20)
            .map(|k| {
                let kf = k as f64;
                let sigma_hat = 3e7 * kf.powf(-1.0 / 0.85);
                ScanRow {
                    k,
                    ell: 0.0,
                    n_durations: k - 1,
                    beta_hat: 0.85,
                    beta_lo: 0.8,
                    beta_hi: 0.9,
                    sigma_hat,
                    sigma_norm: 3e7,
                    sigma_lo: 2e7,
                    sigma_hi: 4e7,
                    ties: 0,
                    first_dropped: false,
                    error: None,
                }
            })
            .collect();
        StabilityScan {
            rows,
            k_min: 10,
            k_max: 20,
            method: FitMethod::LogMoment,
        }
    }

    #[test]
    fn constant_rows_select_exactly() {
        let scan = constant_scan();
        let p = select_stable_params(&scan, scan.default_window()).unwrap();
        assert!((p.beta0 - 0.85).abs() < 1e-15);
        assert!((p.sigma0 / 3e7 - 1.0).abs() < 1e-12);
        assert_eq!(scan.default_window(), (15, 20));
        assert_eq!(p.rows_used, 6);
    }

    #[test]
    fn window_errors() {
        let scan = constant_scan();
        assert!(select_stable_params(&scan, (5, 12)).is_err());
        assert!(select_stable_params(&scan, (15, 12)).is_err());
        let mut failed = constant_scan();
        for r in &mut failed.rows {
            r.error = Some("x".into());
        }
        assert!(select_stable_params(&failed, (10, 20)).is_err());
    }

    #[test]
    fn median_ignores_failed_rows() {
        let mut scan = constant_scan();
        scan.rows[7] = ScanRow::failed(17, 0.0, 16, "boom".into());
        let p = select_stable_params(&scan, (15, 20)).unwrap();
        assert_eq!(p.rows_used, 5);
        assert!((p.beta0 - 0.85).abs() < 1e-15);
    }

    #[test]
    fn fitted_distribution_examples() {
        let p = fitted_distribution_at(0.85, 3e7, 1).unwrap();
        assert_eq!(p.sigma(), 3e7);
        let p = fitted_distribution_at(0.8, 1e5, 100).unwrap();
        assert!((p.sigma() - 10f64.powf(2.5)).abs() < 1e-9);
        let p = fitted_distribution_at(1.0, 50.0, 5).unwrap();
        assert!((p.sigma() - 10.0).abs() < 1e-12);
        assert!(fitted_distribution_at(0.8, 1.0, 0).is_err());
        assert!(fitted_distribution_at(1.2, 1.0, 3).is_err());
    }

    #[test]
    fn scale_slope_of_exact_power_law() {
        let scan = constant_scan();
        let s = scale_slope(&scan, (10, 20)).unwrap();
        assert!((s + 1.0 / 0.85).abs() < 1e-12);
    }

    #[test]
    fn two_row_scan_and_bounds() {
        let cfg = crate::sim::SimConfig::new(0.8, 200, 3);
        let s = crate::sim::simulate_mrp(&cfg).unwrap();
        let scan = stability_scan(&s, 20, 21, FitMethod::LogMoment).unwrap();
        assert_eq!(scan.rows.len(), 2);
        assert_eq!(scan.rows[0].n_durations, 19);
        assert!(stability_scan(&s, 2, 10, FitMethod::LogMoment).is_err());
        assert!(stability_scan(&s, 10, 10, FitMethod::LogMoment).is_err());
        assert!(stability_scan(&s, 10, 201, FitMethod::LogMoment).is_err());
    }
}
