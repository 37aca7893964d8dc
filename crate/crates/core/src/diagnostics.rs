//! Model checks for the exceedance sequences: autocorrelation of the logs,
//! the empirical copula of (duration, excess) pairs, and Mittag-Leffler QQ
//! points.

use serde::{Deserialize, Serialize};

use crate::distribution::ml_quantile;
use crate::error::{Error, Result};
use crate::estimators::logmoment_core;
use crate::series::ExceedanceSeries;

/// Sample autocorrelations with the white-noise band `±1.96/√m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Acf {
    /// Entry `h` is the lag-`h` autocorrelation; entry 0 is 1.
    pub values: Vec<f64>,
    pub band: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QqPoints {
    /// `(theoretical, empirical)` quantile pairs.
    pub points: Vec<(f64, f64)>,
    pub beta_used: f64,
    pub sigma_used: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub acf_durations: Acf,
    pub acf_excesses: Acf,
    pub copula: Vec<(f64, f64)>,
    pub qq: QqPoints,
}

/// Sample autocorrelation of `ln(values)` up to `max_lag`.
pub fn acf_log(values: &[f64], max_lag: usize) -> Result<Acf> {
    if let Some(bad) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::Domain(format!("values must be positive, found {bad}")));
    }
    let m = values.len();
    if max_lag >= m {
        return Err(Error::InsufficientData {
            needed: max_lag + 1,
            got: m,
        });
    }
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let mean = logs.iter().sum::<f64>() / m as f64;
    let c: Vec<f64> = logs.iter().map(|l| l - mean).collect();
    let c0: f64 = c.iter().map(|v| v * v).sum();
    if !(c0 > 0.0) {
        return Err(Error::DegenerateSample("constant log-values".into()));
    }
    let values = (0..=max_lag)
        .map(|h| {
            if h == 0 {
                1.0
            } else {
                c[..m - h].iter().zip(&c[h..]).map(|(a, b)| a * b).sum::<f64>() / c0
            }
        })
        .collect();
    Ok(Acf {
        values,
        band: 1.96 / (m as f64).sqrt(),
    })
}

/// Ranks `1..=m`, ties receiving their average rank.
fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Pseudo-observations `(rank(xᵢ)/(m+1), rank(yᵢ)/(m+1))`.
pub fn empirical_copula(x: &[f64], y: &[f64]) -> Result<Vec<(f64, f64)>> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: x.len(),
        });
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::Domain("NaN in copula input".into()));
    }
    let denom = x.len() as f64 + 1.0;
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    Ok(rx.iter().zip(&ry).map(|(a, b)| (a / denom, b / denom)).collect())
}

/// QQ points against `ML(β̂, σ̂)` from the log-moment fit, at plotting
/// positions `i/(m+1)`.
pub fn ml_qq_points(sample: &[f64]) -> Result<QqPoints> {
    if sample.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: sample.len(),
        });
    }
    let fit = logmoment_core(sample)?;
    let mut empirical = sample.to_vec();
    empirical.sort_by(f64::total_cmp);
    let denom = sample.len() as f64 + 1.0;
    let points = empirical
        .iter()
        .enumerate()
        .map(|(i, &e)| Ok((ml_quantile((i + 1) as f64 / denom, &fit.params)?, e)))
        .collect::<Result<Vec<_>>>()?;
    Ok(QqPoints {
        points,
        beta_used: fit.beta(),
        sigma_used: fit.sigma(),
    })
}

/// All three checks for one exceedance series.
pub fn diagnose(ex: &ExceedanceSeries, max_lag: usize) -> Result<DiagnosticReport> {
    let lag = max_lag.min(ex.len().saturating_sub(1));
    Ok(DiagnosticReport {
        acf_durations: acf_log(&ex.durations, lag)?,
        acf_excesses: acf_log(&ex.excesses, lag)?,
        copula: empirical_copula(&ex.durations, &ex.excesses)?,
        qq: ml_qq_points(&ex.durations)?,
    })
}
