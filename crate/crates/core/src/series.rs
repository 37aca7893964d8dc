//! Event series and threshold exceedances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observed path of a marked renewal process: event times with magnitudes.
///
/// `origin` is the start of observation. The first inter-exceedance duration
/// is measured from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSeries {
    times: Vec<f64>,
    magnitudes: Vec<f64>,
    origin: f64,
}

impl EventSeries {
    /// Series observed from `min(0, times[0])`.
    pub fn new(times: Vec<f64>, magnitudes: Vec<f64>) -> Result<Self> {
        let origin = times.first().map_or(0.0, |&t| t.min(0.0));
        Self::with_origin(times, magnitudes, origin)
    }

    pub fn with_origin(times: Vec<f64>, magnitudes: Vec<f64>, origin: f64) -> Result<Self> {
        if times.len() != magnitudes.len() {
            return Err(Error::InvalidParameter(format!(
                "{} times but {} magnitudes",
                times.len(),
                magnitudes.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: times.len(),
            });
        }
        if !origin.is_finite() {
            return Err(Error::InvalidParameter("origin must be finite".into()));
        }
        if let Some(i) = times
            .iter()
            .chain(&magnitudes)
            .position(|v| !v.is_finite())
        {
            return Err(Error::Domain(format!(
                "non-finite value at position {}",
                i % times.len()
            )));
        }
        if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Unsorted { index: i + 1 });
        }
        if times[0] < origin {
            return Err(Error::InvalidParameter(format!(
                "first event at {} precedes origin {origin}",
                times[0]
            )));
        }
        Ok(Self {
            times,
            magnitudes,
            origin,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    /// Waiting times `W_k = T_k - T_{k-1}` with `T_0` the origin.
    pub fn waiting_times(&self) -> Vec<f64> {
        let mut prev = self.origin;
        self.times
            .iter()
            .map(|&t| {
                let w = t - prev;
                prev = t;
                w
            })
            .collect()
    }

    /// Magnitudes sorted in decreasing order.
    pub fn sorted_magnitudes_desc(&self) -> Vec<f64> {
        let mut m = self.magnitudes.clone();
        m.sort_by(|a, b| b.total_cmp(a));
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ExtractOptions {
    /// Discard the first duration (measured from the origin rather than from
    /// a previous crossing) together with its excess.
    pub drop_first: bool,
}

/// Inter-exceedance durations and excesses above a threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceSeries {
    pub threshold: f64,
    /// Order-statistic index when the threshold came from [`order_threshold`].
    pub k: Option<usize>,
    pub durations: Vec<f64>,
    pub excesses: Vec<f64>,
    /// Times of the crossings that the durations end at.
    pub crossing_times: Vec<f64>,
    /// Number of crossings over the number of events.
    pub p_hat: f64,
    /// Events with magnitude exactly equal to the threshold (not crossings).
    pub ties: usize,
    /// The first duration was dropped, by request or because it was zero.
    pub first_dropped: bool,
    origin: f64,
}

impl ExceedanceSeries {
    pub fn len(&self) -> usize {
        self.durations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.durations.is_empty()
    }

    /// The thinned process as an event series: crossing times marked by
    /// their excesses. Extracting from it at `ℓ₂ - ℓ₁` matches extraction from
    /// the original series at `ℓ₂`.
    pub fn to_event_series(&self) -> Result<EventSeries> {
        EventSeries::with_origin(self.crossing_times.clone(), self.excesses.clone(), self.origin)
    }
}

/// Durations between strict exceedances `J > ℓ`, the first measured from the
/// series origin.
pub fn extract_exceedances(series: &EventSeries, ell: f64) -> Result<ExceedanceSeries> {
    extract_exceedances_with(series, ell, ExtractOptions::default())
}

pub fn extract_exceedances_with(
    series: &EventSeries,
    ell: f64,
    opts: ExtractOptions,
) -> Result<ExceedanceSeries> {
    if !ell.is_finite() {
        return Err(Error::InvalidParameter(format!("threshold must be finite, got {ell}")));
    }
    let mut crossing_times = Vec::new();
    let mut excesses = Vec::new();
    let mut ties = 0;
    for (&t, &j) in series.times.iter().zip(&series.magnitudes) {
        if j > ell {
            crossing_times.push(t);
            excesses.push(j - ell);
        } else if j == ell {
            ties += 1;
        }
    }
    if crossing_times.is_empty() {
        return Err(Error::NoCrossings { threshold: ell });
    }
    let p_hat = crossing_times.len() as f64 / series.len() as f64;

    let mut durations = Vec::with_capacity(crossing_times.len());
    let mut prev = series.origin;
    for &t in &crossing_times {
        durations.push(t - prev);
        prev = t;
    }

    let first_dropped = opts.drop_first || durations[0] <= 0.0;
    if first_dropped {
        durations.remove(0);
        excesses.remove(0);
        crossing_times.remove(0);
    }
    let origin = if first_dropped {
        // later durations are measured from the dropped crossing
        series.times[series.magnitudes.iter().position(|&j| j > ell).unwrap()]
    } else {
        series.origin
    };

    Ok(ExceedanceSeries {
        threshold: ell,
        k: None,
        durations,
        excesses,
        crossing_times,
        p_hat,
        ties,
        first_dropped,
        origin,
    })
}

/// The `k`-th largest magnitude (`k = 1` is the maximum).
pub fn order_threshold(series: &EventSeries, k: usize) -> Result<f64> {
    if k == 0 || k > series.len() {
        return Err(Error::InvalidParameter(format!(
            "order index {k} outside 1..={}",
            series.len()
        )));
    }
    let mut m = series.magnitudes.clone();
    let (_, kth, _) = m.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
    Ok(*kth)
}

/// Exceedances above the `k`-th largest magnitude.
pub fn extract_at_order(
    series: &EventSeries,
    k: usize,
    opts: ExtractOptions,
) -> Result<ExceedanceSeries> {
    let ell = order_threshold(series, k)?;
    let mut ex = extract_exceedances_with(series, ell, opts)?;
    ex.k = Some(k);
    Ok(ex)
}
