//! Event-file ingestion, command configuration and table output.
//!
//! Input is a two-column `time,magnitude` CSV with an optional header.
//! Times are numeric offsets or timestamps; timestamps become seconds since
//! the earliest event. A `# origin: <t>` comment fixes the observation start;
//! without it the earliest event time is used.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::diagnostics::diagnose;
use crate::error::{Error, Result};
use crate::estimators::{fit, lr_test_exponential, FitMethod};
use crate::forecast::{
    conditional_density, conditional_survival, conditional_survival_quantile, hazard_rate,
    PredictiveState,
};
use crate::scan::{
    fitted_distribution_at, select_stable_params, stability_scan_with, StabilityScan,
};
use crate::series::{
    extract_at_order, extract_exceedances_with, EventSeries, ExceedanceSeries, ExtractOptions,
};
use crate::sim::{simulate_mrp, MagnitudeLaw, SimConfig, WaitingLaw};

/// Significant digits of numeric table output.
pub const SIG_DIGITS: usize = 10;

/// Column order of the stability-scan table.
pub const SCAN_COLUMNS: [&str; 11] = [
    "k", "ell", "beta_hat", "beta_lo", "beta_hi", "sigma_hat", "sigma_norm", "sigma_lo",
    "sigma_hi", "n_durations", "flag",
];

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ParseReport {
    pub header: bool,
    pub reordered: bool,
    pub duplicates_merged: usize,
    pub origin_from_file: bool,
}

impl ParseReport {
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.reordered {
            w.push("rows were not in time order and have been sorted".to_string());
        }
        if self.duplicates_merged > 0 {
            w.push(format!(
                "{} rows with duplicate timestamps merged (larger magnitude kept)",
                self.duplicates_merged
            ));
        }
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum TimeValue {
    Number(f64),
    Stamp(NaiveDateTime),
}

fn parse_time(s: &str) -> Option<TimeValue> {
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(TimeValue::Number(v));
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(TimeValue::Stamp(dt.naive_utc()));
    }
    const FORMATS: [&str; 6] = [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M",
        "%Y/%m/%d %H:%M:%S%.f",
        "%d-%b-%Y %H:%M:%S%.f",
    ];
    for f in FORMATS {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, f) {
            return Some(TimeValue::Stamp(dt));
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(TimeValue::Stamp)
}

fn parse_origin_comment(line: &str) -> Option<std::result::Result<f64, String>> {
    let rest = line.trim_start_matches('#').trim();
    let value = rest.strip_prefix("origin:")?.trim();
    Some(
        value
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("bad origin value {value:?}")),
    )
}

/// Parse events from CSV text.
pub fn parse_events_str(text: &str) -> Result<(EventSeries, ParseReport)> {
    let mut report = ParseReport::default();
    let mut errors = Vec::new();
    let mut origin = None;
    let mut rows: Vec<(TimeValue, f64)> = Vec::new();

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut seen_data = false;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let first = record.get(0).unwrap_or("");
        if first.starts_with('#') {
            let joined = record.iter().collect::<Vec<_>>().join(",");
            match parse_origin_comment(&joined) {
                Some(Ok(v)) => origin = Some(v),
                Some(Err(e)) => errors.push((line, e)),
                None => {}
            }
            continue;
        }
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if record.len() < 2 {
            errors.push((line, format!("expected 2 fields, found {}", record.len())));
            continue;
        }
        let time = parse_time(first);
        let magnitude = record[1].parse::<f64>().ok().filter(|v| v.is_finite());
        match (time, magnitude) {
            (Some(t), Some(m)) => rows.push((t, m)),
            _ if !seen_data && time.is_none() && !report.header => report.header = true,
            (None, _) => errors.push((line, format!("unparseable time {first:?}"))),
            (_, None) => errors.push((line, format!("unparseable magnitude {:?}", &record[1]))),
        }
        seen_data = true;
    }
    if !errors.is_empty() {
        return Err(Error::Parse(errors));
    }

    let numeric = rows.iter().filter(|(t, _)| matches!(t, TimeValue::Number(_))).count();
    if numeric != 0 && numeric != rows.len() {
        return Err(Error::Parse(vec![(
            0,
            "mixed numeric and timestamp time columns".to_string(),
        )]));
    }
    let mut events: Vec<(f64, f64)> = if numeric == rows.len() {
        rows.iter()
            .map(|(t, m)| match t {
                TimeValue::Number(v) => (*v, *m),
                TimeValue::Stamp(_) => unreachable!(),
            })
            .collect()
    } else {
        let stamps: Vec<(NaiveDateTime, f64)> = rows
            .iter()
            .map(|(t, m)| match t {
                TimeValue::Stamp(s) => (*s, *m),
                TimeValue::Number(_) => unreachable!(),
            })
            .collect();
        let first = stamps.iter().map(|s| s.0).min();
        stamps
            .iter()
            .map(|(s, m)| {
                let d = *s - first.unwrap();
                let secs = d.num_seconds() as f64
                    + f64::from(d.subsec_nanos()) * 1e-9;
                (secs, *m)
            })
            .collect()
    };

    if events.windows(2).any(|w| w[1].0 < w[0].0) {
        report.reordered = true;
        events.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(events.len());
    for (t, m) in events {
        match merged.last_mut() {
            Some(last) if last.0 == t => {
                last.1 = last.1.max(m);
                report.duplicates_merged += 1;
            }
            _ => merged.push((t, m)),
        }
    }
    if merged.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: merged.len(),
        });
    }
    report.origin_from_file = origin.is_some();
    let origin = origin.unwrap_or(merged[0].0);
    let (times, magnitudes) = merged.into_iter().unzip();
    Ok((EventSeries::with_origin(times, magnitudes, origin)?, report))
}

/// Parse an event file.
pub fn parse_events(path: &Path) -> Result<(EventSeries, ParseReport)> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    parse_events_str(&text)
}

/// Events as CSV with full round-trip precision and an origin comment.
pub fn write_events<W: Write>(series: &EventSeries, mut out: W) -> Result<()> {
    writeln!(out, "# origin: {:?}", series.origin())?;
    writeln!(out, "time,magnitude")?;
    for (t, m) in series.times().iter().zip(series.magnitudes()) {
        writeln!(out, "{t:?},{m:?}")?;
    }
    Ok(())
}

/// Round to [`SIG_DIGITS`] significant digits.
pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{:.*e}", SIG_DIGITS - 1, v).parse().unwrap_or(v)
}

/// Shortest text of `v` rounded to [`SIG_DIGITS`] significant digits.
pub fn format_num(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    let r = round_sig(v);
    let a = r.abs();
    if r == 0.0 || (1e-4..1e15).contains(&a) || a.is_infinite() {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format_num(*v),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(round_sig(*v)),
            Cell::Num(_) => Value::Null,
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// A named table with a fixed column order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    Value::Object(
                        self.columns
                            .iter()
                            .cloned()
                            .zip(row.iter().map(Cell::json))
                            .collect(),
                    )
                })
                .collect(),
        )
    }
}

/// Round every float in a JSON value to [`SIG_DIGITS`] digits.
pub fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                *v = json!(round_sig(x));
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_json),
        Value::Object(o) => o.values_mut().for_each(round_json),
        _ => {}
    }
}

pub fn scan_table(scan: &StabilityScan) -> Table {
    let mut t = Table::new("scan", &SCAN_COLUMNS);
    for r in &scan.rows {
        t.push(vec![
            r.k.into(),
            r.ell.into(),
            r.beta_hat.into(),
            r.beta_lo.into(),
            r.beta_hi.into(),
            r.sigma_hat.into(),
            r.sigma_norm.into(),
            r.sigma_lo.into(),
            r.sigma_hi.into(),
            r.n_durations.into(),
            Cell::Text(r.error.clone().unwrap_or_default()),
        ]);
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Fit,
    Scan,
    Diagnose,
    Predict,
    Simulate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ThresholdSpec {
    /// Order-statistic index.
    K(usize),
    /// Magnitude level.
    Ell(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub input: Option<PathBuf>,
    pub k_min: Option<usize>,
    pub k_max: Option<usize>,
    pub threshold: Option<ThresholdSpec>,
    pub t0: f64,
    pub method: FitMethod,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub drop_first: bool,
    /// Selection window for the stable parameters; default upper half.
    pub window: Option<(usize, usize)>,
    pub max_lag: usize,
    /// Fixed `(β₀, σ₀)` for `predict`, bypassing the scan.
    pub stable_params: Option<(f64, f64)>,
    pub beta: f64,
    pub n: usize,
    pub magnitude_law: MagnitudeLaw,
    pub waiting_law: WaitingLaw,
    /// Number of points on the `predict` grid.
    pub points: usize,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            input: None,
            k_min: None,
            k_max: None,
            threshold: None,
            t0: 0.0,
            method: FitMethod::LogMoment,
            seed: 2019,
            output: None,
            format: OutputFormat::Csv,
            drop_first: false,
            window: None,
            max_lag: 20,
            stable_params: None,
            beta: 0.8,
            n: 10_000,
            magnitude_law: MagnitudeLaw::UnitExponential,
            waiting_law: WaitingLaw::Stable,
            points: 200,
        }
    }

    fn extract_options(&self) -> ExtractOptions {
        ExtractOptions {
            drop_first: self.drop_first,
        }
    }
}

/// Default scan range: `k_max = n/20`, `k_min = max(10, k_max/10)`.
pub fn default_k_range(n: usize) -> (usize, usize) {
    let k_max = (n / 20).clamp(4, n);
    let k_min = (k_max / 10).max(10).min(k_max - 1).max(3);
    (k_min, k_max)
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// Tables in emission order.
    pub tables: Vec<Table>,
    /// Extra structured results for JSON output.
    pub summary: Value,
    /// Raw text for commands that emit files verbatim (`simulate` as CSV).
    pub raw: Option<String>,
    pub warnings: Vec<String>,
}

fn load(cfg: &RunConfig) -> Result<(EventSeries, Vec<String>)> {
    let path = cfg
        .input
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("--input is required".into()))?;
    let (series, report) = parse_events(path)?;
    Ok((series, report.warnings()))
}

fn exceedances(cfg: &RunConfig, series: &EventSeries) -> Result<ExceedanceSeries> {
    match cfg.threshold {
        Some(ThresholdSpec::K(k)) => extract_at_order(series, k, cfg.extract_options()),
        Some(ThresholdSpec::Ell(ell)) => {
            extract_exceedances_with(series, ell, cfg.extract_options())
        }
        None => Err(Error::InvalidParameter(
            "exactly one of --k or --ell is required".into(),
        )),
    }
}

fn threshold_json(ex: &ExceedanceSeries) -> Value {
    json!({
        "k": ex.k,
        "ell": ex.threshold,
        "n_durations": ex.len(),
        "p_hat": ex.p_hat,
        "ties": ex.ties,
        "first_dropped": ex.first_dropped,
    })
}

fn scan_for(cfg: &RunConfig, series: &EventSeries) -> Result<StabilityScan> {
    let (dmin, dmax) = default_k_range(series.len());
    let k_min = cfg.k_min.unwrap_or(dmin);
    let k_max = cfg.k_max.unwrap_or(dmax.max(k_min + 1).min(series.len()));
    stability_scan_with(series, k_min, k_max, cfg.method, cfg.extract_options())
}

fn run_fit(cfg: &RunConfig) -> Result<RunOutput> {
    let (series, warnings) = load(cfg)?;
    let ex = exceedances(cfg, &series)?;
    let f = fit(&ex.durations, cfg.method)?;
    let lrt = if ex.len() >= 10 {
        serde_json::to_value(lr_test_exponential(&ex.durations)?)?
    } else {
        Value::Null
    };
    let mut t = Table::new(
        "fit",
        &[
            "k", "ell", "n_durations", "method", "beta_hat", "beta_lo", "beta_hi", "sigma_hat",
            "sigma_lo", "sigma_hi", "loglik", "deviance", "p_value",
        ],
    );
    let dev = lrt.get("deviance").and_then(Value::as_f64).unwrap_or(f64::NAN);
    let pv = lrt.get("p_value").and_then(Value::as_f64).unwrap_or(f64::NAN);
    t.push(vec![
        ex.k.map_or(Cell::Text(String::new()), Cell::from),
        ex.threshold.into(),
        ex.len().into(),
        Cell::Text(f.method.to_string()),
        f.beta().into(),
        f.ci_beta.0.into(),
        f.ci_beta.1.into(),
        f.sigma().into(),
        f.ci_sigma.0.into(),
        f.ci_sigma.1.into(),
        f.loglik.into(),
        dev.into(),
        pv.into(),
    ]);
    let mut fit_json = serde_json::to_value(&f)?;
    if !f.loglik.is_finite() {
        fit_json["loglik"] = Value::Null;
    }
    Ok(RunOutput {
        tables: vec![t],
        summary: json!({ "threshold": threshold_json(&ex), "fit": fit_json, "lrt": lrt }),
        raw: None,
        warnings,
    })
}

fn run_scan(cfg: &RunConfig) -> Result<RunOutput> {
    let (series, mut warnings) = load(cfg)?;
    let scan = scan_for(cfg, &series)?;
    let failed = scan.rows.iter().filter(|r| !r.is_ok()).count();
    if failed > 0 {
        warnings.push(format!("{failed} scan rows failed to fit (see flag column)"));
    }
    let window = cfg.window.unwrap_or_else(|| scan.default_window());
    let stable = match select_stable_params(&scan, window) {
        Ok(s) => serde_json::to_value(s)?,
        Err(e) => {
            warnings.push(format!("no stable parameters: {e}"));
            Value::Null
        }
    };
    Ok(RunOutput {
        tables: vec![scan_table(&scan)],
        summary: json!({ "k_min": scan.k_min, "k_max": scan.k_max, "method": scan.method, "stable": stable }),
        raw: None,
        warnings,
    })
}

fn run_diagnose(cfg: &RunConfig) -> Result<RunOutput> {
    let (series, warnings) = load(cfg)?;
    let ex = exceedances(cfg, &series)?;
    let report = diagnose(&ex, cfg.max_lag)?;
    let mut acf = Table::new("acf", &["lag", "acf_durations", "acf_excesses", "band"]);
    for (lag, (d, e)) in report
        .acf_durations
        .values
        .iter()
        .zip(&report.acf_excesses.values)
        .enumerate()
    {
        acf.push(vec![lag.into(), (*d).into(), (*e).into(), report.acf_durations.band.into()]);
    }
    let mut copula = Table::new("copula", &["u", "v"]);
    for (u, v) in &report.copula {
        copula.push(vec![(*u).into(), (*v).into()]);
    }
    let mut qq = Table::new("qq", &["theoretical", "empirical"]);
    for (a, b) in &report.qq.points {
        qq.push(vec![(*a).into(), (*b).into()]);
    }
    Ok(RunOutput {
        tables: vec![acf, copula, qq],
        summary: json!({
            "threshold": threshold_json(&ex),
            "qq_beta_used": report.qq.beta_used,
            "qq_sigma_used": report.qq.sigma_used,
        }),
        raw: None,
        warnings,
    })
}

fn run_predict(cfg: &RunConfig) -> Result<RunOutput> {
    let mut warnings = Vec::new();
    let k = match cfg.threshold {
        Some(ThresholdSpec::K(k)) => k,
        Some(ThresholdSpec::Ell(_)) => {
            return Err(Error::InvalidParameter(
                "predict needs the threshold as an order index (--k)".into(),
            ))
        }
        None => return Err(Error::InvalidParameter("--k is required".into())),
    };
    let (beta0, sigma0, source) = match cfg.stable_params {
        Some((b, s)) => (b, s, "given"),
        None => {
            let (series, w) = load(cfg)?;
            warnings.extend(w);
            let scan = scan_for(cfg, &series)?;
            let window = cfg.window.unwrap_or_else(|| scan.default_window());
            let s = select_stable_params(&scan, window)?;
            (s.beta0, s.sigma0, "scan")
        }
    };
    let params = fitted_distribution_at(beta0, sigma0, k)?;
    let state = PredictiveState::new(params, cfg.t0)?;

    // log-spaced grid spanning six decades around the scale
    let sigma = params.sigma();
    let m = cfg.points.max(2);
    let mut dens = Table::new("density", &["t", "density", "survival", "hazard"]);
    for i in 0..m {
        let t = sigma * 10f64.powf(-3.0 + 6.0 * i as f64 / (m - 1) as f64);
        dens.push(vec![
            t.into(),
            conditional_density(&state, t)?.into(),
            conditional_survival(&state, t)?.into(),
            hazard_rate(&params, t + cfg.t0)?.into(),
        ]);
    }
    let mut quant = Table::new("quantile", &["q", "t"]);
    for q in [0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99] {
        quant.push(vec![q.into(), conditional_survival_quantile(&state, q)?.into()]);
    }
    Ok(RunOutput {
        tables: vec![dens, quant],
        summary: json!({
            "beta0": beta0,
            "sigma0": sigma0,
            "source": source,
            "k": k,
            "sigma_k": sigma,
            "t0": cfg.t0,
        }),
        raw: None,
        warnings,
    })
}

fn run_simulate(cfg: &RunConfig) -> Result<RunOutput> {
    let sim = SimConfig {
        beta: cfg.beta,
        n: cfg.n,
        magnitude_law: cfg.magnitude_law,
        waiting_law: cfg.waiting_law,
        seed: cfg.seed,
    };
    let series = simulate_mrp(&sim)?;
    let mut buf = Vec::new();
    write_events(&series, &mut buf)?;
    let mut t = Table::new("events", &["time", "magnitude"]);
    for (a, b) in series.times().iter().zip(series.magnitudes()) {
        t.push(vec![(*a).into(), (*b).into()]);
    }
    Ok(RunOutput {
        tables: vec![t],
        summary: json!({ "config": sim, "origin": series.origin() }),
        raw: Some(String::from_utf8(buf).expect("ascii output")),
        warnings: Vec::new(),
    })
}

/// Execute one command and return its artifacts without writing them.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput> {
    match cfg.command {
        Command::Fit => run_fit(cfg),
        Command::Scan => run_scan(cfg),
        Command::Diagnose => run_diagnose(cfg),
        Command::Predict => run_predict(cfg),
        Command::Simulate => run_simulate(cfg),
    }
}

fn render(out: &RunOutput, cfg: &RunConfig) -> Result<Vec<(Option<PathBuf>, Vec<u8>)>> {
    let mut files = Vec::new();
    match cfg.format {
        OutputFormat::Json => {
            let mut doc = serde_json::Map::new();
            doc.insert("command".into(), serde_json::to_value(cfg.command)?);
            if cfg.command == Command::Simulate {
                // full precision for events
                let series: Vec<Value> = out.tables[0]
                    .rows
                    .iter()
                    .map(|r| match (&r[0], &r[1]) {
                        (Cell::Num(t), Cell::Num(m)) => json!({ "time": t, "magnitude": m }),
                        _ => Value::Null,
                    })
                    .collect();
                doc.insert("events".into(), Value::Array(series));
            } else {
                for t in &out.tables {
                    doc.insert(t.name.clone(), t.to_json());
                }
            }
            let mut summary = out.summary.clone();
            round_json(&mut summary);
            if let Value::Object(o) = summary {
                doc.extend(o);
            }
            let mut bytes = serde_json::to_vec_pretty(&Value::Object(doc))?;
            bytes.push(b'\n');
            files.push((cfg.output.clone(), bytes));
        }
        OutputFormat::Csv => {
            if let Some(raw) = &out.raw {
                files.push((cfg.output.clone(), raw.clone().into_bytes()));
            } else if out.tables.len() == 1 {
                let mut b = Vec::new();
                out.tables[0].write_csv(&mut b)?;
                files.push((cfg.output.clone(), b));
            } else {
                match &cfg.output {
                    // one file per table next to the requested path
                    Some(path) => {
                        for t in &out.tables {
                            let mut b = Vec::new();
                            t.write_csv(&mut b)?;
                            files.push((Some(sibling(path, &t.name)), b));
                        }
                    }
                    None => {
                        let mut b = Vec::new();
                        for (i, t) in out.tables.iter().enumerate() {
                            if i > 0 {
                                b.push(b'\n');
                            }
                            writeln!(b, "# {}", t.name)?;
                            t.write_csv(&mut b)?;
                        }
                        files.push((None, b));
                    }
                }
            }
        }
    }
    Ok(files)
}

/// `out.csv` + `qq` → `out.qq.csv`.
fn sibling(path: &Path, name: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    path.with_file_name(format!("{stem}.{name}.{ext}"))
}

/// Run a command, writing its artifacts to the configured output (stdout
/// when none). Returns the written paths and any warnings.
pub fn run(cfg: &RunConfig) -> Result<(Vec<PathBuf>, Vec<String>)> {
    let out = execute(cfg)?;
    let mut written = Vec::new();
    for (path, bytes) in render(&out, cfg)? {
        match path {
            Some(p) => {
                let mut w = BufWriter::new(File::create(&p)?);
                w.write_all(&bytes)?;
                w.flush()?;
                written.push(p);
            }
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                lock.write_all(&bytes)?;
                lock.flush()?;
            }
        }
    }
    Ok((written, out.warnings))
}
