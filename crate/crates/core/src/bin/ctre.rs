use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bursty_pot::io::{run, Command, OutputFormat, RunConfig, ThresholdSpec};
use bursty_pot::sim::{MagnitudeLaw, WaitingLaw};
use bursty_pot::FitMethod;

#[derive(Parser)]
#[command(name = "ctre", version, about = "Threshold-crossing analysis of bursty event series")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit the inter-exceedance law at one threshold, with a test against the exponential.
    Fit(FitArgs),
    /// Estimate over a range of order-statistic thresholds.
    Scan(ScanArgs),
    /// ACF, copula and QQ data at one threshold.
    Diagnose(DiagnoseArgs),
    /// Conditional density and quantiles of the time to the next crossing.
    Predict(PredictArgs),
    /// Simulate a bursty marked renewal process.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct Input {
    #[arg(long, short)]
    input: PathBuf,
    /// Drop the first duration (time from the origin to the first crossing).
    #[arg(long)]
    drop_first: bool,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Threshold {
    /// Threshold at the k-th largest magnitude.
    #[arg(long)]
    k: Option<usize>,
    /// Threshold magnitude level.
    #[arg(long)]
    ell: Option<f64>,
}

impl Threshold {
    fn spec(&self) -> Option<ThresholdSpec> {
        self.k.map(ThresholdSpec::K).or(self.ell.map(ThresholdSpec::Ell))
    }
}

#[derive(Args)]
struct Range {
    #[arg(long)]
    kmin: Option<usize>,
    #[arg(long)]
    kmax: Option<usize>,
    /// Selection window `LO,HI` for the stable parameters.
    #[arg(long, value_parser = parse_window)]
    window: Option<(usize, usize)>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    threshold: Threshold,
    #[arg(long, value_enum, default_value_t = Method::Mle)]
    method: Method,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    range: Range,
    #[arg(long, value_enum, default_value_t = Method::Logmoment)]
    method: Method,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    threshold: Threshold,
    #[arg(long, default_value_t = 20)]
    max_lag: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct PredictArgs {
    /// Events used to estimate the stable parameters (unless both are given).
    #[arg(long, short)]
    input: Option<PathBuf>,
    #[arg(long)]
    drop_first: bool,
    /// Threshold order index.
    #[arg(long)]
    k: usize,
    /// Elapsed time since the last crossing.
    #[arg(long, default_value_t = 0.0)]
    t0: f64,
    #[arg(long, requires = "sigma0")]
    beta0: Option<f64>,
    #[arg(long, requires = "beta0")]
    sigma0: Option<f64>,
    #[command(flatten)]
    range: Range,
    #[arg(long, value_enum, default_value_t = Method::Logmoment)]
    method: Method,
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 0.8)]
    beta: f64,
    #[arg(long, short, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 2019)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Magnitudes::Exponential)]
    magnitudes: Magnitudes,
    #[arg(long, value_enum, default_value_t = Waiting::Stable)]
    waiting: Waiting,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Logmoment,
    Mle,
}

#[derive(Clone, Copy, ValueEnum)]
enum Magnitudes {
    Exponential,
    Gumbel,
}

#[derive(Clone, Copy, ValueEnum)]
enum Waiting {
    Stable,
    Exponential,
}

fn parse_window(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected LO,HI")?;
    let lo = a.trim().parse().map_err(|e| format!("{e}"))?;
    let hi = b.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((lo, hi))
}

impl From<Method> for FitMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Logmoment => FitMethod::LogMoment,
            Method::Mle => FitMethod::Mle,
        }
    }
}

fn apply_common(cfg: &mut RunConfig, c: Common) {
    cfg.output = c.output;
    cfg.format = match c.format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    };
}

fn apply_range(cfg: &mut RunConfig, r: Range) {
    cfg.k_min = r.kmin;
    cfg.k_max = r.kmax;
    cfg.window = r.window;
}

fn config(cmd: Cmd) -> RunConfig {
    match cmd {
        Cmd::Fit(a) => {
            let mut cfg = RunConfig::new(Command::Fit);
            cfg.input = Some(a.input.input);
            cfg.drop_first = a.input.drop_first;
            cfg.threshold = a.threshold.spec();
            cfg.method = a.method.into();
            apply_common(&mut cfg, a.common);
            cfg
        }
        Cmd::Scan(a) => {
            let mut cfg = RunConfig::new(Command::Scan);
            cfg.input = Some(a.input.input);
            cfg.drop_first = a.input.drop_first;
            cfg.method = a.method.into();
            apply_range(&mut cfg, a.range);
            apply_common(&mut cfg, a.common);
            cfg
        }
        Cmd::Diagnose(a) => {
            let mut cfg = RunConfig::new(Command::Diagnose);
            cfg.input = Some(a.input.input);
            cfg.drop_first = a.input.drop_first;
            cfg.threshold = a.threshold.spec();
            cfg.max_lag = a.max_lag;
            apply_common(&mut cfg, a.common);
            cfg
        }
        Cmd::Predict(a) => {
            let mut cfg = RunConfig::new(Command::Predict);
            cfg.input = a.input;
            cfg.drop_first = a.drop_first;
            cfg.threshold = Some(ThresholdSpec::K(a.k));
            cfg.t0 = a.t0;
            cfg.stable_params = a.beta0.zip(a.sigma0);
            cfg.method = a.method.into();
            cfg.points = a.points;
            apply_range(&mut cfg, a.range);
            apply_common(&mut cfg, a.common);
            cfg
        }
        Cmd::Simulate(a) => {
            let mut cfg = RunConfig::new(Command::Simulate);
            cfg.beta = a.beta;
            cfg.n = a.n;
            cfg.seed = a.seed;
            cfg.magnitude_law = match a.magnitudes {
                Magnitudes::Exponential => MagnitudeLaw::UnitExponential,
                Magnitudes::Gumbel => MagnitudeLaw::StandardGumbel,
            };
            cfg.waiting_law = match a.waiting {
                Waiting::Stable => WaitingLaw::Stable,
                Waiting::Exponential => WaitingLaw::Exponential,
            };
            apply_common(&mut cfg, a.common);
            cfg
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = config(cli.command);
    match run(&cfg) {
        Ok((written, warnings)) => {
            for w in warnings {
                eprintln!("warning: {w}");
            }
            for p in written {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
