use thiserror::Error;

use crate::estimators::MlFit;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument outside supported domain: {0}")]
    Domain(String),

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("no strict exceedances of threshold {threshold}")]
    NoCrossings { threshold: f64 },

    #[error("event times must be strictly increasing (violated at index {index})")]
    Unsorted { index: usize },

    #[error("optimizer did not converge (gradient norm {grad_norm:.3e}); best point beta={:.6}, sigma={:.6e}", best.params.beta(), best.params.sigma())]
    NotConverged { best: Box<MlFit>, grad_norm: f64 },

    #[error("numerical underflow: {0}")]
    Underflow(String),

    #[error("could not parse input:\n{}", format_line_errors(.0))]
    Parse(Vec<(usize, String)>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_line_errors(errs: &[(usize, String)]) -> String {
    errs.iter()
        .map(|(line, msg)| format!("  line {line}: {msg}"))
        .collect::<Vec<_>>()
        .join("\n")
}
