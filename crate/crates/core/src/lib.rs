//! Peaks-over-threshold analysis for bursty event series.
//!
//! Inter-exceedance times above high thresholds are modelled with the
//! Mittag-Leffler distribution `ML(β, σ)`. The crate evaluates the
//! Mittag-Leffler function and distribution, fits `(β, σ)` over a range of
//! thresholds, checks the model assumptions, forecasts the next crossing and
//! simulates bursty marked renewal processes.

pub mod diagnostics;
pub mod distribution;
pub mod error;
pub mod estimators;
pub mod forecast;
pub mod io;
pub mod ks;
pub mod mlf;
pub mod quadrature;
pub mod scan;
pub mod series;
pub mod sim;
pub mod special;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use distribution::{ml_cdf, ml_pdf, ml_quantile, ml_rand, ml_survival, MlParams};
pub use error::{Error, Result};
pub use estimators::{logmoment_fit, lr_test_exponential, mle_fit, FitMethod, MlFit};
pub use mlf::mittag_leffler;
pub use scan::{fitted_distribution_at, select_stable_params, stability_scan, StabilityScan};
pub use series::{extract_exceedances, order_threshold, EventSeries, ExceedanceSeries};
pub use sim::{simulate_mrp, stable_rand, SimConfig};

/// The crate's deterministic generator.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
