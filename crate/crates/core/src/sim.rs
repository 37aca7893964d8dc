//! Marked renewal processes with totally skewed stable waiting times.
//!
//! Waiting times are draws of the positive `β`-stable law `D` with
//! `E[exp(-sD)] = exp(-s^β)`, i.e. `S_β(cos(πβ/2)^{1/β}, 1, 0)` in the
//! Samorodnitsky–Taqqu parametrisation. Its stability gives
//! `W_1 + … + W_n = n^{1/β} D` in distribution, so the exceedance times at the
//! `k`-th order statistic are approximately `ML(β, (n/k)^{1/β})`.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Open01};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::EventSeries;

/// Law of the i.i.d. event magnitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MagnitudeLaw {
    #[default]
    UnitExponential,
    StandardGumbel,
}

/// Law of the waiting times between events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum WaitingLaw {
    /// Positive `β`-stable draws (bursty).
    #[default]
    Stable,
    /// Unit exponential draws (Poisson null model); `beta` is ignored.
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub beta: f64,
    pub n: usize,
    pub magnitude_law: MagnitudeLaw,
    pub waiting_law: WaitingLaw,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(beta: f64, n: usize, seed: u64) -> Self {
        Self {
            beta,
            n,
            magnitude_law: MagnitudeLaw::default(),
            waiting_law: WaitingLaw::default(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.waiting_law == WaitingLaw::Stable {
            check_stable_beta(self.beta)?;
        }
        if self.n < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: self.n,
            });
        }
        Ok(())
    }
}

fn check_stable_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "stability parameter must lie in (0, 1), got {beta}"
        )));
    }
    Ok(())
}

/// One draw of the positive stable law with Laplace transform `exp(-s^β)`
/// (Kanter's representation):
///
/// `D = sin(βU) / sin(U)^{1/β} · (sin((1-β)U) / E)^{(1-β)/β}`,
/// `U ~ Uniform(0, π)`, `E ~ Exp(1)`.
pub fn stable_variate<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> f64 {
    let u: f64 = PI * Distribution::<f64>::sample(&Open01, rng);
    let e: f64 = Exp1.sample(rng);
    let a = (beta * u).sin() / u.sin().powf(1.0 / beta);
    let b = ((1.0 - beta) * u).sin() / e;
    a * b.powf((1.0 - beta) / beta)
}

/// `n` i.i.d. positive stable draws, reproducible for a given seed.
pub fn stable_rand(beta: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    check_stable_beta(beta)?;
    let mut rng = crate::rng(seed);
    Ok((0..n).map(|_| stable_variate(beta, &mut rng)).collect())
}

// Separate ChaCha streams keep the waiting times identical whatever the
// magnitude law, and vice versa.
fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = crate::rng(seed);
    rng.set_stream(id);
    rng
}

/// Simulate an uncoupled marked renewal process starting at time 0.
pub fn simulate_mrp(cfg: &SimConfig) -> Result<EventSeries> {
    cfg.validate()?;
    let mut waits = stream(cfg.seed, 1);
    let mut marks = stream(cfg.seed, 2);

    let mut times = Vec::with_capacity(cfg.n);
    let mut t = 0.0;
    for _ in 0..cfg.n {
        let w = match cfg.waiting_law {
            WaitingLaw::Stable => stable_variate(cfg.beta, &mut waits),
            WaitingLaw::Exponential => Exp1.sample(&mut waits),
        };
        t += w;
        times.push(t);
    }

    // both laws are increasing transforms of the same uniforms
    let magnitudes = (0..cfg.n)
        .map(|_| {
            let u: f64 = Open01.sample(&mut marks);
            match cfg.magnitude_law {
                MagnitudeLaw::UnitExponential => -(-u).ln_1p(),
                MagnitudeLaw::StandardGumbel => -(-u.ln()).ln(),
            }
        })
        .collect();

    EventSeries::with_origin(times, magnitudes, 0.0)
}
