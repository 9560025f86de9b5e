//! Poisson rate coding of real-valued vectors and rate-code read-out of
//! spike accumulators.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    /// Maximum spike rate (Hz).
    pub k_rate: f64,
    /// Integration step (ms).
    pub dt: f64,
    /// Raw value mapped to the maximum rate (255 for 8-bit images).
    pub max_pixel: f64,
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_rate > 0.0 && self.dt > 0.0 && self.max_pixel > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "encoder needs positive k_rate, dt and max_pixel: {self:?}"
            )));
        }
        Ok(())
    }

    /// Per-step spike probability of a unit firing at `rate` Hz, clipped to 1.
    pub fn step_probability(&self, rate: f64) -> f64 {
        (rate * self.dt / 1000.0).clamp(0.0, 1.0)
    }
}

/// Per-dimension firing rates in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct RateVector(pub Vec<f64>);

impl RateVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

pub fn to_rates(x: &[f64], cfg: &EncoderConfig) -> Result<RateVector> {
    x.iter()
        .enumerate()
        .map(|(index, &value)| {
            if value < 0.0 || value.is_nan() {
                Err(Error::NegativeInput { index, value })
            } else {
                Ok(cfg.k_rate * (value / cfg.max_pixel).min(1.0))
            }
        })
        .collect::<Result<Vec<_>>>()
        .map(RateVector)
}

/// Draws one step of a Poisson spike train: unit `i` spikes iff
/// `eps_i < r_i * dt / 1000` with `eps_i ~ U(0, 1)`.
pub fn poisson_step<R: Rng + ?Sized>(
    rates: &RateVector,
    cfg: &EncoderConfig,
    rng: &mut R,
    out: &mut [f64],
) {
    debug_assert_eq!(rates.len(), out.len());
    let scale = cfg.dt / 1000.0;
    for (o, &r) in out.iter_mut().zip(&rates.0) {
        let eps: f64 = rng.random();
        *o = if eps < r * scale { 1.0 } else { 0.0 };
    }
}

/// One-hot label scaled to rate `k_rate` at `class`.
pub fn encode_label(class: usize, n_classes: usize, k_rate: f64) -> Result<RateVector> {
    if class >= n_classes {
        return Err(Error::ClassOutOfRange { class, n_classes });
    }
    let mut r = vec![0.0; n_classes];
    r[class] = k_rate;
    Ok(RateVector(r))
}

/// Rate-code equivalent of a spike train: `(gamma_c / n_steps) * spike_sum`.
pub fn rate_code_embedding(spike_sum: &[f64], n_steps: usize, gamma_c: f64) -> Result<Vec<f64>> {
    if n_steps == 0 {
        return Err(Error::Empty("rate-code embedding over zero steps"));
    }
    if !(gamma_c > 0.0 && gamma_c <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "gamma_c must lie in (0, 1], got {gamma_c}"
        )));
    }
    let scale = gamma_c / n_steps as f64;
    Ok(spike_sum.iter().map(|&c| c * scale).collect())
}
