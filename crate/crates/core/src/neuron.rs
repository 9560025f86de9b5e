//! Spike-response models and spike-train filters.
//!
//! A spike-response model (SRM) maps a voltage state and an input current to
//! an updated voltage state and a binary spike vector. The network code only
//! talks to the [`SpikeResponse`] trait, so any SRM with that shape can be
//! dropped in. The one provided here is the leaky integrate-and-fire unit,
//! integrated with forward Euler:
//!
//! ```text
//! v(t + dt) = v(t) + (dt / tau_m) * (-gamma_m * v(t) + R_m * J(t))
//! s(t)      = v(t + dt) >= v_thr
//! ```
//!
//! Spiking units are reset to `v_reset` and held there for an absolute
//! refractory period.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Abstract spike-response model: `(v, s) <- f(v, J)`.
pub trait SpikeResponse {
    type State: Clone + std::fmt::Debug;

    fn init_state(&self, n: usize) -> Self::State;

    /// Advances `state` by one time step under `current`, writing 0/1 spikes
    /// into `spikes`.
    fn step(&self, state: &mut Self::State, current: &[f64], spikes: &mut [f64]) -> Result<()>;

    fn reset(&self, state: &mut Self::State);
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifConfig {
    /// Integration step (ms).
    pub dt: f64,
    /// Membrane time constant (ms).
    pub tau_m: f64,
    /// Membrane resistance.
    pub r_m: f64,
    /// Membrane leak coefficient.
    pub gamma_m: f64,
    /// Firing threshold (decivolts).
    pub v_thr: f64,
    /// Reset / resting voltage (decivolts).
    pub v_reset: f64,
    /// Absolute refractory period (ms).
    pub t_r: f64,
}

impl Default for LifConfig {
    fn default() -> Self {
        Self {
            dt: 0.25,
            tau_m: 20.0,
            r_m: 1.0,
            gamma_m: 1.0,
            v_thr: 0.5,
            v_reset: 0.0,
            t_r: 1.0,
        }
    }
}

impl LifConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.dt > 0.0
            && self.tau_m > 0.0
            && self.v_thr > self.v_reset
            && self.t_r >= 0.0
            && [self.dt, self.tau_m, self.r_m, self.gamma_m, self.v_thr, self.v_reset, self.t_r]
                .iter()
                .all(|x| x.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "LIF config requires dt > 0, tau_m > 0, v_thr > v_reset, t_r >= 0: {self:?}"
            )))
        }
    }

    /// Refractory period in whole steps, rounded up so it is never shorter
    /// than `t_r`.
    pub fn refractory_steps(&self) -> u32 {
        let steps = self.t_r / self.dt;
        // absorb float noise such as 1.0 / 0.1 = 10.000000000000002
        (steps - 1e-9).ceil().max(0.0) as u32
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LifState {
    pub v: Vec<f64>,
    /// Steps left in the refractory period.
    pub refrac: Vec<u32>,
}

impl LifState {
    pub fn new(n: usize, v_reset: f64) -> Self {
        Self {
            v: vec![v_reset; n],
            refrac: vec![0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }
}

/// One forward-Euler LIF step. Returns the number of units that spiked.
pub fn lif_step(
    state: &mut LifState,
    current: &[f64],
    cfg: &LifConfig,
    spikes: &mut [f64],
) -> Result<usize> {
    let n = state.v.len();
    check_len("lif_step current", n, current.len())?;
    check_len("lif_step spikes", n, spikes.len())?;
    if current.iter().any(|j| !j.is_finite()) {
        return Err(Error::NonFinite {
            context: "lif_step input current",
        });
    }

    let rate = cfg.dt / cfg.tau_m;
    let refrac_steps = cfg.refractory_steps();
    let mut fired = 0;
    for i in 0..n {
        if state.refrac[i] > 0 {
            state.refrac[i] -= 1;
            state.v[i] = cfg.v_reset;
            spikes[i] = 0.0;
            continue;
        }
        let v = state.v[i] + rate * (-cfg.gamma_m * state.v[i] + cfg.r_m * current[i]);
        if v >= cfg.v_thr {
            spikes[i] = 1.0;
            state.v[i] = cfg.v_reset;
            state.refrac[i] = refrac_steps;
            fired += 1;
        } else {
            spikes[i] = 0.0;
            state.v[i] = v;
        }
    }
    Ok(fired)
}

impl SpikeResponse for LifConfig {
    type State = LifState;

    fn init_state(&self, n: usize) -> LifState {
        LifState::new(n, self.v_reset)
    }

    fn step(&self, state: &mut LifState, current: &[f64], spikes: &mut [f64]) -> Result<()> {
        lif_step(state, current, self, spikes).map(|_| ())
    }

    fn reset(&self, state: &mut LifState) {
        state.v.fill(self.v_reset);
        state.refrac.fill(0);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FilterMode {
    /// `z <- (1 - a) z + a s`
    LowPass,
    /// `z <- (a z) * (1 - s) + s`
    #[default]
    Trace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceConfig {
    pub alpha_f: f64,
    pub mode: FilterMode,
}

impl TraceConfig {
    /// `alpha_f = exp(-dt / tau_f)`.
    pub fn from_time_constant(dt: f64, tau_f: f64, mode: FilterMode) -> Result<Self> {
        let cfg = Self {
            alpha_f: (-dt / tau_f).exp(),
            mode,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha_f > 0.0 && self.alpha_f < 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "trace alpha_f must lie in (0, 1), got {}",
                self.alpha_f
            )))
        }
    }
}

pub fn trace_update(z: &mut [f64], s: &[f64], cfg: &TraceConfig) -> Result<()> {
    check_len("trace_update", z.len(), s.len())?;
    let a = cfg.alpha_f;
    match cfg.mode {
        FilterMode::LowPass => {
            for (zi, &si) in z.iter_mut().zip(s) {
                *zi = (1.0 - a) * *zi + a * si;
            }
        }
        FilterMode::Trace => {
            for (zi, &si) in z.iter_mut().zip(s) {
                *zi = a * *zi * (1.0 - si) + si;
            }
        }
    }
    Ok(())
}
