use ndarray::{s, Array1, Zip};

use super::{SpncnConfig, SpncnParams, SpncnState};
use crate::error::{check_len, Error, Result};
use crate::neuron::{trace_update, SpikeResponse, TraceConfig};

/// Sensory spikes for one tick.
#[derive(Debug, Clone, Copy)]
pub struct SensoryInput<'a> {
    pub x_spikes: &'a [f64],
    pub y_spikes: Option<&'a [f64]>,
    /// When false the label block is treated as absent: its spikes and trace
    /// are held at zero and its error entries are clamped to zero.
    pub labeled: bool,
    /// Inter-stimulus mode: every sensory error entry is clamped to zero.
    pub clamp_errors: bool,
}

/// Interpolated current update for every internal layer, driven by the
/// errors left by the previous prediction phase.
pub fn compute_currents<M: SpikeResponse>(
    state: &mut SpncnState<M>,
    params: &SpncnParams,
    cfg: &SpncnConfig,
) -> Result<()> {
    let n_layers = state.n_layers();
    let kappa = cfg.kappa;
    let gamma = cfg.gamma_j;
    let phi = cfg.phi;
    for l in 0..n_layers {
        let e_below = &state.error[l];
        check_len("compute_currents error", params.e[l].ncols(), e_below.len())?;
        let drive = params.e[l].dot(e_below);
        let j = &mut state.current[l];
        check_len("compute_currents current", drive.len(), j.len())?;
        if l + 1 < n_layers {
            Zip::from(j)
                .and(&drive)
                .and(&state.error[l + 1])
                .for_each(|j, &d, &e_own| {
                    *j = (1.0 - kappa) * *j + kappa * (-gamma * *j + phi.apply(d - e_own));
                });
        } else {
            Zip::from(j).and(&drive).for_each(|j, &d| {
                *j = (1.0 - kappa) * *j + kappa * (-gamma * *j + phi.apply(d));
            });
        }
    }
    Ok(())
}

/// One integration tick of the whole network: currents, SRM, traces, sensory
/// trace, top-down predictions and error neurons, clamps, window accumulators.
pub fn step_states<M: SpikeResponse>(
    state: &mut SpncnState<M>,
    params: &SpncnParams,
    input: &SensoryInput<'_>,
    cfg: &SpncnConfig,
    srm: &M,
    trace_cfg: &TraceConfig,
) -> Result<()> {
    let x_size = cfg.x_size;
    let y_size = cfg.y_size;
    check_len("sensory x block", x_size, input.x_spikes.len())?;
    if let Some(y) = input.y_spikes {
        check_len("sensory y block", y_size, y.len())?;
    }

    compute_currents(state, params, cfg)?;

    for l in 0..state.n_layers() {
        let j = state.current[l]
            .as_slice()
            .ok_or(Error::NonFinite { context: "current layout" })?;
        let s = state.spikes[l].as_slice_mut().expect("contiguous spike vector");
        srm.step(&mut state.srm[l], j, s)?;
        let active = &mut state.active[l];
        active.clear();
        active.extend(s.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, _)| i));
        trace_update(
            state.trace[l].as_slice_mut().expect("contiguous trace"),
            s,
            trace_cfg,
        )?;
    }

    // sensory layer
    {
        let s0 = &mut state.sensory_spikes;
        s0.slice_mut(s![..x_size])
            .assign(&ndarray::ArrayView1::from(input.x_spikes));
        let mut y_block = s0.slice_mut(s![x_size..]);
        match (input.labeled, input.y_spikes) {
            (true, Some(y)) => y_block.assign(&ndarray::ArrayView1::from(y)),
            _ => y_block.fill(0.0),
        }
        let z0 = state.sensory_trace.as_slice_mut().expect("contiguous trace");
        trace_update(&mut z0[..x_size], &s0.as_slice().unwrap()[..x_size], trace_cfg)?;
        if input.labeled {
            trace_update(&mut z0[x_size..], &s0.as_slice().unwrap()[x_size..], trace_cfg)?;
        } else {
            z0[x_size..].fill(0.0);
        }
    }

    // top-down predictions, l = L..1
    for l in (0..state.n_layers()).rev() {
        let w = &params.w[l];
        let target = if l == 0 {
            &state.sensory_trace
        } else {
            &state.trace[l - 1]
        };
        let mu = &mut state.prediction[l];
        mu.fill(0.0);
        for &j in &state.active[l] {
            mu.scaled_add(state.spikes[l][j], &w.column(j));
        }
        Zip::from(&mut state.error[l])
            .and(&*mu)
            .and(target)
            .for_each(|e, &m, &z| *e = m - z);
    }

    if input.clamp_errors {
        state.error[0].fill(0.0);
    } else if !input.labeled {
        state.error[0].slice_mut(s![x_size..]).fill(0.0);
    }

    state.prediction_sum += &state.prediction[0];
    state.target_sum += &state.sensory_trace;
    for (acc, s) in state.spike_sum.iter_mut().zip(&state.spikes) {
        *acc += s;
    }
    state.window_ticks += 1;
    state.tick += 1;
    Ok(())
}

/// Argmax with ties resolved to the lowest index.
pub fn classify_readout(y_prediction: &[f64]) -> Result<usize> {
    if y_prediction.is_empty() {
        return Err(Error::Empty("class read-out vector"));
    }
    let mut best = 0;
    for (i, &v) in y_prediction.iter().enumerate() {
        if v > y_prediction[best] {
            best = i;
        }
    }
    Ok(best)
}

impl<M: SpikeResponse> SpncnState<M> {
    /// Mean of `z_mu[0]` over the current window, split into `(x, y)` blocks.
    pub fn mean_prediction(&self, x_size: usize) -> (Array1<f64>, Array1<f64>) {
        let n = self.window_ticks.max(1) as f64;
        let mean = &self.prediction_sum / n;
        (
            mean.slice(s![..x_size]).to_owned(),
            mean.slice(s![x_size..]).to_owned(),
        )
    }

    /// Mean of the sensory `x` trace over the current window.
    pub fn mean_target(&self, x_size: usize) -> Array1<f64> {
        let n = self.window_ticks.max(1) as f64;
        self.target_sum.slice(s![..x_size]).mapv(|v| v / n)
    }
}
