use rand::Rng;

use super::{
    apply_updates, compute_updates, step_states, stdp_hybrid_updates, SensoryInput, SpncnConfig,
    SpncnParams, SpncnState,
};
use crate::encode::{poisson_step, EncoderConfig, RateVector};
use crate::error::{Error, Result};
use crate::neuron::{SpikeResponse, TraceConfig};

/// Timing and learning switches for one stimulus presentation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Presentation {
    /// Stimulus interval (ms).
    pub t_st: f64,
    /// Inter-stimulus interval (ms); sensory errors are clamped and learning
    /// is off throughout.
    pub t_ist: f64,
    pub learn: bool,
}

impl Presentation {
    pub fn ticks(ms: f64, dt: f64) -> usize {
        (ms / dt).round() as usize
    }
}

/// Window statistics of one presentation.
#[derive(Debug, Clone, PartialEq)]
pub struct StimulusOutput {
    /// Mean prediction of the `x` block over the stimulus window.
    pub x_hat: Vec<f64>,
    /// Mean prediction of the label block over the stimulus window.
    pub y_hat: Vec<f64>,
    /// Mean sensory `x` trace over the stimulus window (the prediction target).
    pub x_target: Vec<f64>,
    /// Spike counts per unit over the stimulus window, per layer.
    pub spike_sum: Vec<Vec<f64>>,
    /// Total spikes per layer over the stimulus window.
    pub spike_counts: Vec<u64>,
    /// Ticks on which each layer's synapses were updated.
    pub update_events: Vec<u64>,
    /// Ticks in the stimulus window.
    pub ticks: usize,
}

/// Presents one sample: `t_st / dt` ticks of encode, step, and (when
/// `presentation.learn`) update, followed by `t_ist / dt` relaxation ticks.
#[allow(clippy::too_many_arguments)]
pub fn present_stimulus<M: SpikeResponse, R: Rng + ?Sized>(
    state: &mut SpncnState<M>,
    params: &mut SpncnParams,
    x_rates: &RateVector,
    y_rates: Option<&RateVector>,
    presentation: &Presentation,
    cfg: &SpncnConfig,
    srm: &M,
    trace_cfg: &TraceConfig,
    encoder: &EncoderConfig,
    rng: &mut R,
) -> Result<StimulusOutput> {
    if !(presentation.t_st > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "stimulus interval must be positive, got {}",
            presentation.t_st
        )));
    }
    let st_ticks = Presentation::ticks(presentation.t_st, encoder.dt);
    let ist_ticks = Presentation::ticks(presentation.t_ist, encoder.dt);
    let n_layers = cfg.n_layers();

    let mut x_spikes = vec![0.0; cfg.x_size];
    let mut y_spikes = vec![0.0; cfg.y_size];
    let mut update_events = vec![0u64; n_layers];
    let mut spike_counts = vec![0u64; n_layers];

    state.clear_window();
    for _ in 0..st_ticks {
        poisson_step(x_rates, encoder, rng, &mut x_spikes);
        if let Some(y) = y_rates {
            poisson_step(y, encoder, rng, &mut y_spikes);
        }
        let input = SensoryInput {
            x_spikes: &x_spikes,
            y_spikes: y_rates.map(|_| y_spikes.as_slice()),
            labeled: y_rates.is_some(),
            clamp_errors: false,
        };
        let tick = state.tick;
        step_states(state, params, &input, cfg, srm, trace_cfg).map_err(|e| abort(tick, e))?;
        for (count, active) in spike_counts.iter_mut().zip(&state.active) {
            *count += active.len() as u64;
        }
        if presentation.learn {
            let deltas = if cfg.lambda > 0.0 {
                stdp_hybrid_updates(state, params, cfg)
            } else {
                compute_updates(state, cfg)
            };
            for l in deltas.active_layers() {
                update_events[l] += 1;
            }
            apply_updates(params, &deltas, cfg).map_err(|e| abort(tick, e))?;
        }
    }

    let (x_hat, y_hat) = state.mean_prediction(cfg.x_size);
    let x_target = state.mean_target(cfg.x_size);
    let spike_sum = state.spike_sum.iter().map(|v| v.to_vec()).collect();
    let ticks = state.window_ticks;

    x_spikes.fill(0.0);
    for _ in 0..ist_ticks {
        let input = SensoryInput {
            x_spikes: &x_spikes,
            y_spikes: None,
            labeled: false,
            clamp_errors: true,
        };
        let tick = state.tick;
        step_states(state, params, &input, cfg, srm, trace_cfg).map_err(|e| abort(tick, e))?;
    }

    Ok(StimulusOutput {
        x_hat: x_hat.to_vec(),
        y_hat: y_hat.to_vec(),
        x_target: x_target.to_vec(),
        spike_sum,
        spike_counts,
        update_events,
        ticks,
    })
}

fn abort(step: u64, err: Error) -> Error {
    match err {
        Error::NonFinite { context } => Error::NumericAbort {
            step,
            context: context.to_string(),
        },
        other => other,
    }
}
