//! The spiking neural coding network.
//!
//! Layer 0 is the sensory layer: the concatenation of an input block `x` and
//! a label block `y`, both presented as Poisson spike trains and filtered into
//! traces. Layers `1..=L` are spiking units driven by a spike-response model.
//! Every internal layer `l` predicts the trace of the layer below from its own
//! spikes,
//!
//! ```text
//! z_mu[l-1] = W[l] . s[l]
//! e[l-1]    = z_mu[l-1] - z[l-1]
//! ```
//!
//! and receives the mismatch back through error synapses `E[l]`:
//!
//! ```text
//! J[l] <- (1 - kappa) J[l] + kappa * (-gamma_J J[l] + phi(-e[l] + E[l] . e[l-1]))   (l < L)
//! J[L] <- (1 - kappa) J[L] + kappa * (-gamma_J J[L] + phi(E[L] . e[L-1]))
//! ```
//!
//! Synapses learn with the spike-triggered local representation alignment
//! rule (`dW[l] = e[l-1] s[l]^T`, `dE[l] = -beta s[l] e[l-1]^T`), optionally
//! blended with an online STDP term, and every column is projected back into
//! a Euclidean ball of radius `w_bound` after each step.

mod dynamics;
mod plasticity;
mod present;

pub use dynamics::{classify_readout, compute_currents, step_states, SensoryInput};
pub use plasticity::{apply_updates, compute_updates, stdp_hybrid_updates, Delta, Deltas, LayerDeltas};
pub(crate) use plasticity::{apply_delta, bound_all_columns as bound_columns};
pub use present::{present_stimulus, Presentation, StimulusOutput};

use ndarray::{Array1, Array2, ShapeBuilder};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::checkpoint::{Checkpoint, NamedMatrix};
use crate::error::{Error, Result};
use crate::neuron::SpikeResponse;

/// Nonlinearity applied to the error drive of each layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nonlinearity {
    #[default]
    Identity,
}

impl Nonlinearity {
    #[inline]
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Nonlinearity::Identity => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpncnConfig {
    /// Size of the input block of the sensory layer.
    pub x_size: usize,
    /// Size of the label block of the sensory layer (0 for unsupervised use).
    pub y_size: usize,
    /// Sizes of the internal layers `1..=L`.
    pub hidden: Vec<usize>,
    /// Current interpolation constant, `exp(-dt / tau_J)`.
    pub kappa: f64,
    /// Conductance leak.
    pub gamma_j: f64,
    /// Error-synapse evolution coefficient.
    pub beta: f64,
    /// Update step size.
    pub alpha_u: f64,
    /// STDP blend coefficient; 0 gives pure ST-LRA.
    pub lambda: f64,
    /// Maximum Euclidean norm of any weight column. `f64::INFINITY` disables
    /// the projection.
    pub w_bound: f64,
    /// Compute `dE` as `-beta * dW^T` instead of a second outer product.
    pub reuse_error_delta: bool,
    pub phi: Nonlinearity,
    /// Standard deviation of the Gaussian weight initialisation.
    pub init_scale: f64,
    /// Initialise `E[l]` as `-W[l]^T` instead of independently.
    pub mirror_init: bool,
    /// Soft STDP bounds.
    pub w_max: f64,
    pub w_min: f64,
}

impl SpncnConfig {
    pub fn new(x_size: usize, y_size: usize, hidden: Vec<usize>) -> Self {
        Self {
            x_size,
            y_size,
            hidden,
            kappa: 1.0,
            gamma_j: 0.0,
            beta: 0.9,
            alpha_u: 0.0025,
            lambda: 0.0,
            w_bound: 20.0,
            reuse_error_delta: false,
            phi: Nonlinearity::Identity,
            init_scale: 0.05,
            mirror_init: false,
            w_max: 1.0,
            w_min: -1.0,
        }
    }

    /// `kappa = exp(-dt / tau_J)`.
    pub fn kappa_from_tau(dt: f64, tau_j: f64) -> f64 {
        (-dt / tau_j).exp()
    }

    pub fn sensory_size(&self) -> usize {
        self.x_size + self.y_size
    }

    pub fn n_layers(&self) -> usize {
        self.hidden.len()
    }

    /// Sizes `n_0..=n_L`.
    pub fn layer_sizes(&self) -> Vec<usize> {
        std::iter::once(self.sensory_size())
            .chain(self.hidden.iter().copied())
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.x_size == 0 || self.hidden.is_empty() || self.hidden.contains(&0) {
            return fail(format!(
                "all layer sizes must be positive and at least one internal layer is required: x={} hidden={:?}",
                self.x_size, self.hidden
            ));
        }
        if !(self.kappa >= 0.0 && self.kappa <= 1.0) {
            return fail(format!("kappa must lie in [0, 1], got {}", self.kappa));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return fail(format!("lambda must lie in [0, 1], got {}", self.lambda));
        }
        if !(self.w_bound > 0.0) {
            return fail(format!("w_bound must be positive, got {}", self.w_bound));
        }
        if !(self.init_scale >= 0.0) || !self.init_scale.is_finite() {
            return fail(format!("init_scale must be finite and >= 0, got {}", self.init_scale));
        }
        if !(self.w_max > self.w_min) {
            return fail(format!("w_max must exceed w_min: {} <= {}", self.w_max, self.w_min));
        }
        for (name, v) in [
            ("gamma_j", self.gamma_j),
            ("beta", self.beta),
            ("alpha_u", self.alpha_u),
        ] {
            if !v.is_finite() {
                return fail(format!("{name} must be finite"));
            }
        }
        Ok(())
    }
}

/// Prediction synapses `W[l]` (`n_{l-1} x n_l`) and error synapses `E[l]`
/// (`n_l x n_{l-1}`) for `l = 1..=L`, stored at index `l - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpncnParams {
    pub w: Vec<Array2<f64>>,
    pub e: Vec<Array2<f64>>,
}

impl SpncnParams {
    /// Gaussian initialisation with every column projected into the norm ball.
    pub fn build(cfg: &SpncnConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sizes = cfg.layer_sizes();
        let normal = Normal::new(0.0, cfg.init_scale.max(f64::MIN_POSITIVE))
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let mut sample = |rows: usize, cols: usize, fortran: bool| {
            let shape = (rows, cols).set_f(fortran);
            let mut m = Array2::<f64>::zeros(shape);
            if cfg.init_scale > 0.0 {
                // fill in row-major order regardless of memory layout
                for r in 0..rows {
                    for c in 0..cols {
                        m[[r, c]] = normal.sample(&mut rng);
                    }
                }
            }
            m
        };

        let mut w = Vec::with_capacity(cfg.n_layers());
        let mut e = Vec::with_capacity(cfg.n_layers());
        for l in 1..sizes.len() {
            let wl = sample(sizes[l - 1], sizes[l], true);
            let el = if cfg.mirror_init {
                let mut el = Array2::zeros((sizes[l], sizes[l - 1]));
                el.assign(&wl.t());
                el.mapv_inplace(|v| -v);
                el
            } else {
                sample(sizes[l], sizes[l - 1], false)
            };
            w.push(wl);
            e.push(el);
        }
        let mut params = Self { w, e };
        for m in params.w.iter_mut().chain(params.e.iter_mut()) {
            plasticity::bound_all_columns(m, cfg.w_bound);
        }
        Ok(params)
    }

    pub fn n_layers(&self) -> usize {
        self.w.len()
    }

    pub fn check_shapes(&self, cfg: &SpncnConfig) -> Result<()> {
        let sizes = cfg.layer_sizes();
        if self.w.len() != cfg.n_layers() || self.e.len() != cfg.n_layers() {
            return Err(Error::Checkpoint(format!(
                "expected {} layers, found {} W and {} E matrices",
                cfg.n_layers(),
                self.w.len(),
                self.e.len()
            )));
        }
        for l in 1..sizes.len() {
            let want_w = (sizes[l - 1], sizes[l]);
            let want_e = (sizes[l], sizes[l - 1]);
            if self.w[l - 1].dim() != want_w || self.e[l - 1].dim() != want_e {
                return Err(Error::Checkpoint(format!(
                    "layer {l}: expected W {want_w:?} / E {want_e:?}, found W {:?} / E {:?}",
                    self.w[l - 1].dim(),
                    self.e[l - 1].dim()
                )));
            }
        }
        Ok(())
    }

    pub fn max_column_norm(&self) -> f64 {
        self.w
            .iter()
            .chain(&self.e)
            .flat_map(|m| plasticity::column_sq_norms(m).into_iter())
            .fold(0.0f64, |a, b| a.max(b.sqrt()))
    }

    pub fn to_checkpoint(&self, config_text: &str) -> Checkpoint {
        let mut matrices = Vec::with_capacity(2 * self.w.len());
        for (l, (w, e)) in self.w.iter().zip(&self.e).enumerate() {
            matrices.push(NamedMatrix::from_array(format!("W{}", l + 1), w));
            matrices.push(NamedMatrix::from_array(format!("E{}", l + 1), e));
        }
        Checkpoint {
            config: config_text.to_string(),
            matrices,
        }
    }

    /// Rebuilds parameters from a checkpoint, rejecting any shape that does
    /// not match `cfg`.
    pub fn from_checkpoint(ckpt: &Checkpoint, cfg: &SpncnConfig) -> Result<Self> {
        let sizes = cfg.layer_sizes();
        let mut w = Vec::new();
        let mut e = Vec::new();
        for l in 1..sizes.len() {
            let wl = ckpt.get(&format!("W{l}"), sizes[l - 1], sizes[l])?;
            let el = ckpt.get(&format!("E{l}"), sizes[l], sizes[l - 1])?;
            let mut wf = Array2::zeros((sizes[l - 1], sizes[l]).f());
            wf.assign(&wl);
            w.push(wf);
            e.push(el);
        }
        Ok(Self { w, e })
    }
}

/// Evolving network state. Vectors indexed by internal layer are stored at
/// `l - 1`; the sensory layer has its own fields.
#[derive(Debug, Clone)]
pub struct SpncnState<M: SpikeResponse> {
    /// Input currents `J[l]`.
    pub current: Vec<Array1<f64>>,
    /// SRM state (voltages, refractory counters) per layer.
    pub srm: Vec<M::State>,
    /// Binary spikes `s[l]`.
    pub spikes: Vec<Array1<f64>>,
    /// Indices of the units that spiked this tick, per layer.
    pub active: Vec<Vec<usize>>,
    /// Traces `z[l]` for `l = 1..=L`.
    pub trace: Vec<Array1<f64>>,
    /// Sensory spikes `s[0]` (`x` block followed by `y` block).
    pub sensory_spikes: Array1<f64>,
    /// Sensory trace `z[0]`.
    pub sensory_trace: Array1<f64>,
    /// Predictions `z_mu[l]` for `l = 0..L-1`.
    pub prediction: Vec<Array1<f64>>,
    /// Error neurons `e[l]` for `l = 0..L-1`.
    pub error: Vec<Array1<f64>>,
    /// Sum of `z_mu[0]` over the current stimulus window.
    pub prediction_sum: Array1<f64>,
    /// Sum of `z[0]` over the current stimulus window.
    pub target_sum: Array1<f64>,
    /// Per-layer spike counts over the current stimulus window.
    pub spike_sum: Vec<Array1<f64>>,
    pub window_ticks: usize,
    /// Ticks simulated since construction.
    pub tick: u64,
}

impl<M: SpikeResponse> SpncnState<M> {
    pub fn new(cfg: &SpncnConfig, srm: &M) -> Self {
        let n0 = cfg.sensory_size();
        let zeros = |n: usize| Array1::<f64>::zeros(n);
        let below: Vec<usize> = cfg.layer_sizes()[..cfg.n_layers()].to_vec();
        Self {
            current: cfg.hidden.iter().map(|&n| zeros(n)).collect(),
            srm: cfg.hidden.iter().map(|&n| srm.init_state(n)).collect(),
            spikes: cfg.hidden.iter().map(|&n| zeros(n)).collect(),
            active: cfg.hidden.iter().map(|_| Vec::new()).collect(),
            trace: cfg.hidden.iter().map(|&n| zeros(n)).collect(),
            sensory_spikes: zeros(n0),
            sensory_trace: zeros(n0),
            prediction: below.iter().map(|&n| zeros(n)).collect(),
            error: below.iter().map(|&n| zeros(n)).collect(),
            prediction_sum: zeros(n0),
            target_sum: zeros(n0),
            spike_sum: cfg.hidden.iter().map(|&n| zeros(n)).collect(),
            window_ticks: 0,
            tick: 0,
        }
    }

    pub fn n_layers(&self) -> usize {
        self.current.len()
    }

    /// Trace of layer `l` (0 = sensory).
    pub fn layer_trace(&self, l: usize) -> &Array1<f64> {
        if l == 0 {
            &self.sensory_trace
        } else {
            &self.trace[l - 1]
        }
    }

    /// Spikes of layer `l` (0 = sensory).
    pub fn layer_spikes(&self, l: usize) -> &Array1<f64> {
        if l == 0 {
            &self.sensory_spikes
        } else {
            &self.spikes[l - 1]
        }
    }

    /// Zeroes every dynamic quantity. Parameters are not touched.
    pub fn reset(&mut self, srm: &M) {
        for v in self
            .current
            .iter_mut()
            .chain(self.spikes.iter_mut())
            .chain(self.trace.iter_mut())
            .chain(self.prediction.iter_mut())
            .chain(self.error.iter_mut())
        {
            v.fill(0.0);
        }
        for st in &mut self.srm {
            srm.reset(st);
        }
        for a in &mut self.active {
            a.clear();
        }
        self.sensory_spikes.fill(0.0);
        self.sensory_trace.fill(0.0);
        self.clear_window();
    }

    pub fn clear_window(&mut self) {
        self.prediction_sum.fill(0.0);
        self.target_sum.fill(0.0);
        for v in &mut self.spike_sum {
            v.fill(0.0);
        }
        self.window_ticks = 0;
    }
}

pub fn reset_state<M: SpikeResponse>(state: &mut SpncnState<M>, srm: &M) {
    state.reset(srm);
}
