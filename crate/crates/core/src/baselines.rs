//! Feedforward spiking baselines trained online by derivative-free broadcast
//! feedback alignment (df-BFA) or derivative-free direct random target
//! projection (df-DRTP).
//!
//! Both share the LIF units of the coding network. The top layer is a softmax
//! read-out of the last hidden layer's spikes, `y_hat = softmax(W[L] s[L-1])`.
//! Hidden layers learn from a signed teaching signal sent through fixed random
//! matrices:
//!
//! ```text
//! df-BFA:  d[l] = sign(F[l] (y_hat - y))
//! df-DRTP: d[l] = sign(P[l] y)
//! dW[l]  = d[l] s[l-1]^T          dW[L] = (y_hat - y) s[L-1]^T
//! ```

use ndarray::{Array1, Array2, ShapeBuilder};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::checkpoint::{Checkpoint, NamedMatrix};
use crate::encode::{encode_label, poisson_step, EncoderConfig, RateVector};
use crate::error::{check_len, Error, Result};
use crate::neuron::{lif_step, LifConfig, LifState};
use crate::spncn::{classify_readout, Delta, Presentation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TeachingSignal {
    /// Signed random projection of the output error.
    FeedbackAlignment,
    /// Signed random projection of the target.
    TargetProjection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnnConfig {
    pub input_size: usize,
    pub hidden: Vec<usize>,
    pub n_classes: usize,
    pub kappa: f64,
    pub gamma_j: f64,
    pub alpha_u: f64,
    pub init_scale: f64,
    /// Standard deviation of the fixed feedback / projection matrices.
    pub feedback_scale: f64,
    pub w_bound: f64,
    pub rule: TeachingSignal,
}

impl SnnConfig {
    pub fn new(input_size: usize, hidden: Vec<usize>, n_classes: usize, rule: TeachingSignal) -> Self {
        Self {
            input_size,
            hidden,
            n_classes,
            kappa: 1.0,
            gamma_j: 0.0,
            alpha_u: 0.0025,
            init_scale: 0.05,
            feedback_scale: 1.0,
            w_bound: 20.0,
            rule,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_size == 0
            || self.n_classes == 0
            || self.hidden.is_empty()
            || self.hidden.contains(&0)
        {
            return Err(Error::InvalidConfig(format!(
                "baseline needs positive sizes and at least one hidden layer: input={} hidden={:?} classes={}",
                self.input_size, self.hidden, self.n_classes
            )));
        }
        if !(0.0..=1.0).contains(&self.kappa) || !(self.w_bound > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "kappa must lie in [0, 1] and w_bound must be positive: {} {}",
                self.kappa, self.w_bound
            )));
        }
        Ok(())
    }

    fn sizes(&self) -> Vec<usize> {
        std::iter::once(self.input_size)
            .chain(self.hidden.iter().copied())
            .chain(std::iter::once(self.n_classes))
            .collect()
    }
}

/// `w[l]` maps layer `l` to layer `l + 1` (`n_{l+1} x n_l`); the last one is
/// the softmax classifier. `f[l]` and `p[l]` (`n_{l+1} x n_classes`) are fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct SnnParams {
    pub w: Vec<Array2<f64>>,
    pub f: Vec<Array2<f64>>,
    pub p: Vec<Array2<f64>>,
}

impl SnnParams {
    pub fn build(cfg: &SnnConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sizes = cfg.sizes();
        let mut gaussian = |rows: usize, cols: usize, std: f64, fortran: bool| -> Result<Array2<f64>> {
            let mut m = Array2::zeros((rows, cols).set_f(fortran));
            if std > 0.0 {
                let normal =
                    Normal::new(0.0, std).map_err(|e| Error::InvalidConfig(e.to_string()))?;
                for r in 0..rows {
                    for c in 0..cols {
                        m[[r, c]] = normal.sample(&mut rng);
                    }
                }
            }
            Ok(m)
        };
        let mut w = Vec::new();
        for l in 1..sizes.len() {
            w.push(gaussian(sizes[l], sizes[l - 1], cfg.init_scale, true)?);
        }
        let mut f = Vec::new();
        let mut p = Vec::new();
        for &n in &cfg.hidden {
            f.push(gaussian(n, cfg.n_classes, cfg.feedback_scale, false)?);
        }
        for &n in &cfg.hidden {
            p.push(gaussian(n, cfg.n_classes, cfg.feedback_scale, false)?);
        }
        for m in &mut w {
            crate::spncn::bound_columns(m, cfg.w_bound);
        }
        Ok(Self { w, f, p })
    }

    pub fn to_checkpoint(&self, config_text: &str) -> Checkpoint {
        let mut matrices = Vec::new();
        for (l, m) in self.w.iter().enumerate() {
            matrices.push(NamedMatrix::from_array(format!("W{}", l + 1), m));
        }
        for (l, m) in self.f.iter().enumerate() {
            matrices.push(NamedMatrix::from_array(format!("F{}", l + 1), m));
        }
        for (l, m) in self.p.iter().enumerate() {
            matrices.push(NamedMatrix::from_array(format!("P{}", l + 1), m));
        }
        Checkpoint {
            config: config_text.to_string(),
            matrices,
        }
    }

    pub fn from_checkpoint(ckpt: &Checkpoint, cfg: &SnnConfig) -> Result<Self> {
        let sizes = cfg.sizes();
        let mut w = Vec::new();
        for l in 1..sizes.len() {
            let m = ckpt.get(&format!("W{l}"), sizes[l], sizes[l - 1])?;
            let mut mf = Array2::zeros((sizes[l], sizes[l - 1]).f());
            mf.assign(&m);
            w.push(mf);
        }
        let mut f = Vec::new();
        let mut p = Vec::new();
        for (l, &n) in cfg.hidden.iter().enumerate() {
            f.push(ckpt.get(&format!("F{}", l + 1), n, cfg.n_classes)?);
            p.push(ckpt.get(&format!("P{}", l + 1), n, cfg.n_classes)?);
        }
        Ok(Self { w, f, p })
    }
}

#[derive(Debug, Clone)]
pub struct SnnState {
    pub current: Vec<Array1<f64>>,
    pub lif: Vec<LifState>,
    pub spikes: Vec<Array1<f64>>,
    pub input_spikes: Array1<f64>,
    /// Softmax output of the current tick.
    pub y_hat: Array1<f64>,
    /// Output error `y_hat - y` of the last labelled tick.
    pub e_out: Array1<f64>,
    pub y_hat_sum: Array1<f64>,
    pub spike_sum: Vec<Array1<f64>>,
    pub window_ticks: usize,
    pub tick: u64,
}

impl SnnState {
    pub fn new(cfg: &SnnConfig, lif: &LifConfig) -> Self {
        let zeros = |n: usize| Array1::<f64>::zeros(n);
        Self {
            current: cfg.hidden.iter().map(|&n| zeros(n)).collect(),
            lif: cfg.hidden.iter().map(|&n| LifState::new(n, lif.v_reset)).collect(),
            spikes: cfg.hidden.iter().map(|&n| zeros(n)).collect(),
            input_spikes: zeros(cfg.input_size),
            y_hat: Array1::from_elem(cfg.n_classes, 1.0 / cfg.n_classes as f64),
            e_out: zeros(cfg.n_classes),
            y_hat_sum: zeros(cfg.n_classes),
            spike_sum: cfg.hidden.iter().map(|&n| zeros(n)).collect(),
            window_ticks: 0,
            tick: 0,
        }
    }

    pub fn reset(&mut self, lif: &LifConfig) {
        for v in self.current.iter_mut().chain(self.spikes.iter_mut()) {
            v.fill(0.0);
        }
        for st in &mut self.lif {
            st.v.fill(lif.v_reset);
            st.refrac.fill(0);
        }
        self.input_spikes.fill(0.0);
        let n = self.y_hat.len() as f64;
        self.y_hat.fill(1.0 / n);
        self.e_out.fill(0.0);
        self.clear_window();
    }

    pub fn clear_window(&mut self) {
        self.y_hat_sum.fill(0.0);
        for v in &mut self.spike_sum {
            v.fill(0.0);
        }
        self.window_ticks = 0;
    }

    fn pre_spikes(&self, l: usize) -> &Array1<f64> {
        if l == 0 {
            &self.input_spikes
        } else {
            &self.spikes[l - 1]
        }
    }
}

fn sparse_matvec(m: &Array2<f64>, v: &Array1<f64>) -> Array1<f64> {
    let mut out = Array1::zeros(m.nrows());
    for (j, &s) in v.iter().enumerate() {
        if s != 0.0 {
            out.scaled_add(s, &m.column(j));
        }
    }
    out
}

pub fn softmax(logits: &Array1<f64>) -> Array1<f64> {
    let max = logits.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let exp = logits.mapv(|v| (v - max).exp());
    let sum = exp.sum();
    exp / sum
}

/// One feedforward tick: currents, LIF, and the softmax output.
pub fn snn_forward_step(
    state: &mut SnnState,
    params: &SnnParams,
    input_spikes: &[f64],
    cfg: &SnnConfig,
    lif: &LifConfig,
) -> Result<()> {
    check_len("snn input spikes", cfg.input_size, input_spikes.len())?;
    state
        .input_spikes
        .assign(&ndarray::ArrayView1::from(input_spikes));
    let (kappa, gamma) = (cfg.kappa, cfg.gamma_j);
    for l in 0..cfg.hidden.len() {
        let drive = sparse_matvec(&params.w[l], state.pre_spikes(l));
        let j = &mut state.current[l];
        ndarray::Zip::from(&mut *j)
            .and(&drive)
            .for_each(|j, &d| *j = (1.0 - kappa) * *j + kappa * (-gamma * *j + d));
        lif_step(
            &mut state.lif[l],
            j.as_slice().expect("contiguous"),
            lif,
            state.spikes[l].as_slice_mut().expect("contiguous"),
        )?;
    }
    let top = cfg.hidden.len();
    let logits = sparse_matvec(&params.w[top], &state.spikes[top - 1]);
    state.y_hat = softmax(&logits);
    state.y_hat_sum += &state.y_hat;
    for (acc, s) in state.spike_sum.iter_mut().zip(&state.spikes) {
        *acc += s;
    }
    state.window_ticks += 1;
    state.tick += 1;
    Ok(())
}

fn signum(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn layer_delta(signal: Array1<f64>, pre: &Array1<f64>) -> Delta {
    if pre.iter().all(|&v| v == 0.0) {
        Delta::Zero {
            rows: signal.len(),
            cols: pre.len(),
        }
    } else {
        Delta::Outer {
            left: signal,
            right: pre.clone(),
            scale: 1.0,
        }
    }
}

fn updates_with(
    state: &mut SnnState,
    params: &SnnParams,
    y: Option<&[f64]>,
    cfg: &SnnConfig,
    rule: TeachingSignal,
) -> Result<Vec<Delta>> {
    let y = y.ok_or(Error::MissingLabel("baseline updates are purely supervised"))?;
    check_len("one-hot label", cfg.n_classes, y.len())?;
    let y = ndarray::ArrayView1::from(y);
    state.e_out = &state.y_hat - &y;
    let mut deltas = Vec::with_capacity(params.w.len());
    for l in 0..cfg.hidden.len() {
        let teaching = match rule {
            TeachingSignal::FeedbackAlignment => params.f[l].dot(&state.e_out),
            TeachingSignal::TargetProjection => params.p[l].dot(&y),
        };
        deltas.push(layer_delta(teaching.mapv(signum), state.pre_spikes(l)));
    }
    let top = cfg.hidden.len();
    deltas.push(layer_delta(state.e_out.clone(), &state.spikes[top - 1]));
    Ok(deltas)
}

pub fn df_bfa_updates(
    state: &mut SnnState,
    params: &SnnParams,
    y: Option<&[f64]>,
    cfg: &SnnConfig,
) -> Result<Vec<Delta>> {
    updates_with(state, params, y, cfg, TeachingSignal::FeedbackAlignment)
}

pub fn df_drtp_updates(
    state: &mut SnnState,
    params: &SnnParams,
    y: Option<&[f64]>,
    cfg: &SnnConfig,
) -> Result<Vec<Delta>> {
    updates_with(state, params, y, cfg, TeachingSignal::TargetProjection)
}

/// `W <- W - alpha_u dW` with the column-norm projection. `F` and `P` are
/// never touched.
pub fn apply_snn_updates(params: &mut SnnParams, deltas: &[Delta], cfg: &SnnConfig) -> Result<()> {
    check_len("snn deltas", params.w.len(), deltas.len())?;
    for (m, d) in params.w.iter().zip(deltas) {
        if d.dim() != m.dim() {
            return Err(Error::DimensionMismatch {
                context: "snn delta shape",
                expected: m.len(),
                found: d.dim().0 * d.dim().1,
            });
        }
    }
    for (m, d) in params.w.iter_mut().zip(deltas) {
        crate::spncn::apply_delta(m, d, cfg.alpha_u, cfg.w_bound)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnnOutput {
    /// Mean softmax output over the stimulus window.
    pub y_mean: Vec<f64>,
    pub predicted: usize,
    pub spike_sum: Vec<Vec<f64>>,
    pub update_events: Vec<u64>,
    pub ticks: usize,
}

/// Presents one sample. Learning happens only when `presentation.learn` is
/// set and a label is given.
#[allow(clippy::too_many_arguments)]
pub fn snn_present<R: Rng + ?Sized>(
    state: &mut SnnState,
    params: &mut SnnParams,
    x_rates: &RateVector,
    label: Option<usize>,
    presentation: &Presentation,
    cfg: &SnnConfig,
    lif: &LifConfig,
    encoder: &EncoderConfig,
    rng: &mut R,
) -> Result<SnnOutput> {
    let st_ticks = Presentation::ticks(presentation.t_st, encoder.dt);
    let ist_ticks = Presentation::ticks(presentation.t_ist, encoder.dt);
    if st_ticks == 0 {
        return Err(Error::InvalidConfig("stimulus interval must be positive".into()));
    }
    let one_hot = match label {
        Some(c) => Some(encode_label(c, cfg.n_classes, 1.0)?.0),
        None => None,
    };
    let learn = presentation.learn && one_hot.is_some();
    let mut spikes = vec![0.0; cfg.input_size];
    let mut update_events = vec![0u64; params.w.len()];
    state.clear_window();
    for _ in 0..st_ticks {
        poisson_step(x_rates, encoder, rng, &mut spikes);
        snn_forward_step(state, params, &spikes, cfg, lif)?;
        if learn {
            let deltas = updates_with(state, params, one_hot.as_deref(), cfg, cfg.rule)?;
            for (count, d) in update_events.iter_mut().zip(&deltas) {
                if !matches!(d, Delta::Zero { .. }) {
                    *count += 1;
                }
            }
            let tick = state.tick;
            apply_snn_updates(params, &deltas, cfg).map_err(|e| match e {
                Error::NonFinite { context } => Error::NumericAbort {
                    step: tick,
                    context: context.into(),
                },
                other => other,
            })?;
        }
    }
    let n = state.window_ticks.max(1) as f64;
    let y_mean: Vec<f64> = state.y_hat_sum.iter().map(|v| v / n).collect();
    let predicted = classify_readout(&y_mean)?;
    let spike_sum = state.spike_sum.iter().map(|v| v.to_vec()).collect();
    let ticks = state.window_ticks;
    spikes.fill(0.0);
    for _ in 0..ist_ticks {
        snn_forward_step(state, params, &spikes, cfg, lif)?;
    }
    Ok(SnnOutput {
        y_mean,
        predicted,
        spike_sum,
        update_events,
        ticks,
    })
}
