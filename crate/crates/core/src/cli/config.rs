use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::{SnnConfig, TeachingSignal};
use crate::encode::EncoderConfig;
use crate::error::{Error, Result};
use crate::neuron::{FilterMode, LifConfig, TraceConfig};
use crate::spncn::{Nonlinearity, Presentation, SpncnConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Xo,
    Bouncing,
    Classify,
    Semi,
    Continual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Model {
    Spncn,
    SnnBfa,
    SnnDrtp,
}

/// Fully resolved experiment configuration. Every key must be present in the
/// file except the dataset paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    pub model: Model,
    pub seed: u64,
    pub trials: usize,
    pub out_dir: PathBuf,
    pub export_embeddings: bool,

    pub hidden: Vec<usize>,

    // neuron
    pub dt: f64,
    pub tau_m: f64,
    pub r_m: f64,
    pub gamma_m: f64,
    pub v_thr: f64,
    pub v_reset: f64,
    pub t_r: f64,
    pub tau_f: f64,
    pub trace_mode: FilterMode,

    // synapses and learning
    pub tau_j: f64,
    pub gamma_j: f64,
    pub beta: f64,
    pub alpha_u: f64,
    pub lambda: f64,
    pub w_bound: f64,
    pub reuse_error_delta: bool,
    pub init_scale: f64,
    pub mirror_init: bool,
    pub w_max: f64,
    pub w_min: f64,
    pub feedback_scale: f64,

    // encoding
    pub k_rate: f64,
    pub label_rate: f64,
    pub max_pixel: f64,

    // presentation
    pub t_st: f64,
    pub t_ist: f64,
    pub t_st_test: f64,
    pub hard_reset_per_sample: bool,

    // metrics
    pub pse_alpha: f64,
    pub embedding_layer: usize,
    pub gamma_c: f64,

    // streams
    /// Training presentations (X-O) or a cap on training samples (0 = all).
    pub n_train: usize,
    /// Cap on test samples (0 = all).
    pub n_test: usize,
    pub shuffle_train: bool,
    pub n_frames: usize,
    pub learn_frames: usize,
    pub n_balls: usize,
    pub ball_radius: f64,
    pub speed_min: f64,
    pub speed_max: f64,
    pub p_u: f64,
    pub p_f: f64,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_images: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_labels: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_images: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_labels: Option<PathBuf>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub task: Option<Task>,
    pub model: Option<Model>,
    pub export_embeddings: bool,
}

pub fn parse_config(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)?;
    parse_config_str(&text, overrides)
}

pub fn parse_config_str(text: &str, overrides: &Overrides) -> Result<ExperimentConfig> {
    let mut cfg: ExperimentConfig =
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
    if let Some(v) = overrides.seed {
        cfg.seed = v;
    }
    if let Some(v) = overrides.trials {
        cfg.trials = v;
    }
    if let Some(v) = &overrides.out_dir {
        cfg.out_dir = v.clone();
    }
    if let Some(v) = overrides.task {
        cfg.task = v;
    }
    if let Some(v) = overrides.model {
        cfg.model = v;
    }
    if overrides.export_embeddings {
        cfg.export_embeddings = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.lif().validate()?;
        self.trace()?;
        self.encoder().validate()?;
        self.label_encoder().validate()?;
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.t_st > 0.0 && self.t_st_test > 0.0 && self.t_ist >= 0.0) {
            return Err(Error::Config("stimulus intervals must be positive".into()));
        }
        if !(self.tau_j > 0.0) {
            return Err(Error::Config(format!("tau_j must be positive, got {}", self.tau_j)));
        }
        if !(0.0..=1.0).contains(&self.p_u) || !(0.0..=1.0).contains(&self.p_f) {
            return Err(Error::Config("p_u and p_f must lie in [0, 1]".into()));
        }
        if self.embedding_layer == 0 || self.embedding_layer > self.hidden.len() {
            return Err(Error::Config(format!(
                "embedding_layer must name an internal layer 1..={}",
                self.hidden.len()
            )));
        }
        if self.task == Task::Bouncing && self.model != Model::Spncn {
            return Err(Error::Config(
                "the bouncing-ball task is a prediction task and needs model = \"spncn\"".into(),
            ));
        }
        if self.learn_frames > self.n_frames {
            return Err(Error::Config("learn_frames exceeds n_frames".into()));
        }
        self.spncn(1, 1).validate()?;
        Ok(())
    }

    pub fn lif(&self) -> LifConfig {
        LifConfig {
            dt: self.dt,
            tau_m: self.tau_m,
            r_m: self.r_m,
            gamma_m: self.gamma_m,
            v_thr: self.v_thr,
            v_reset: self.v_reset,
            t_r: self.t_r,
        }
    }

    pub fn trace(&self) -> Result<TraceConfig> {
        TraceConfig::from_time_constant(self.dt, self.tau_f, self.trace_mode)
    }

    pub fn encoder(&self) -> EncoderConfig {
        EncoderConfig {
            k_rate: self.k_rate,
            dt: self.dt,
            max_pixel: self.max_pixel,
        }
    }

    pub fn label_encoder(&self) -> EncoderConfig {
        EncoderConfig {
            k_rate: self.label_rate,
            dt: self.dt,
            max_pixel: 1.0,
        }
    }

    pub fn kappa(&self) -> f64 {
        SpncnConfig::kappa_from_tau(self.dt, self.tau_j)
    }

    pub fn spncn(&self, x_size: usize, y_size: usize) -> SpncnConfig {
        SpncnConfig {
            x_size,
            y_size,
            hidden: self.hidden.clone(),
            kappa: self.kappa(),
            gamma_j: self.gamma_j,
            beta: self.beta,
            alpha_u: self.alpha_u,
            lambda: self.lambda,
            w_bound: self.w_bound,
            reuse_error_delta: self.reuse_error_delta,
            phi: Nonlinearity::Identity,
            init_scale: self.init_scale,
            mirror_init: self.mirror_init,
            w_max: self.w_max,
            w_min: self.w_min,
        }
    }

    pub fn snn(&self, input_size: usize, n_classes: usize) -> SnnConfig {
        SnnConfig {
            input_size,
            hidden: self.hidden.clone(),
            n_classes,
            kappa: self.kappa(),
            gamma_j: self.gamma_j,
            alpha_u: self.alpha_u,
            init_scale: self.init_scale,
            feedback_scale: self.feedback_scale,
            w_bound: self.w_bound,
            rule: match self.model {
                Model::SnnDrtp => TeachingSignal::TargetProjection,
                _ => TeachingSignal::FeedbackAlignment,
            },
        }
    }

    pub fn train_presentation(&self, learn: bool) -> Presentation {
        Presentation {
            t_st: self.t_st,
            t_ist: self.t_ist,
            learn,
        }
    }

    pub fn test_presentation(&self) -> Presentation {
        Presentation {
            t_st: self.t_st_test,
            t_ist: 0.0,
            learn: false,
        }
    }
}
