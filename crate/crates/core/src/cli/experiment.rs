use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, Model, Task};
use super::output::{export_embeddings, write_metrics_csv, write_summary};
use crate::baselines::{snn_present, SnnConfig, SnnParams, SnnState};
use crate::checkpoint::Checkpoint;
use crate::encode::{encode_label, rate_code_embedding, to_rates, EncoderConfig};
use crate::error::{Error, Result};
use crate::metrics::{accuracy, acc_continual, squared_error, FrameBaseline, MetricRow, PseAccumulator};
use crate::neuron::{LifConfig, TraceConfig};
use crate::spncn::{
    classify_readout, present_stimulus, Presentation, SpncnConfig, SpncnParams, SpncnState,
};
use crate::streams::{
    bouncing_ball_next, consecutive_pairs, load_csv_vectors, load_idx, mask_labels, shuffled,
    split_task_stream, xo_test_stream, xo_training_stream, BallState, Dataset, Sample, GRID,
};

const STREAM_POISSON: u64 = 1;
const STREAM_DATA: u64 = 2;
const STREAM_MASK: u64 = 3;
const STREAM_FUZZ: u64 = 4;
const STREAM_BALLS: u64 = 5;

/// Independent generator for one purpose within one trial.
pub fn trial_rng(trial_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    rng.set_stream(stream);
    rng
}

fn derived_seed(trial_seed: u64, stream: u64) -> u64 {
    trial_rng(trial_seed, stream).next_u64()
}

/// Rate-code vectors and their labels.
pub type Embeddings = (Vec<Vec<f64>>, Vec<usize>);

/// Everything one trial produces.
#[derive(Debug, Clone)]
pub struct TrialResult {
    pub rows: Vec<MetricRow>,
    /// Named scalar results in a fixed order.
    pub summary: Vec<(String, f64)>,
    pub checkpoint: Checkpoint,
    /// Test-sample rate-code embeddings and their labels.
    pub embeddings: Option<Embeddings>,
}

impl TrialResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.summary.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }
}

/// Train and test splits of a labelled dataset.
#[derive(Debug, Clone)]
pub struct DataSplits {
    pub train: Dataset,
    pub test: Dataset,
}

fn load_split(images: Option<&Path>, labels: Option<&Path>, which: &str) -> Result<Dataset> {
    let images = images.ok_or_else(|| {
        Error::Config(format!("this task needs {which}_images (IDX or labelled CSV)"))
    })?;
    if images.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        return load_csv_vectors(images, true);
    }
    let labels = labels.ok_or_else(|| Error::Config(format!("missing {which}_labels")))?;
    load_idx(images, labels)
}

pub fn load_data(cfg: &ExperimentConfig) -> Result<DataSplits> {
    let mut train = load_split(cfg.train_images.as_deref(), cfg.train_labels.as_deref(), "train")?;
    let mut test = load_split(cfg.test_images.as_deref(), cfg.test_labels.as_deref(), "test")?;
    if train.dim != test.dim {
        return Err(Error::DimensionMismatch {
            context: "train/test feature size",
            expected: train.dim,
            found: test.dim,
        });
    }
    if cfg.n_train > 0 {
        train = train.truncated(cfg.n_train);
    }
    if cfg.n_test > 0 {
        test = test.truncated(cfg.n_test);
    }
    Ok(DataSplits { train, test })
}

struct Env {
    lif: LifConfig,
    trace: TraceConfig,
    encoder: EncoderConfig,
    label_rate: f64,
    n_classes: usize,
}

enum Net {
    Coding {
        cfg: SpncnConfig,
        params: SpncnParams,
        state: SpncnState<LifConfig>,
    },
    Snn {
        cfg: SnnConfig,
        params: SnnParams,
        state: SnnState,
    },
}

struct Presented {
    predicted: Option<usize>,
    x_hat: Vec<f64>,
    x_target: Vec<f64>,
    update_events: Vec<u64>,
    spike_counts: Vec<u64>,
    spike_sum: Vec<Vec<f64>>,
    ticks: usize,
}

impl Net {
    fn build(cfg: &ExperimentConfig, input: usize, n_classes: usize, seed: u64) -> Result<Self> {
        let lif = cfg.lif();
        Ok(match cfg.model {
            Model::Spncn => {
                let c = cfg.spncn(input, n_classes);
                let params = SpncnParams::build(&c, seed)?;
                let state = SpncnState::new(&c, &lif);
                Net::Coding {
                    cfg: c,
                    params,
                    state,
                }
            }
            Model::SnnBfa | Model::SnnDrtp => {
                let c = cfg.snn(input, n_classes);
                let params = SnnParams::build(&c, seed)?;
                let state = SnnState::new(&c, &lif);
                Net::Snn {
                    cfg: c,
                    params,
                    state,
                }
            }
        })
    }

    fn is_supervised_only(&self) -> bool {
        matches!(self, Net::Snn { .. })
    }

    fn tick(&self) -> u64 {
        match self {
            Net::Coding { state, .. } => state.tick,
            Net::Snn { state, .. } => state.tick,
        }
    }

    fn reset(&mut self, lif: &LifConfig) {
        match self {
            Net::Coding { state, .. } => state.reset(lif),
            Net::Snn { state, .. } => state.reset(lif),
        }
    }

    fn checkpoint(&self, config_text: &str) -> Checkpoint {
        match self {
            Net::Coding { params, .. } => params.to_checkpoint(config_text),
            Net::Snn { params, .. } => params.to_checkpoint(config_text),
        }
    }

    fn present(
        &mut self,
        x: &[f64],
        label: Option<usize>,
        p: &Presentation,
        env: &Env,
        rng: &mut ChaCha8Rng,
    ) -> Result<Presented> {
        let x_rates = to_rates(x, &env.encoder)?;
        match self {
            Net::Coding { cfg, params, state } => {
                let y_rates = match label {
                    Some(c) if cfg.y_size > 0 => Some(encode_label(c, cfg.y_size, env.label_rate)?),
                    _ => None,
                };
                let out = present_stimulus(
                    state,
                    params,
                    &x_rates,
                    y_rates.as_ref(),
                    p,
                    cfg,
                    &env.lif,
                    &env.trace,
                    &env.encoder,
                    rng,
                )?;
                let predicted = if cfg.y_size > 0 {
                    Some(classify_readout(&out.y_hat)?)
                } else {
                    None
                };
                Ok(Presented {
                    predicted,
                    x_hat: out.x_hat,
                    x_target: out.x_target,
                    update_events: out.update_events,
                    spike_counts: out.spike_counts,
                    spike_sum: out.spike_sum,
                    ticks: out.ticks,
                })
            }
            Net::Snn { cfg, params, state } => {
                let out = snn_present(
                    state,
                    params,
                    &x_rates,
                    label,
                    p,
                    cfg,
                    &env.lif,
                    &env.encoder,
                    rng,
                )?;
                Ok(Presented {
                    predicted: Some(out.predicted),
                    x_hat: Vec::new(),
                    x_target: Vec::new(),
                    update_events: out.update_events,
                    spike_counts: out
                        .spike_sum
                        .iter()
                        .map(|s| s.iter().sum::<f64>() as u64)
                        .collect(),
                    spike_sum: out.spike_sum,
                    ticks: out.ticks,
                })
            }
        }
    }
}

struct Recorder {
    rows: Vec<MetricRow>,
    dt: f64,
}

impl Recorder {
    fn row(&mut self, phase: &'static str, net: &Net, out: &Presented, label: Option<usize>) -> &mut MetricRow {
        let step = net.tick();
        self.rows.push(MetricRow {
            index: self.rows.len(),
            step,
            sim_time_ms: step as f64 * self.dt,
            phase,
            pse: None,
            squared_error: None,
            baseline_pse: None,
            predicted: out.predicted,
            label,
            labeled: label.is_some(),
            update_events: out.update_events.clone(),
            spike_counts: out.spike_counts.clone(),
        });
        self.rows.last_mut().expect("just pushed")
    }
}

/// Runs one trial with seed `cfg.seed + trial`.
pub fn run_trial(cfg: &ExperimentConfig, trial: usize, data: Option<&DataSplits>) -> Result<TrialResult> {
    let trial_seed = cfg.seed.wrapping_add(trial as u64);
    let env_for = |n_classes| -> Result<Env> {
        Ok(Env {
            lif: cfg.lif(),
            trace: cfg.trace()?,
            encoder: cfg.encoder(),
            label_rate: cfg.label_rate,
            n_classes,
        })
    };
    let mut rng = trial_rng(trial_seed, STREAM_POISSON);
    let mut rec = Recorder {
        rows: Vec::new(),
        dt: cfg.dt,
    };
    let config_text = cfg.to_toml();

    match cfg.task {
        Task::Bouncing => {
            let env = env_for(0)?;
            let mut net = Net::build(cfg, GRID * GRID, 0, trial_seed)?;
            let summary = run_bouncing(cfg, &mut net, &env, trial_seed, &mut rng, &mut rec)?;
            Ok(TrialResult {
                rows: rec.rows,
                summary,
                checkpoint: net.checkpoint(&config_text),
                embeddings: None,
            })
        }
        Task::Xo => {
            let env = env_for(2)?;
            let mut net = Net::build(cfg, GRID * GRID, 2, trial_seed)?;
            let train = xo_training_stream(cfg.n_train, derived_seed(trial_seed, STREAM_DATA));
            train_on(cfg, &mut net, &env, &train, &mut rng, &mut rec)?;
            let test = xo_test_stream();
            let (acc, embeddings) = test_on(cfg, &mut net, &env, &test, &mut rng, &mut rec)?;
            Ok(TrialResult {
                rows: rec.rows,
                summary: vec![("test_accuracy".into(), acc)],
                checkpoint: net.checkpoint(&config_text),
                embeddings,
            })
        }
        Task::Classify | Task::Semi | Task::Continual => {
            let data = data.ok_or_else(|| Error::Config("dataset required".into()))?;
            let n_classes = data.train.n_classes().max(data.test.n_classes());
            let env = env_for(n_classes)?;
            let mut net = Net::build(cfg, data.train.dim, n_classes, trial_seed)?;
            let train = if cfg.shuffle_train {
                shuffled(&data.train, derived_seed(trial_seed, STREAM_DATA))
            } else {
                data.train.clone()
            };
            let stream: Vec<Sample> = match cfg.task {
                Task::Classify => train.samples,
                Task::Semi => mask_labels(&train.samples, cfg.p_u, derived_seed(trial_seed, STREAM_MASK))?,
                _ => split_task_stream(
                    &train,
                    &consecutive_pairs(n_classes),
                    cfg.p_f,
                    derived_seed(trial_seed, STREAM_FUZZ),
                )?,
            };
            let labeled = stream.iter().filter(|s| s.y.is_some()).count();
            train_on(cfg, &mut net, &env, &stream, &mut rng, &mut rec)?;
            let mut summary = vec![("train_samples".into(), stream.len() as f64), ("train_labeled".into(), labeled as f64)];
            let (acc, embeddings) = test_on(cfg, &mut net, &env, &data.test.samples, &mut rng, &mut rec)?;
            summary.push(("test_accuracy".into(), acc));
            summary.push(("test_error".into(), 1.0 - acc));
            if cfg.task == Task::Continual {
                let tests: Vec<MetricRow> = rec.rows.iter().filter(|r| r.phase == "test").cloned().collect();
                let mut per_task = Vec::new();
                for (k, classes) in consecutive_pairs(n_classes).iter().enumerate() {
                    let (pred, lab): (Vec<usize>, Vec<usize>) = tests
                        .iter()
                        .filter(|r| r.label.is_some_and(|y| classes.contains(&y)))
                        .map(|r| (r.predicted.unwrap_or(usize::MAX), r.label.unwrap()))
                        .unzip();
                    let a = accuracy(&pred, &lab)?;
                    summary.push((format!("task{}_accuracy", k + 1), a));
                    per_task.push(a);
                }
                summary.push(("acc".into(), acc_continual(&per_task)?));
            }
            Ok(TrialResult {
                rows: rec.rows,
                summary,
                checkpoint: net.checkpoint(&config_text),
                embeddings,
            })
        }
    }
}

fn train_on(
    cfg: &ExperimentConfig,
    net: &mut Net,
    env: &Env,
    stream: &[Sample],
    rng: &mut ChaCha8Rng,
    rec: &mut Recorder,
) -> Result<()> {
    let p = cfg.train_presentation(true);
    for s in stream {
        if s.y.is_none() && net.is_supervised_only() {
            continue;
        }
        if cfg.hard_reset_per_sample {
            net.reset(&env.lif);
        }
        let out = net.present(&s.x, s.y, &p, env, rng)?;
        rec.row("train", net, &out, s.y);
    }
    Ok(())
}

/// Learning off, label channel clamped, state reset before every sample.
fn test_on(
    cfg: &ExperimentConfig,
    net: &mut Net,
    env: &Env,
    test: &[Sample],
    rng: &mut ChaCha8Rng,
    rec: &mut Recorder,
) -> Result<(f64, Option<Embeddings>)> {
    let p = cfg.test_presentation();
    let mut predictions = Vec::with_capacity(test.len());
    let mut labels = Vec::with_capacity(test.len());
    let mut vectors = Vec::new();
    for s in test {
        let label = s.y.ok_or(Error::MissingLabel("test samples must be labelled"))?;
        net.reset(&env.lif);
        let out = net.present(&s.x, None, &p, env, rng)?;
        let predicted = out.predicted.ok_or_else(|| {
            Error::Config("model has no label read-out; set a label block".into())
        })?;
        if label >= env.n_classes {
            return Err(Error::ClassOutOfRange {
                class: label,
                n_classes: env.n_classes,
            });
        }
        if cfg.export_embeddings {
            vectors.push(rate_code_embedding(
                &out.spike_sum[cfg.embedding_layer - 1],
                out.ticks,
                cfg.gamma_c,
            )?);
        }
        let row = rec.row("test", net, &out, Some(label));
        row.labeled = false;
        predictions.push(predicted);
        labels.push(label);
    }
    let acc = accuracy(&predictions, &labels)?;
    let embeddings = cfg.export_embeddings.then_some((vectors, labels));
    Ok((acc, embeddings))
}

fn run_bouncing(
    cfg: &ExperimentConfig,
    net: &mut Net,
    env: &Env,
    trial_seed: u64,
    rng: &mut ChaCha8Rng,
    rec: &mut Recorder,
) -> Result<Vec<(String, f64)>> {
    let mut ball_rng = trial_rng(trial_seed, STREAM_BALLS);
    let mut balls = BallState::random(
        cfg.n_balls,
        GRID,
        cfg.ball_radius,
        (cfg.speed_min, cfg.speed_max),
        &mut ball_rng,
    )?;
    let mut pse = PseAccumulator::new(cfg.pse_alpha)?;
    let mut base_pse = PseAccumulator::new(cfg.pse_alpha)?;
    let mut baseline = FrameBaseline::new();
    let n_layers = cfg.hidden.len();
    let mut updates = vec![0u64; n_layers];
    let mut learn_steps = 0u64;
    let mut half = (f64::NAN, f64::NAN);
    let mut sums = [[0.0f64; 2]; 2];
    for i in 0..cfg.n_frames {
        let frame = bouncing_ball_next(&mut balls);
        let learn = i < cfg.learn_frames;
        let out = net.present(&frame, None, &cfg.train_presentation(learn), env, rng)?;
        if learn {
            learn_steps += out.ticks as u64;
            for (u, e) in updates.iter_mut().zip(&out.update_events) {
                *u += e;
            }
        }
        let err = squared_error(&out.x_hat, &out.x_target)?;
        let base_err = squared_error(&baseline.predict(out.x_target.len()), &out.x_target)?;
        baseline.observe(&out.x_target);
        let p = pse.update(err)?;
        let b = base_pse.update(base_err)?;
        let h = usize::from(!learn);
        sums[h][0] += err;
        sums[h][1] += base_err;
        if i + 1 == cfg.learn_frames {
            half = (p, b);
        }
        let row = rec.row("train", net, &out, None);
        row.pse = Some(p);
        row.squared_error = Some(err);
        row.baseline_pse = Some(b);
    }
    let n_first = cfg.learn_frames.max(1) as f64;
    let n_second = (cfg.n_frames - cfg.learn_frames).max(1) as f64;
    let mut summary = vec![
        ("pse_learning_end".to_string(), half.0),
        ("baseline_pse_learning_end".to_string(), half.1),
        ("pse_ratio_learning_end".to_string(), half.0 / half.1),
        ("pse_final".to_string(), pse.value()),
        ("baseline_pse_final".to_string(), base_pse.value()),
        ("pse_ratio_final".to_string(), pse.value() / base_pse.value()),
        ("mse_first_half".to_string(), sums[0][0] / n_first),
        ("baseline_mse_first_half".to_string(), sums[0][1] / n_first),
        ("mse_second_half".to_string(), sums[1][0] / n_second),
        ("baseline_mse_second_half".to_string(), sums[1][1] / n_second),
        ("learn_steps".to_string(), learn_steps as f64),
    ];
    for (l, u) in updates.iter().enumerate() {
        summary.push((format!("updates_layer{}", l + 1), *u as f64));
    }
    Ok(summary)
}

/// Runs every trial and writes the artifacts into `cfg.out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialResult>> {
    fs::create_dir_all(&cfg.out_dir)?;
    fs::write(cfg.out_dir.join("resolved_config"), cfg.to_toml())?;
    let data = match cfg.task {
        Task::Classify | Task::Semi | Task::Continual => Some(load_data(cfg)?),
        Task::Xo | Task::Bouncing => None,
    };
    let mut results = Vec::with_capacity(cfg.trials);
    for trial in 0..cfg.trials {
        let started = Instant::now();
        let result = run_trial(cfg, trial, data.as_ref())?;
        write_metrics_csv(&result.rows, &cfg.out_dir.join(format!("metrics_trial{trial}.csv")))?;
        if trial == 0 {
            result.checkpoint.save(&cfg.out_dir.join("checkpoint.bin"))?;
            if let Some((vectors, labels)) = &result.embeddings {
                export_embeddings(vectors, labels, &cfg.out_dir.join("embeddings.csv"))?;
            }
        }
        let brief: Vec<String> = result
            .summary
            .iter()
            .map(|(k, v)| format!("{k}={v:.5}"))
            .collect();
        eprintln!(
            "trial {trial} ({:.1}s): {}",
            started.elapsed().as_secs_f64(),
            brief.join(" ")
        );
        results.push(result);
    }
    let per_trial: Vec<Vec<(String, f64)>> = results.iter().map(|r| r.summary.clone()).collect();
    write_summary(&per_trial, &cfg.out_dir.join("summary.csv"))?;
    Ok(results)
}
