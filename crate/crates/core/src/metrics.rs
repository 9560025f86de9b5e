//! Online and terminal evaluation.

use crate::error::{check_len, Error, Result};

/// Prequential squared error: an exponentially decayed mean of per-stimulus
/// squared errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseAccumulator {
    pub num: f64,
    pub den: f64,
    pub alpha: f64,
}

impl PseAccumulator {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "pSE decay must lie in (0, 1], got {alpha}"
            )));
        }
        Ok(Self {
            num: 0.0,
            den: 0.0,
            alpha,
        })
    }

    pub fn update(&mut self, err: f64) -> Result<f64> {
        if !(err >= 0.0) || !err.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "squared error must be finite and non-negative, got {err}"
            )));
        }
        self.num = self.alpha * self.num + err;
        self.den = self.alpha * self.den + 1.0;
        Ok(self.value())
    }

    /// `num / den`, or 0 before the first update.
    pub fn value(&self) -> f64 {
        if self.den > 0.0 {
            self.num / self.den
        } else {
            0.0
        }
    }
}

pub fn pse_update(acc: &mut PseAccumulator, err: f64) -> Result<f64> {
    acc.update(err)
}

pub fn squared_error(x_hat: &[f64], x: &[f64]) -> Result<f64> {
    check_len("squared_error", x.len(), x_hat.len())?;
    Ok(x_hat.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// Predicts every frame as a copy of the previous one.
#[derive(Debug, Clone, Default)]
pub struct FrameBaseline {
    previous: Option<Vec<f64>>,
}

impl FrameBaseline {
    pub fn new() -> Self {
        Self::default()
    }

    /// Prediction for the next frame of dimension `dim`: the last observed
    /// frame, or zeros before any observation.
    pub fn predict(&self, dim: usize) -> Vec<f64> {
        self.previous.clone().unwrap_or_else(|| vec![0.0; dim])
    }

    pub fn observe(&mut self, frame: &[f64]) {
        self.previous = Some(frame.to_vec());
    }
}

pub fn frame_tminus1_predict(previous: Option<&[f64]>, dim: usize) -> Vec<f64> {
    previous.map_or_else(|| vec![0.0; dim], <[f64]>::to_vec)
}

pub fn accuracy(predictions: &[usize], labels: &[usize]) -> Result<f64> {
    check_len("accuracy", labels.len(), predictions.len())?;
    if labels.is_empty() {
        return Err(Error::Empty("accuracy inputs"));
    }
    let hits = predictions.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(hits as f64 / labels.len() as f64)
}

/// Mean terminal accuracy across tasks.
pub fn acc_continual(per_task: &[f64]) -> Result<f64> {
    if per_task.is_empty() {
        return Err(Error::Empty("per-task accuracies"));
    }
    Ok(per_task.iter().sum::<f64>() / per_task.len() as f64)
}

/// Sample mean and (n - 1) standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// One row per presented stimulus.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub index: usize,
    /// Simulation ticks elapsed at the end of the stimulus window.
    pub step: u64,
    /// Simulated time (ms) at the end of the stimulus window.
    pub sim_time_ms: f64,
    pub phase: &'static str,
    pub pse: Option<f64>,
    pub squared_error: Option<f64>,
    /// Reference predictor pSE, where one is defined.
    pub baseline_pse: Option<f64>,
    pub predicted: Option<usize>,
    pub label: Option<usize>,
    pub labeled: bool,
    pub update_events: Vec<u64>,
    pub spike_counts: Vec<u64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunMetrics {
    pub rows: Vec<MetricRow>,
}

impl RunMetrics {
    pub fn push(&mut self, row: MetricRow) {
        debug_assert!(self.rows.last().is_none_or(|r| r.index < row.index));
        self.rows.push(row);
    }

    /// Total update events per layer.
    pub fn total_updates(&self) -> Vec<u64> {
        let n = self.rows.iter().map(|r| r.update_events.len()).max().unwrap_or(0);
        let mut acc = vec![0u64; n];
        for r in &self.rows {
            for (a, &u) in acc.iter_mut().zip(&r.update_events) {
                *a += u;
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(errs: &[f64], alpha: f64) -> f64 {
        let i = errs.len();
        let mut num = 0.0;
        let mut den = 0.0;
        for (k, e) in errs.iter().enumerate() {
            let w = alpha.powi((i - 1 - k) as i32);
            num += w * e;
            den += w;
        }
        num / den
    }

    #[test]
    fn pse_examples() {
        let mut a = PseAccumulator::new(0.995).unwrap();
        assert_eq!(a.update(3.5).unwrap(), 3.5);

        let mut a = PseAccumulator::new(1.0).unwrap();
        a.update(2.0).unwrap();
        assert_eq!(a.update(4.0).unwrap(), 3.0);

        let mut a = PseAccumulator::new(0.5).unwrap();
        for e in [1.0, 1.0, 4.0] {
            pse_update(&mut a, e).unwrap();
        }
        assert!((a.num - 4.75).abs() < 1e-15);
        assert!((a.den - 1.75).abs() < 1e-15);
        assert!((a.value() - 19.0 / 7.0).abs() < 1e-15);

        assert!(a.update(-1.0).is_err());
        assert!(PseAccumulator::new(0.0).is_err());
    }

    #[test]
    fn squared_error_examples() {
        assert_eq!(squared_error(&[0.3, 0.4], &[0.3, 0.4]).unwrap(), 0.0);
        assert_eq!(squared_error(&[1.0, 0.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(squared_error(&[0.5, 0.5], &[0.0, 1.0]).unwrap(), 0.5);
        assert!(squared_error(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn frame_baseline() {
        let mut b = FrameBaseline::new();
        assert_eq!(b.predict(3), vec![0.0; 3]);
        let (fa, fb) = (vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]);
        let d = squared_error(&fa, &fb).unwrap();
        b.observe(&fa);
        assert_eq!(squared_error(&b.predict(3), &fb).unwrap(), d);
        b.observe(&fb);
        assert_eq!(squared_error(&b.predict(3), &fa).unwrap(), d);
        b.observe(&fa);
        assert_eq!(squared_error(&b.predict(3), &fa).unwrap(), 0.0);
        assert_eq!(frame_tminus1_predict(None, 2), vec![0.0, 0.0]);
        assert_eq!(frame_tminus1_predict(Some(&fa), 3), fa);
    }

    #[test]
    fn accuracy_and_acc() {
        assert_eq!(accuracy(&[1, 2, 3], &[1, 2, 3]).unwrap(), 1.0);
        assert_eq!(accuracy(&[0, 0], &[1, 1]).unwrap(), 0.0);
        assert_eq!(accuracy(&[1, 2, 3, 4], &[1, 2, 3, 0]).unwrap(), 0.75);
        assert!(accuracy(&[], &[]).is_err());
        assert_eq!(acc_continual(&[1.0; 5]).unwrap(), 1.0);
        assert!((acc_continual(&[0.8, 0.6]).unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(acc_continual(&[0.42]).unwrap(), 0.42);
        assert!(acc_continual(&[]).is_err());
    }

    #[test]
    fn mean_std_basic() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
        assert_eq!(mean_std(&[5.0]), (5.0, 0.0));
    }

    proptest! {
        #[test]
        fn incremental_matches_brute_force(
            errs in prop::collection::vec(0.0f64..100.0, 1..300),
            which in 0usize..3,
        ) {
            let alpha = [0.5, 0.995, 1.0][which];
            let mut acc = PseAccumulator::new(alpha).unwrap();
            for (i, &e) in errs.iter().enumerate() {
                let got = acc.update(e).unwrap();
                let want = brute_force(&errs[..=i], alpha);
                let rel = (got - want).abs() / want.abs().max(1e-300);
                prop_assert!(rel <= 1e-9 || (got - want).abs() < 1e-12);
            }
        }

        #[test]
        fn constant_error_is_fixed_point(c in 0.0f64..50.0, alpha in 0.01f64..=1.0, n in 1usize..200) {
            let mut acc = PseAccumulator::new(alpha).unwrap();
            for _ in 0..n {
                acc.update(c).unwrap();
            }
            prop_assert!((acc.value() - c).abs() <= 1e-12 * c.max(1.0));
        }

        #[test]
        fn acc_is_order_invariant(mut v in prop::collection::vec(0.0f64..=1.0, 1..10), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let a = acc_continual(&v).unwrap();
            v.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert!((acc_continual(&v).unwrap() - a).abs() < 1e-12);
        }
    }
}
