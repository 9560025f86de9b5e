use ndarray::{Array1, Array2, Zip};

use super::{SpncnConfig, SpncnParams, SpncnState};
use crate::error::{Error, Result};
use crate::neuron::SpikeResponse;

/// A weight displacement matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Delta {
    /// Exactly zero (no spike in the layer this tick).
    Zero { rows: usize, cols: usize },
    /// `scale * left * right^T`.
    Outer {
        left: Array1<f64>,
        right: Array1<f64>,
        scale: f64,
    },
    Dense(Array2<f64>),
}

impl Delta {
    pub fn outer(left: &Array1<f64>, right: &Array1<f64>, scale: f64) -> Self {
        Delta::Outer {
            left: left.clone(),
            right: right.clone(),
            scale,
        }
    }

    pub fn dim(&self) -> (usize, usize) {
        match self {
            Delta::Zero { rows, cols } => (*rows, *cols),
            Delta::Outer { left, right, .. } => (left.len(), right.len()),
            Delta::Dense(m) => m.dim(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Delta::Zero { .. } => true,
            Delta::Outer { left, right, scale } => {
                *scale == 0.0 || left.iter().all(|&v| v == 0.0) || right.iter().all(|&v| v == 0.0)
            }
            Delta::Dense(m) => m.iter().all(|&v| v == 0.0),
        }
    }

    pub fn to_dense(&self) -> Array2<f64> {
        match self {
            Delta::Zero { rows, cols } => Array2::zeros((*rows, *cols)),
            Delta::Outer { left, right, scale } => {
                let mut m = Array2::zeros((left.len(), right.len()));
                for (i, &a) in left.iter().enumerate() {
                    for (j, &b) in right.iter().enumerate() {
                        m[[i, j]] = scale * a * b;
                    }
                }
                m
            }
            Delta::Dense(m) => m.clone(),
        }
    }

    /// `-beta * self^T`.
    pub fn transposed_scaled(&self, factor: f64) -> Self {
        match self {
            Delta::Zero { rows, cols } => Delta::Zero {
                rows: *cols,
                cols: *rows,
            },
            Delta::Outer { left, right, scale } => Delta::Outer {
                left: right.clone(),
                right: left.clone(),
                scale: scale * factor,
            },
            Delta::Dense(m) => Delta::Dense(m.t().mapv(|v| v * factor)),
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            Delta::Zero { .. } => true,
            Delta::Outer { left, right, scale } => {
                scale.is_finite()
                    && left.iter().all(|v| v.is_finite())
                    && right.iter().all(|v| v.is_finite())
            }
            Delta::Dense(m) => m.iter().all(|v| v.is_finite()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerDeltas {
    pub w: Delta,
    pub e: Delta,
}

/// Per-layer displacements, index `l - 1` for layer `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct Deltas {
    pub layers: Vec<LayerDeltas>,
}

impl Deltas {
    /// Layers with a non-zero update this tick.
    pub fn active_layers(&self) -> impl Iterator<Item = usize> + '_ {
        self.layers
            .iter()
            .enumerate()
            .filter(|(_, d)| !matches!(d.w, Delta::Zero { .. }))
            .map(|(l, _)| l)
    }
}

/// Spike-triggered local representation alignment:
/// `dW[l] = e[l-1] s[l]^T`, `dE[l] = -beta s[l] e[l-1]^T`.
pub fn compute_updates<M: SpikeResponse>(state: &SpncnState<M>, cfg: &SpncnConfig) -> Deltas {
    let layers = (0..state.n_layers())
        .map(|l| {
            let s = &state.spikes[l];
            let e = &state.error[l];
            if state.active[l].is_empty() {
                return LayerDeltas {
                    w: Delta::Zero {
                        rows: e.len(),
                        cols: s.len(),
                    },
                    e: Delta::Zero {
                        rows: s.len(),
                        cols: e.len(),
                    },
                };
            }
            let dw = Delta::outer(e, s, 1.0);
            let de = if cfg.reuse_error_delta {
                dw.transposed_scaled(-cfg.beta)
            } else {
                Delta::outer(s, e, -cfg.beta)
            };
            LayerDeltas { w: dw, e: de }
        })
        .collect();
    Deltas { layers }
}

/// Convex blend of ST-LRA with online STDP under soft bounds
/// `A+(W) = w_max - W`, `A-(W) = W - w_min`. `dE` is the ST-LRA one.
pub fn stdp_hybrid_updates<M: SpikeResponse>(
    state: &SpncnState<M>,
    params: &SpncnParams,
    cfg: &SpncnConfig,
) -> Deltas {
    let mut deltas = compute_updates(state, cfg);
    if cfg.lambda == 0.0 {
        return deltas;
    }
    let lambda = cfg.lambda;
    for (l, d) in deltas.layers.iter_mut().enumerate() {
        let w = &params.w[l];
        let pre_s = state.layer_spikes(l);
        let pre_z = state.layer_trace(l);
        let post_s = &state.spikes[l];
        let post_z = &state.trace[l];
        let e = &state.error[l];
        let mut dw = Array2::<f64>::zeros(w.raw_dim());
        let mut any = false;
        for j in 0..w.ncols() {
            let (sj, zj) = (post_s[j], post_z[j]);
            if sj == 0.0 && zj == 0.0 {
                continue;
            }
            for i in 0..w.nrows() {
                let wij = w[[i, j]];
                let lra = e[i] * sj;
                let ltp = (cfg.w_max - wij) * pre_s[i] * zj;
                let ltd = (wij - cfg.w_min) * pre_z[i] * sj;
                let v = (1.0 - lambda) * lra - lambda * (ltp + ltd);
                if v != 0.0 {
                    any = true;
                }
                dw[[i, j]] = v;
            }
        }
        d.w = if any {
            Delta::Dense(dw)
        } else {
            Delta::Zero {
                rows: w.nrows(),
                cols: w.ncols(),
            }
        };
    }
    deltas
}

/// `W <- W - alpha_u dW`, `E <- E - alpha_u dE`, then every column whose
/// norm exceeds `w_bound` is rescaled onto the bound.
pub fn apply_updates(params: &mut SpncnParams, deltas: &Deltas, cfg: &SpncnConfig) -> Result<()> {
    if deltas.layers.len() != params.n_layers() {
        return Err(Error::DimensionMismatch {
            context: "apply_updates layers",
            expected: params.n_layers(),
            found: deltas.layers.len(),
        });
    }
    for (l, d) in deltas.layers.iter().enumerate() {
        for (delta, m, ctx) in [
            (&d.w, &params.w[l], "apply_updates dW shape"),
            (&d.e, &params.e[l], "apply_updates dE shape"),
        ] {
            if delta.dim() != m.dim() {
                return Err(Error::DimensionMismatch {
                    context: ctx,
                    expected: m.len(),
                    found: delta.dim().0 * delta.dim().1,
                });
            }
            if !delta.is_finite() {
                return Err(Error::NonFinite {
                    context: "weight update",
                });
            }
        }
    }
    let step = cfg.alpha_u;
    for (l, d) in deltas.layers.iter().enumerate() {
        apply_one(&mut params.w[l], &d.w, step, cfg.w_bound);
        apply_one(&mut params.e[l], &d.e, step, cfg.w_bound);
    }
    Ok(())
}

/// `m <- m - step * delta` followed by the column-norm projection.
pub(crate) fn apply_delta(m: &mut Array2<f64>, delta: &Delta, step: f64, bound: f64) -> Result<()> {
    if !delta.is_finite() {
        return Err(Error::NonFinite {
            context: "weight update",
        });
    }
    apply_one(m, delta, step, bound);
    Ok(())
}

fn apply_one(m: &mut Array2<f64>, delta: &Delta, step: f64, bound: f64) {
    match delta {
        Delta::Zero { .. } => {}
        Delta::Outer { left, right, scale } => {
            let touched: Vec<usize> = right
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(j, _)| j)
                .collect();
            if touched.is_empty() || *scale == 0.0 {
                return;
            }
            let column_major = m.t().is_standard_layout() && m.ncols() > 1;
            if column_major {
                // W-type matrices: each nonzero right entry touches one column
                for &j in &touched {
                    m.column_mut(j).scaled_add(-step * scale * right[j], left);
                }
                if bound.is_finite() {
                    for &j in &touched {
                        bound_column(m, j, bound);
                    }
                }
            } else {
                for (i, &a) in left.iter().enumerate() {
                    if a == 0.0 {
                        continue;
                    }
                    let coef = -step * scale * a;
                    let mut row = m.row_mut(i);
                    for &j in &touched {
                        row[j] += coef * right[j];
                    }
                }
                if bound.is_finite() {
                    bound_columns_subset(m, &touched, bound);
                }
            }
        }
        Delta::Dense(dm) => {
            m.scaled_add(-step, dm);
            bound_all_columns(m, bound);
        }
    }
}

fn bound_column(m: &mut Array2<f64>, j: usize, bound: f64) {
    let mut col = m.column_mut(j);
    let norm = col.dot(&col).sqrt();
    if norm > bound {
        col *= bound / norm;
    }
}

/// Norm projection restricted to the listed columns (all other columns are
/// unchanged by the update that preceded this call).
fn bound_columns_subset(m: &mut Array2<f64>, cols: &[usize], bound: f64) {
    if cols.len() * 4 >= m.ncols() {
        bound_all_columns(m, bound);
        return;
    }
    for &j in cols {
        bound_column(m, j, bound);
    }
}

pub(crate) fn column_sq_norms(m: &Array2<f64>) -> Array1<f64> {
    let mut acc = Array1::<f64>::zeros(m.ncols());
    for row in m.rows() {
        Zip::from(&mut acc).and(&row).for_each(|a, &x| *a += x * x);
    }
    acc
}

pub(crate) fn bound_all_columns(m: &mut Array2<f64>, bound: f64) {
    if !bound.is_finite() {
        return;
    }
    let norms = column_sq_norms(m);
    let scales: Array1<f64> = norms.mapv(|sq| {
        let n = sq.sqrt();
        if n > bound {
            bound / n
        } else {
            1.0
        }
    });
    if scales.iter().all(|&s| s == 1.0) {
        return;
    }
    for mut row in m.rows_mut() {
        Zip::from(&mut row).and(&scales).for_each(|x, &s| *x *= s);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neuron::LifConfig;
    use crate::spncn::SpncnState;
    use ndarray::{arr1, arr2, ShapeBuilder};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn state_with(
        cfg: &SpncnConfig,
        errors: &[Array1<f64>],
        spikes: &[Array1<f64>],
    ) -> SpncnState<LifConfig> {
        let lif = LifConfig::default();
        let mut st = SpncnState::new(cfg, &lif);
        for l in 0..cfg.n_layers() {
            st.error[l] = errors[l].clone();
            st.spikes[l] = spikes[l].clone();
            st.active[l] = spikes[l]
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(i, _)| i)
                .collect();
        }
        st
    }

    #[test]
    fn outer_product_example() {
        let mut cfg = SpncnConfig::new(2, 0, vec![3]);
        cfg.beta = 0.9;
        let st = state_with(&cfg, &[arr1(&[1.0, -1.0])], &[arr1(&[1.0, 0.0, 1.0])]);
        let d = compute_updates(&st, &cfg);
        assert_eq!(
            d.layers[0].w.to_dense(),
            arr2(&[[1.0, 0.0, 1.0], [-1.0, 0.0, -1.0]])
        );
        let de = d.layers[0].e.to_dense();
        let want = arr2(&[[-0.9, 0.9], [0.0, 0.0], [-0.9, 0.9]]);
        for (a, b) in de.iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn no_spike_or_no_error_means_no_update() {
        let cfg = SpncnConfig::new(2, 0, vec![3]);
        let st = state_with(&cfg, &[arr1(&[1.0, -1.0])], &[arr1(&[0.0, 0.0, 0.0])]);
        let d = compute_updates(&st, &cfg);
        assert!(d.layers[0].w.is_zero() && d.layers[0].e.is_zero());
        assert_eq!(d.active_layers().count(), 0);

        let st = state_with(&cfg, &[arr1(&[0.0, 0.0])], &[arr1(&[1.0, 1.0, 0.0])]);
        let d = compute_updates(&st, &cfg);
        assert!(d.layers[0].w.to_dense().iter().all(|&v| v == 0.0));
        assert!(d.layers[0].e.to_dense().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn reuse_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut cfg = SpncnConfig::new(6, 0, vec![5]);
        cfg.beta = 0.7;
        let e = Array1::from_iter((0..6).map(|_| rng.random_range(-1.0..1.0)));
        let s = Array1::from_iter((0..5).map(|_| f64::from(rng.random_bool(0.5))));
        let st = state_with(&cfg, &[e], &[s]);
        let direct = compute_updates(&st, &cfg);
        cfg.reuse_error_delta = true;
        let reused = compute_updates(&st, &cfg);
        assert_eq!(direct.layers[0].e.to_dense(), reused.layers[0].e.to_dense());
        let w_t = direct.layers[0].w.to_dense().t().mapv(|v| -0.7 * v);
        assert_eq!(direct.layers[0].e.to_dense(), w_t);
    }

    #[test]
    fn hybrid_scalar_example() {
        let mut cfg = SpncnConfig::new(1, 0, vec![1]);
        cfg.lambda = 0.5;
        cfg.w_max = 1.0;
        cfg.w_min = 0.0;
        let mut params = SpncnParams::build(&cfg, 0).unwrap();
        params.w[0].fill(0.5);
        let mut st = state_with(&cfg, &[arr1(&[0.2])], &[arr1(&[1.0])]);
        st.sensory_spikes = arr1(&[1.0]);
        st.sensory_trace = arr1(&[0.4]);
        st.trace[0] = arr1(&[0.6]);
        let d = stdp_hybrid_updates(&st, &params, &cfg);
        assert!((d.layers[0].w.to_dense()[[0, 0]] - (-0.15)).abs() < 1e-12);
    }

    #[test]
    fn hybrid_saturated_potentiation_vanishes() {
        let mut cfg = SpncnConfig::new(2, 0, vec![2]);
        cfg.lambda = 1.0;
        cfg.w_max = 1.0;
        cfg.w_min = -1.0;
        let mut params = SpncnParams::build(&cfg, 0).unwrap();
        params.w[0].fill(1.0);
        let mut st = state_with(&cfg, &[arr1(&[0.3, -0.2])], &[arr1(&[1.0, 0.0])]);
        st.sensory_spikes = arr1(&[1.0, 1.0]);
        st.sensory_trace = arr1(&[0.5, 0.25]);
        st.trace[0] = arr1(&[0.7, 0.9]);
        let d = stdp_hybrid_updates(&st, &params, &cfg).layers[0].w.to_dense();
        for i in 0..2 {
            for j in 0..2 {
                let want = -(1.0 - (-1.0)) * st.sensory_trace[i] * st.spikes[0][j];
                assert!((d[[i, j]] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn hybrid_with_zero_lambda_is_pure_lra() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let cfg = SpncnConfig::new(5, 2, vec![4, 3]);
        let params = SpncnParams::build(&cfg, 2).unwrap();
        let errors: Vec<_> = [7, 4]
            .iter()
            .map(|&n| Array1::from_iter((0..n).map(|_| rng.random_range(-1.0..1.0))))
            .collect();
        let spikes: Vec<_> = [4, 3]
            .iter()
            .map(|&n| Array1::from_iter((0..n).map(|_| f64::from(rng.random_bool(0.5)))))
            .collect();
        let st = state_with(&cfg, &errors, &spikes);
        assert_eq!(stdp_hybrid_updates(&st, &params, &cfg), compute_updates(&st, &cfg));
    }

    #[test]
    fn apply_examples() {
        let mut cfg = SpncnConfig::new(1, 0, vec![1]);
        cfg.alpha_u = 0.25;
        let mut params = SpncnParams::build(&cfg, 0).unwrap();
        params.w[0].fill(1.0);
        params.e[0].fill(0.0);
        let before = params.clone();
        let zero = Deltas {
            layers: vec![LayerDeltas {
                w: Delta::Zero { rows: 1, cols: 1 },
                e: Delta::Zero { rows: 1, cols: 1 },
            }],
        };
        apply_updates(&mut params, &zero, &cfg).unwrap();
        assert_eq!(params, before);

        let d = Deltas {
            layers: vec![LayerDeltas {
                w: Delta::Dense(arr2(&[[2.0]])),
                e: Delta::Zero { rows: 1, cols: 1 },
            }],
        };
        apply_updates(&mut params, &d, &cfg).unwrap();
        assert_eq!(params.w[0][[0, 0]], 0.5);
    }

    #[test]
    fn column_projected_onto_ball() {
        let mut cfg = SpncnConfig::new(2, 0, vec![1]);
        cfg.alpha_u = 1.0;
        cfg.w_bound = 20.0;
        let mut params = SpncnParams::build(&cfg, 0).unwrap();
        params.w[0].fill(0.0);
        let d = Deltas {
            layers: vec![LayerDeltas {
                w: Delta::outer(&arr1(&[-30.0, -40.0]), &arr1(&[1.0]), 1.0),
                e: Delta::Zero { rows: 1, cols: 2 },
            }],
        };
        apply_updates(&mut params, &d, &cfg).unwrap();
        assert!((params.w[0][[0, 0]] - 12.0).abs() < 1e-12);
        assert!((params.w[0][[1, 0]] - 16.0).abs() < 1e-12);
    }

    #[test]
    fn non_finite_delta_aborts() {
        let cfg = SpncnConfig::new(1, 0, vec![1]);
        let mut params = SpncnParams::build(&cfg, 0).unwrap();
        let d = Deltas {
            layers: vec![LayerDeltas {
                w: Delta::Dense(arr2(&[[f64::NAN]])),
                e: Delta::Zero { rows: 1, cols: 1 },
            }],
        };
        assert!(matches!(
            apply_updates(&mut params, &d, &cfg),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn gradient_identity_against_finite_differences() {
        // dW = e s^T must equal d/dW of 0.5 * ||W s - z||^2
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let (rows, cols) = (rng.random_range(1..6), rng.random_range(1..6));
            let w = Array2::from_shape_fn((rows, cols), |_| rng.random_range(-1.0..1.0));
            let s = Array1::from_iter((0..cols).map(|_| f64::from(rng.random_bool(0.6))));
            let z = Array1::from_iter((0..rows).map(|_| rng.random_range(0.0..1.0)));
            let loss = |w: &Array2<f64>| {
                let r = w.dot(&s) - &z;
                0.5 * r.dot(&r)
            };
            let e = w.dot(&s) - &z;
            let analytic = Delta::outer(&e, &s, 1.0).to_dense();
            let h = 1e-6;
            for i in 0..rows {
                for j in 0..cols {
                    let mut wp = w.clone();
                    wp[[i, j]] += h;
                    let mut wm = w.clone();
                    wm[[i, j]] -= h;
                    let fd = (loss(&wp) - loss(&wm)) / (2.0 * h);
                    let a = analytic[[i, j]];
                    let denom = a.abs().max(fd.abs()).max(1e-8);
                    assert!((a - fd).abs() / denom < 1e-5 || (a - fd).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn transpose_tracking_without_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut cfg = SpncnConfig::new(6, 0, vec![4]);
        cfg.beta = 1.0;
        cfg.alpha_u = 0.1;
        cfg.w_bound = f64::INFINITY;
        cfg.mirror_init = true;
        let mut params = SpncnParams::build(&cfg, 3).unwrap();
        for _ in 0..200 {
            let e = Array1::from_iter((0..6).map(|_| rng.random_range(-2.0..2.0)));
            let s = Array1::from_iter((0..4).map(|_| f64::from(rng.random_bool(0.3))));
            let st = state_with(&cfg, &[e], &[s]);
            let d = compute_updates(&st, &cfg);
            apply_updates(&mut params, &d, &cfg).unwrap();
        }
        for r in 0..6 {
            for c in 0..4 {
                assert!((params.e[0][[c, r]] + params.w[0][[r, c]]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dense_and_outer_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut cfg = SpncnConfig::new(30, 0, vec![40]);
        cfg.w_bound = 1.5;
        cfg.alpha_u = 0.5;
        cfg.init_scale = 0.3;
        let base = SpncnParams::build(&cfg, 3).unwrap();
        let e = Array1::from_iter((0..30).map(|_| rng.random_range(-2.0..2.0)));
        let s = Array1::from_iter((0..40).map(|_| f64::from(rng.random_bool(0.1))));
        let st = state_with(&cfg, &[e], &[s]);
        let sparse = compute_updates(&st, &cfg);
        let dense = Deltas {
            layers: sparse
                .layers
                .iter()
                .map(|d| LayerDeltas {
                    w: Delta::Dense(d.w.to_dense()),
                    e: Delta::Dense(d.e.to_dense()),
                })
                .collect(),
        };
        let mut a = base.clone();
        apply_updates(&mut a, &sparse, &cfg).unwrap();
        let mut b = base.clone();
        apply_updates(&mut b, &dense, &cfg).unwrap();
        for (x, y) in a.w.iter().chain(&a.e).zip(b.w.iter().chain(&b.e)) {
            for (u, v) in x.iter().zip(y.iter()) {
                assert!((u - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn layout_does_not_matter_for_apply() {
        let cfg = SpncnConfig::new(3, 0, vec![2]);
        let mut p1 = SpncnParams::build(&cfg, 1).unwrap();
        let mut p2 = p1.clone();
        let mut c_layout = Array2::zeros((3, 2));
        c_layout.assign(&p2.w[0]);
        p2.w[0] = c_layout;
        let mut f_layout = Array2::zeros((2, 3).f());
        f_layout.assign(&p2.e[0]);
        p2.e[0] = f_layout;
        let st = state_with(&cfg, &[arr1(&[0.5, -0.5, 1.0])], &[arr1(&[1.0, 0.0])]);
        let d = compute_updates(&st, &cfg);
        apply_updates(&mut p1, &d, &cfg).unwrap();
        apply_updates(&mut p2, &d, &cfg).unwrap();
        assert_eq!(p1, p2);
    }

    proptest! {
        #[test]
        fn columns_stay_bounded(seed in 0u64..500, bound in 0.1f64..5.0, alpha in 0.01f64..10.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut cfg = SpncnConfig::new(8, 2, vec![6, 4]);
            cfg.w_bound = bound;
            cfg.alpha_u = alpha;
            cfg.init_scale = 1.0;
            let mut params = SpncnParams::build(&cfg, seed).unwrap();
            for _ in 0..10 {
                let errors: Vec<_> = [10, 6]
                    .iter()
                    .map(|&n| Array1::from_iter((0..n).map(|_| rng.random_range(-3.0..3.0))))
                    .collect();
                let spikes: Vec<_> = [6, 4]
                    .iter()
                    .map(|&n| Array1::from_iter((0..n).map(|_| f64::from(rng.random_bool(0.4)))))
                    .collect();
                let st = state_with(&cfg, &errors, &spikes);
                apply_updates(&mut params, &compute_updates(&st, &cfg), &cfg).unwrap();
                prop_assert!(params.max_column_norm() <= bound + 1e-9);
            }
        }

        #[test]
        fn silent_layers_produce_exact_zero(seed in 0u64..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cfg = SpncnConfig::new(5, 0, vec![4, 3]);
            let errors: Vec<_> = [5, 4]
                .iter()
                .map(|&n| Array1::from_iter((0..n).map(|_| rng.random_range(-1.0..1.0))))
                .collect();
            let spikes = vec![Array1::zeros(4), Array1::from_iter((0..3).map(|_| f64::from(rng.random_bool(0.5))))];
            let st = state_with(&cfg, &errors, &spikes);
            let d = compute_updates(&st, &cfg);
            let zero_w = matches!(d.layers[0].w, Delta::Zero { .. });
            prop_assert!(zero_w);
            let zero_e = matches!(d.layers[0].e, Delta::Zero { .. });
            prop_assert!(zero_e);
        }
    }
}
