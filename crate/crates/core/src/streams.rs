//! Data sources and stream construction.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const IDX_IMAGES: u32 = 0x0000_0803;
const IDX_LABELS: u32 = 0x0000_0801;

/// Side length of the synthetic video and glyph grids.
pub const GRID: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: Option<usize>,
    pub task_id: Option<usize>,
}

impl Sample {
    pub fn labeled(x: Vec<f64>, y: usize) -> Self {
        Self {
            x,
            y: Some(y),
            task_id: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub dim: usize,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>) -> Result<Self> {
        let dim = samples.first().ok_or(Error::Empty("dataset"))?.x.len();
        if dim == 0 {
            return Err(Error::Empty("feature vector"));
        }
        if let Some(s) = samples.iter().find(|s| s.x.len() != dim) {
            return Err(Error::DimensionMismatch {
                context: "dataset sample",
                expected: dim,
                found: s.x.len(),
            });
        }
        Ok(Self { samples, dim })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// One more than the largest label present.
    pub fn n_classes(&self) -> usize {
        self.samples
            .iter()
            .filter_map(|s| s.y)
            .max()
            .map_or(0, |m| m + 1)
    }

    /// The first `n` samples.
    pub fn truncated(&self, n: usize) -> Self {
        Self {
            samples: self.samples.iter().take(n).cloned().collect(),
            dim: self.dim,
        }
    }

    pub fn filter_classes(&self, classes: &[usize]) -> Self {
        Self {
            samples: self
                .samples
                .iter()
                .filter(|s| s.y.is_some_and(|y| classes.contains(&y)))
                .cloned()
                .collect(),
            dim: self.dim,
        }
    }
}

fn read_be_u32(bytes: &[u8], offset: usize, path: &Path) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes(b.try_into().unwrap()))
        .ok_or_else(|| Error::Truncated {
            path: path.to_path_buf(),
            expected: (offset + 4) as u64,
            found: bytes.len() as u64,
        })
}

fn check_size(bytes: &[u8], expected: u64, path: &Path) -> Result<()> {
    if (bytes.len() as u64) < expected {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected,
            found: bytes.len() as u64,
        });
    }
    Ok(())
}

/// Reads an IDX image file (`0x00000803`) and its label file (`0x00000801`).
/// Pixels are returned as raw byte values.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let images = fs::read(images_path)?;
    let labels = fs::read(labels_path)?;

    let magic = read_be_u32(&images, 0, images_path)?;
    if magic != IDX_IMAGES {
        return Err(Error::BadMagic {
            path: images_path.to_path_buf(),
            expected: IDX_IMAGES,
            found: magic,
        });
    }
    let n_images = read_be_u32(&images, 4, images_path)? as usize;
    let rows = read_be_u32(&images, 8, images_path)? as usize;
    let cols = read_be_u32(&images, 12, images_path)? as usize;
    let dim = rows * cols;
    check_size(&images, 16 + (n_images * dim) as u64, images_path)?;

    let magic = read_be_u32(&labels, 0, labels_path)?;
    if magic != IDX_LABELS {
        return Err(Error::BadMagic {
            path: labels_path.to_path_buf(),
            expected: IDX_LABELS,
            found: magic,
        });
    }
    let n_labels = read_be_u32(&labels, 4, labels_path)? as usize;
    check_size(&labels, 8 + n_labels as u64, labels_path)?;

    if n_images != n_labels {
        return Err(Error::CountMismatch {
            images: n_images,
            labels: n_labels,
        });
    }
    if n_images == 0 || dim == 0 {
        return Err(Error::Empty("IDX dataset"));
    }
    let samples = images[16..16 + n_images * dim]
        .chunks_exact(dim)
        .zip(&labels[8..8 + n_labels])
        .map(|(px, &y)| Sample::labeled(px.iter().map(|&p| f64::from(p)).collect(), y as usize))
        .collect();
    Ok(Dataset { samples, dim })
}

/// Reads a numeric CSV; when `labeled`, the last column is a class index.
pub fn load_csv_vectors(path: &Path, labeled: bool) -> Result<Dataset> {
    let text = fs::read_to_string(path)?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut samples = Vec::new();
    let mut width = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let cells = raw
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .map_err(|e| parse_err(line_no, format!("cell {c:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        match width {
            None => width = Some(cells.len()),
            Some(w) if w != cells.len() => {
                return Err(parse_err(
                    line_no,
                    format!("expected {w} columns, found {}", cells.len()),
                ))
            }
            _ => {}
        }
        let sample = if labeled {
            let (x, label) = cells.split_at(cells.len() - 1);
            let label = label[0];
            if label < 0.0 || label.fract() != 0.0 {
                return Err(parse_err(line_no, format!("label {label} is not a class index")));
            }
            Sample::labeled(x.to_vec(), label as usize)
        } else {
            Sample {
                x: cells,
                y: None,
                task_id: None,
            }
        };
        if sample.x.is_empty() {
            return Err(parse_err(line_no, "row has no features".into()));
        }
        samples.push(sample);
    }
    if samples.is_empty() {
        return Err(Error::Empty("CSV dataset"));
    }
    Dataset::new(samples)
}

/// Seeded permutation of a dataset.
pub fn shuffled(dataset: &Dataset, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = dataset.samples.clone();
    samples.shuffle(&mut rng);
    Dataset {
        samples,
        dim: dataset.dim,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    /// Center `(x, y)` in pixel units; `x` runs along columns.
    pub pos: [f64; 2],
    /// Displacement per frame.
    pub vel: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallState {
    pub balls: Vec<Ball>,
    pub size: usize,
    pub radius: f64,
}

impl BallState {
    /// Balls placed uniformly inside the box with a uniform direction and a
    /// speed drawn from `speed`.
    pub fn random<R: Rng + ?Sized>(
        n_balls: usize,
        size: usize,
        radius: f64,
        speed: (f64, f64),
        rng: &mut R,
    ) -> Result<Self> {
        let side = size as f64;
        if !(radius > 0.0 && 2.0 * radius < side) || !(speed.0 >= 0.0 && speed.1 >= speed.0) {
            return Err(Error::InvalidConfig(format!(
                "ball radius {radius} must fit a {size}-pixel box and speed range {speed:?} must be ordered"
            )));
        }
        if speed.1 > side - 2.0 * radius {
            return Err(Error::InvalidConfig(format!(
                "ball speed {} exceeds the free width of the box",
                speed.1
            )));
        }
        let balls = (0..n_balls)
            .map(|_| {
                let pos = [
                    rng.random_range(radius..=side - radius),
                    rng.random_range(radius..=side - radius),
                ];
                let theta = rng.random_range(0.0..std::f64::consts::TAU);
                let v = if speed.1 > speed.0 {
                    rng.random_range(speed.0..speed.1)
                } else {
                    speed.0
                };
                Ball {
                    pos,
                    vel: [v * theta.cos(), v * theta.sin()],
                }
            })
            .collect();
        Ok(Self {
            balls,
            size,
            radius,
        })
    }

    pub fn render(&self) -> Vec<f64> {
        let n = self.size;
        let r2 = self.radius * self.radius;
        let mut frame = vec![0.0; n * n];
        for b in &self.balls {
            for row in 0..n {
                let dy = row as f64 + 0.5 - b.pos[1];
                for col in 0..n {
                    let dx = col as f64 + 0.5 - b.pos[0];
                    if dx * dx + dy * dy <= r2 {
                        frame[row * n + col] = 1.0;
                    }
                }
            }
        }
        frame
    }
}

/// Advances every ball one frame with specular reflection off the walls and
/// renders the new frame (row-major, values in `{0, 1}`).
pub fn bouncing_ball_next(state: &mut BallState) -> Vec<f64> {
    let lo = state.radius;
    let hi = state.size as f64 - state.radius;
    for b in &mut state.balls {
        for k in 0..2 {
            let mut p = b.pos[k] + b.vel[k];
            if p < lo {
                p = 2.0 * lo - p;
                b.vel[k] = -b.vel[k];
            } else if p > hi {
                p = 2.0 * hi - p;
                b.vel[k] = -b.vel[k];
            }
            b.pos[k] = p.clamp(lo, hi);
        }
    }
    state.render()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Glyph {
    X,
    O,
}

impl Glyph {
    pub fn class(self) -> usize {
        match self {
            Glyph::X => 0,
            Glyph::O => 1,
        }
    }
}

/// `{O,O,X,X,O,X,X,X,X,O,O,X,O}`.
pub const XO_TEST_SEQUENCE: [Glyph; 13] = {
    use Glyph::{O, X};
    [O, O, X, X, O, X, X, X, X, O, O, X, O]
};

/// The X (two-pixel-thick diagonals) and O (ring of radius 6, two pixels
/// thick) glyphs, flattened row-major.
pub fn xo_patterns() -> (Vec<f64>, Vec<f64>) {
    let n = GRID;
    let mut x = vec![0.0; n * n];
    let mut o = vec![0.0; n * n];
    let c = n as f64 / 2.0;
    for i in 0..n {
        for j in 0..n {
            if i == j || i == j + 1 || i + j == n - 1 || i + j == n {
                x[i * n + j] = 1.0;
            }
            let d = ((i as f64 + 0.5 - c).powi(2) + (j as f64 + 0.5 - c).powi(2)).sqrt();
            if (5.0..7.0).contains(&d) {
                o[i * n + j] = 1.0;
            }
        }
    }
    (x, o)
}

pub fn glyph(g: Glyph) -> Vec<f64> {
    let (x, o) = xo_patterns();
    match g {
        Glyph::X => x,
        Glyph::O => o,
    }
}

/// A seeded shuffle of `n` labelled X/O samples, balanced between the two
/// glyphs (X gets the extra one when `n` is odd).
pub fn xo_training_stream(n: usize, seed: u64) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut glyphs: Vec<Glyph> = (0..n)
        .map(|i| if i % 2 == 0 { Glyph::X } else { Glyph::O })
        .collect();
    glyphs.shuffle(&mut rng);
    glyphs
        .into_iter()
        .map(|g| Sample::labeled(glyph(g), g.class()))
        .collect()
}

pub fn xo_test_stream() -> Vec<Sample> {
    XO_TEST_SEQUENCE
        .iter()
        .map(|&g| Sample::labeled(glyph(g), g.class()))
        .collect()
}

/// Concatenates per-task sub-streams in task order. Within task `k` each
/// position is, with probability `p_f`, occupied by a sample drawn uniformly
/// from the other tasks. The displaced sample of task `k` is the one injected
/// elsewhere, so every sample is emitted exactly once and the length is
/// unchanged. Emitted samples carry no task id.
pub fn split_task_stream(
    dataset: &Dataset,
    task_classes: &[Vec<usize>],
    p_f: f64,
    seed: u64,
) -> Result<Vec<Sample>> {
    if !(0.0..=1.0).contains(&p_f) {
        return Err(Error::InvalidConfig(format!("p_f must lie in [0, 1], got {p_f}")));
    }
    let mut owner = BTreeMap::new();
    for (k, classes) in task_classes.iter().enumerate() {
        for &c in classes {
            if owner.insert(c, k).is_some() {
                return Err(Error::OverlappingTasks(c));
            }
        }
    }
    let n_tasks = task_classes.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_task: Vec<Vec<Sample>> = vec![Vec::new(); n_tasks];
    for s in &dataset.samples {
        if let Some(&k) = s.y.and_then(|y| owner.get(&y)) {
            let mut s = s.clone();
            s.task_id = None;
            per_task[k].push(s);
        }
    }
    for t in &mut per_task {
        t.shuffle(&mut rng);
    }

    // slot layout: for each task, which positions are foreign
    let foreign: Vec<Vec<bool>> = per_task
        .iter()
        .map(|t| {
            t.iter()
                .map(|_| n_tasks > 1 && rng.random_bool(p_f))
                .collect()
        })
        .collect();

    // own slots take the first samples of the task, the rest become spares
    let mut spares: Vec<(usize, Sample)> = Vec::new();
    let mut own: Vec<std::vec::IntoIter<Sample>> = Vec::with_capacity(n_tasks);
    for (k, samples) in per_task.into_iter().enumerate() {
        let n_own = foreign[k].iter().filter(|&&f| !f).count();
        let mut samples = samples;
        for s in samples.drain(n_own..) {
            spares.push((k, s));
        }
        own.push(samples.into_iter());
    }

    // assign spares to foreign slots from other tasks, visiting slots in a
    // random order
    let mut slots: Vec<(usize, usize)> = foreign
        .iter()
        .enumerate()
        .flat_map(|(k, f)| f.iter().enumerate().filter(|(_, &b)| b).map(move |(i, _)| (k, i)))
        .collect();
    slots.shuffle(&mut rng);
    let mut filled: BTreeMap<(usize, usize), (usize, Sample)> = BTreeMap::new();
    let mut reverted: Vec<(usize, usize)> = Vec::new();
    for &(k, i) in &slots {
        let candidates: Vec<usize> = (0..spares.len()).filter(|&j| spares[j].0 != k).collect();
        if !candidates.is_empty() {
            let j = candidates[rng.random_range(0..candidates.len())];
            filled.insert((k, i), spares.swap_remove(j));
            continue;
        }
        // only own-task spares remain: swap with an earlier slot of another
        // task that holds a sample foreign to `k`
        let own_spare = spares.iter().position(|(t, _)| *t == k);
        let donor = filled
            .iter()
            .find(|(&(slot_task, _), (src, _))| slot_task != k && *src != k)
            .map(|(&key, _)| key);
        match (own_spare, donor) {
            (Some(j), Some(key)) => {
                let moved = filled.remove(&key).expect("donor exists");
                filled.insert(key, spares.swap_remove(j));
                filled.insert((k, i), moved);
            }
            _ => reverted.push((k, i)),
        }
    }
    // slots that could not be filled from another task keep an own sample
    for (k, i) in reverted {
        let j = spares
            .iter()
            .position(|(t, _)| *t == k)
            .expect("an own spare exists for every unfilled slot");
        filled.insert((k, i), spares.swap_remove(j));
    }
    debug_assert!(spares.is_empty());

    let mut out = Vec::with_capacity(dataset.len());
    for (k, flags) in foreign.iter().enumerate() {
        for (i, &f) in flags.iter().enumerate() {
            if f {
                out.push(filled.remove(&(k, i)).expect("every foreign slot is filled").1);
            } else {
                out.push(own[k].next().expect("own slot count matches"));
            }
        }
    }
    Ok(out)
}

/// Removes each label independently with probability `p_u`.
pub fn mask_labels(stream: &[Sample], p_u: f64, seed: u64) -> Result<Vec<Sample>> {
    if !(0.0..=1.0).contains(&p_u) {
        return Err(Error::InvalidConfig(format!("p_u must lie in [0, 1], got {p_u}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(stream
        .iter()
        .map(|s| {
            let mut s = s.clone();
            if rng.random_bool(p_u) {
                s.y = None;
            }
            s
        })
        .collect())
}

/// Consecutive class pairs `{0,1}, {2,3}, ...`.
pub fn consecutive_pairs(n_classes: usize) -> Vec<Vec<usize>> {
    (0..n_classes / 2).map(|k| vec![2 * k, 2 * k + 1]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, bytes: &[u8]) -> std::path::PathBuf {
        let p = dir.join(name);
        fs::File::create(&p).unwrap().write_all(bytes).unwrap();
        p
    }

    fn idx_images(n: u32, rows: u32, cols: u32, data: &[u8]) -> Vec<u8> {
        let mut b = Vec::new();
        for v in [IDX_IMAGES, n, rows, cols] {
            b.extend_from_slice(&v.to_be_bytes());
        }
        b.extend_from_slice(data);
        b
    }

    fn idx_labels(labels: &[u8]) -> Vec<u8> {
        let mut b = Vec::new();
        for v in [IDX_LABELS, labels.len() as u32] {
            b.extend_from_slice(&v.to_be_bytes());
        }
        b.extend_from_slice(labels);
        b
    }

    #[test]
    fn idx_roundtrip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let data: Vec<u8> = (0..12).collect();
        let im = write(dir.path(), "im", &idx_images(3, 2, 2, &data));
        let lb = write(dir.path(), "lb", &idx_labels(&[7, 0, 3]));
        let ds = load_idx(&im, &lb).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.dim, 4);
        assert_eq!(ds.samples[1].x, vec![4.0, 5.0, 6.0, 7.0]);
        assert_eq!(ds.samples[2].y, Some(3));

        let short = write(dir.path(), "short", &idx_images(3, 2, 2, &data[..11]));
        assert!(matches!(load_idx(&short, &lb), Err(Error::Truncated { .. })));
        let lb2 = write(dir.path(), "lb2", &idx_labels(&[1, 2]));
        assert!(matches!(
            load_idx(&im, &lb2),
            Err(Error::CountMismatch { images: 3, labels: 2 })
        ));
        assert!(matches!(load_idx(&lb, &lb), Err(Error::BadMagic { .. })));
        assert!(matches!(load_idx(&im, &im), Err(Error::BadMagic { .. })));
    }

    #[test]
    fn csv_loading() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "a.csv", b"1,0,0,1,2\n0,1,1,0,0\n1,1,1,1,1\n");
        let ds = load_csv_vectors(&p, true).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.dim, 4);
        assert_eq!(ds.samples[0].y, Some(2));
        let unl = load_csv_vectors(&p, false).unwrap();
        assert_eq!(unl.dim, 5);

        let empty = write(dir.path(), "e.csv", b"");
        assert!(matches!(load_csv_vectors(&empty, true), Err(Error::Empty(_))));
        let ragged = write(dir.path(), "r.csv", b"1,2,3\n1,2\n");
        assert!(matches!(
            load_csv_vectors(&ragged, true),
            Err(Error::Parse { line: 2, .. })
        ));
        let bad = write(dir.path(), "b.csv", b"1,x,3\n");
        assert!(matches!(load_csv_vectors(&bad, false), Err(Error::Parse { line: 1, .. })));
    }

    fn single_ball(pos: [f64; 2], vel: [f64; 2]) -> BallState {
        BallState {
            balls: vec![Ball { pos, vel }],
            size: GRID,
            radius: 2.0,
        }
    }

    #[test]
    fn ball_moves_and_reflects() {
        let mut st = single_ball([8.0, 8.0], [1.0, 0.0]);
        bouncing_ball_next(&mut st);
        assert_eq!(st.balls[0].pos, [9.0, 8.0]);
        assert_eq!(st.balls[0].vel, [1.0, 0.0]);

        let mut st = single_ball([14.0, 8.0], [0.7, 0.0]);
        bouncing_ball_next(&mut st);
        assert_eq!(st.balls[0].vel, [-0.7, 0.0]);
        assert!((st.balls[0].pos[0] - 13.3).abs() < 1e-12);
    }

    #[test]
    fn disc_rasterization_matches_analytic_count() {
        let st = single_ball([8.0, 8.0], [0.0, 0.0]);
        let frame = st.render();
        // cell centers at half-integers: offsets (±0.5, ±1.5) within radius 2
        let mut want = 0;
        for a in [-1.5f64, -0.5, 0.5, 1.5] {
            for b in [-1.5f64, -0.5, 0.5, 1.5] {
                if a * a + b * b <= 4.0 {
                    want += 1;
                }
            }
        }
        assert_eq!(want, 12);
        assert_eq!(frame.iter().filter(|&&v| v == 1.0).count(), want);
        assert!(frame.iter().all(|&v| v == 0.0 || v == 1.0));
        assert_eq!(frame[7 * GRID + 7], 1.0);
        assert_eq!(frame[5 * GRID + 5], 0.0);
    }

    #[test]
    fn balls_stay_in_box_with_constant_speed() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut st = BallState::random(3, GRID, 2.0, (0.5, 1.5), &mut rng).unwrap();
        let speeds: Vec<f64> = st.balls.iter().map(|b| b.vel[0].hypot(b.vel[1])).collect();
        for _ in 0..10_000 {
            bouncing_ball_next(&mut st);
            for (b, s) in st.balls.iter().zip(&speeds) {
                assert!(b.pos.iter().all(|&p| (2.0..=14.0).contains(&p)));
                assert!((b.vel[0].hypot(b.vel[1]) - s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn glyphs() {
        let (x, o) = xo_patterns();
        assert_eq!(x.len(), 256);
        assert_eq!(o.len(), 256);
        assert!(x.iter().chain(&o).all(|&v| v == 0.0 || v == 1.0));
        let diff = x.iter().zip(&o).filter(|(a, b)| a != b).count();
        assert!(diff >= 40, "{diff}");
        assert_eq!(xo_patterns(), (x, o));
        assert_eq!(xo_test_stream().len(), 13);
    }

    fn toy_dataset(per_class: usize, n_classes: usize) -> Dataset {
        let samples = (0..n_classes)
            .flat_map(|c| (0..per_class).map(move |i| Sample::labeled(vec![c as f64, i as f64], c)))
            .collect();
        Dataset::new(samples).unwrap()
    }

    #[test]
    fn split_without_fuzz_is_task_ordered() {
        let ds = toy_dataset(20, 10);
        let s = split_task_stream(&ds, &consecutive_pairs(10), 0.0, 1).unwrap();
        assert_eq!(s.len(), 200);
        for (i, smp) in s.iter().enumerate() {
            assert_eq!(smp.y.unwrap() / 2, i / 40);
            assert_eq!(smp.task_id, None);
        }
    }

    #[test]
    fn split_with_full_fuzz_is_all_foreign() {
        let ds = toy_dataset(20, 10);
        let s = split_task_stream(&ds, &consecutive_pairs(10), 1.0, 2).unwrap();
        assert_eq!(s.len(), 200);
        for (i, smp) in s.iter().enumerate() {
            assert_ne!(smp.y.unwrap() / 2, i / 40);
        }
    }

    #[test]
    fn split_fuzz_rate_and_single_pass() {
        let ds = toy_dataset(500, 10);
        let p_f = 0.05;
        let s = split_task_stream(&ds, &consecutive_pairs(10), p_f, 9).unwrap();
        assert_eq!(s.len(), ds.len());
        let mut seen: Vec<_> = s.iter().map(|x| (x.y.unwrap(), x.x[1] as usize)).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), ds.len());
        let foreign = s
            .iter()
            .enumerate()
            .filter(|(i, smp)| smp.y.unwrap() / 2 != i / 1000)
            .count() as f64;
        let n = ds.len() as f64;
        let sigma = (n * p_f * (1.0 - p_f)).sqrt();
        assert!((foreign - n * p_f).abs() < 4.0 * sigma, "{foreign}");
    }

    #[test]
    fn split_rejects_overlap() {
        let ds = toy_dataset(2, 4);
        assert!(matches!(
            split_task_stream(&ds, &[vec![0, 1], vec![1, 2]], 0.0, 0),
            Err(Error::OverlappingTasks(1))
        ));
    }

    #[test]
    fn label_masking() {
        let ds = toy_dataset(1000, 10);
        assert_eq!(mask_labels(&ds.samples, 0.0, 1).unwrap(), ds.samples);
        assert!(mask_labels(&ds.samples, 1.0, 1).unwrap().iter().all(|s| s.y.is_none()));
        let m = mask_labels(&ds.samples, 0.99, 4).unwrap();
        let labeled = m.iter().filter(|s| s.y.is_some()).count() as f64;
        let n = ds.len() as f64;
        let sigma = (n * 0.01 * 0.99).sqrt();
        assert!((labeled - 0.01 * n).abs() < 4.0 * sigma);
        assert!(m.iter().zip(&ds.samples).all(|(a, b)| a.x == b.x));
    }

    #[test]
    fn streams_are_seeded() {
        let ds = toy_dataset(50, 10);
        let pairs = consecutive_pairs(10);
        assert_eq!(
            split_task_stream(&ds, &pairs, 0.1, 5).unwrap(),
            split_task_stream(&ds, &pairs, 0.1, 5).unwrap()
        );
        assert_eq!(xo_training_stream(10, 3), xo_training_stream(10, 3));
        assert_eq!(shuffled(&ds, 1), shuffled(&ds, 1));
    }
}
