//! Small dense-network training harness with binary16 arithmetic.
//!
//! The network is a ReLU MLP with a softmax head trained by minibatch SGD with
//! momentum. Each layer keeps its bias as the last weight column, and the
//! layer input is augmented with a constant one, so the full weight update of
//! a layer is the single outer product `delta * [a; 1]^T`. In `Essop` mode
//! that outer product comes from the stochastic engine, one 2M-draw product
//! per sample and layer; in `Exact` mode every entry is `delta_j * a_i`
//! rounded to binary16. Per-sample updates are summed in binary16 and the
//! batch mean is taken through the learning rate.
//!
//! Forward and backward passes quantize every activation, pre-activation and
//! gradient to binary16. Dot products accumulate exact binary16 products in
//! `f64` and round once.

use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{apply_update, outer_product, Matrix16, MomentumSgd, OuterProductJob};
use crate::error::{Error, Result};
use crate::lfsr::derive_seed_pair;
use crate::numeric::{quantize_to_binary16, Binary16Value};

/// Fraction of samples held out for testing.
pub const TEST_FRACTION: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum UpdateMode {
    Exact,
    Essop { seq_len: usize },
}

impl fmt::Display for UpdateMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UpdateMode::Exact => write!(f, "exact"),
            UpdateMode::Essop { seq_len } => write!(f, "essop({seq_len})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LrSchedule {
    Constant,
    /// x0.1 at 60% of the epochs and again at 85%.
    StepDecay,
}

impl LrSchedule {
    pub fn lr_at(self, base: f64, epoch: usize, epochs: usize) -> f64 {
        match self {
            LrSchedule::Constant => base,
            LrSchedule::StepDecay => {
                let frac = epoch as f64 / epochs as f64;
                if frac >= 0.85 {
                    base * 0.01
                } else if frac >= 0.6 {
                    base * 0.1
                } else {
                    base
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum DatasetSpec {
    TwoMoons { n: usize, noise: f64 },
    /// CSV rows of 64 features followed by an integer label.
    Digits8x8 { path: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Seeds {
    pub data: u64,
    pub init: u64,
    pub essop: u16,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrainingConfig {
    pub topology: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub momentum: f64,
    pub mode: UpdateMode,
    /// Fold the learning rate into the power-of-two scale of each update.
    pub lr_folded: bool,
    pub lr_schedule: LrSchedule,
    pub seeds: Seeds,
    pub dataset: DatasetSpec,
}

/// A configuration field that failed validation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

impl TrainingConfig {
    /// 2-16-2 ReLU network on 2000 noisy two-moons points.
    pub fn two_moons(mode: UpdateMode, seed: u64) -> Self {
        Self {
            topology: vec![2, 16, 2],
            epochs: 200,
            batch_size: 32,
            lr: 0.1,
            momentum: 0.9,
            mode,
            lr_folded: false,
            lr_schedule: LrSchedule::Constant,
            seeds: Seeds { data: 7, init: seed, essop: (seed as u16).wrapping_mul(0x9E37) | 1 },
            dataset: DatasetSpec::TwoMoons { n: 2000, noise: 0.1 },
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |field, message: String| Err(ConfigError { field, message });
        if self.topology.len() < 2 || self.topology.contains(&0) {
            return err("topology", "need at least input and output sizes, all positive".into());
        }
        if *self.topology.last().unwrap() < 2 {
            return err("topology", "softmax head needs at least 2 classes".into());
        }
        if self.epochs == 0 {
            return err("epochs", "must be at least 1".into());
        }
        if self.batch_size == 0 {
            return err("batch_size", "must be at least 1".into());
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return err("lr", format!("must be positive, got {}", self.lr));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return err("momentum", format!("must lie in [0, 1), got {}", self.momentum));
        }
        if let UpdateMode::Essop { seq_len } = self.mode {
            if !(1..=2048).contains(&seq_len) {
                return err("seq_len", format!("must lie in 1..=2048, got {seq_len}"));
            }
        }
        if self.seeds.essop == 0 {
            return err("seeds.essop", "LFSR seed must be nonzero".into());
        }
        match &self.dataset {
            DatasetSpec::TwoMoons { n, noise } => {
                if *n < 10 {
                    return err("dataset.n", format!("need at least 10 points, got {n}"));
                }
                if !(noise.is_finite() && *noise >= 0.0) {
                    return err("dataset.noise", format!("must be non-negative, got {noise}"));
                }
                if self.topology[0] != 2 || *self.topology.last().unwrap() != 2 {
                    return err("topology", "two-moons needs 2 inputs and 2 outputs".into());
                }
            }
            DatasetSpec::Digits8x8 { path } => {
                if path.is_empty() {
                    return err("dataset.path", "must name a CSV file".into());
                }
                if self.topology[0] != 64 {
                    return err("topology", "digits8x8 needs 64 inputs".into());
                }
            }
        }
        Ok(())
    }
}

/// Labeled samples with binary16 features, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub dim: usize,
    pub features: Vec<Binary16Value>,
    pub labels: Vec<usize>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sample(&self, i: usize) -> &[Binary16Value] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    fn subset(&self, idx: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            features.extend_from_slice(self.sample(i));
        }
        Dataset { dim: self.dim, features, labels: idx.iter().map(|&i| self.labels[i]).collect() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Split {
    pub train: Dataset,
    pub test: Dataset,
}

/// Two interleaved half circles: class 0 on `(cos t, sin t)`, class 1 on
/// `(1 - cos t, 0.5 - sin t)`, `t` evenly spaced on `[0, pi]`, plus Gaussian
/// noise. Shuffled and split 80/20 deterministically per seed.
pub fn generate_two_moons(n: usize, noise: f64, seed: u64) -> Result<Split> {
    if n < 2 {
        return Err(Error::Contract(format!("two-moons needs at least 2 points, got {n}")));
    }
    if !(noise.is_finite() && noise >= 0.0) {
        return Err(Error::Domain(format!("noise must be non-negative, got {noise}")));
    }
    let (points, labels) = two_moons_points(n, noise, seed);
    let data = Dataset { dim: 2, features: points.iter().map(|&v| quantize_to_binary16(v)).collect(), labels };
    Ok(shuffle_split(&data, seed))
}

/// Raw (unshuffled) two-moons coordinates, outer arc first.
pub fn two_moons_points(n: usize, noise: f64, seed: u64) -> (Vec<f64>, Vec<usize>) {
    let n_outer = n / 2;
    let n_inner = n - n_outer;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise.max(f64::MIN_POSITIVE)).expect("valid sigma");
    let mut points = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    let arc = |k: usize, count: usize| {
        if count <= 1 {
            0.0
        } else {
            std::f64::consts::PI * k as f64 / (count - 1) as f64
        }
    };
    for k in 0..n_outer {
        let t = arc(k, n_outer);
        points.extend([t.cos(), t.sin()]);
        labels.push(0);
    }
    for k in 0..n_inner {
        let t = arc(k, n_inner);
        points.extend([1.0 - t.cos(), 0.5 - t.sin()]);
        labels.push(1);
    }
    if noise > 0.0 {
        for p in points.iter_mut() {
            *p += normal.sample(&mut rng);
        }
    }
    (points, labels)
}

/// Parse digits CSV text: 64 numeric features then a label per row. A
/// non-numeric first row is treated as a header. Features are scaled so the
/// largest magnitude in the file is 1.
pub fn parse_digits_csv(text: &str, seed: u64) -> Result<Split> {
    let mut raw = Vec::new();
    let mut labels = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if labels.is_empty() && raw.is_empty() => continue,
            Err(e) => return Err(Error::Dataset(format!("line {}: {e}", lineno + 1))),
        };
        if values.len() != 65 {
            return Err(Error::Dataset(format!("line {}: expected 65 fields, got {}", lineno + 1, values.len())));
        }
        let label = values[64];
        if label < 0.0 || label.fract() != 0.0 || label > 9.0 {
            return Err(Error::Dataset(format!("line {}: bad label {label}", lineno + 1)));
        }
        if values[..64].iter().any(|v| !v.is_finite()) {
            return Err(Error::Dataset(format!("line {}: non-finite feature", lineno + 1)));
        }
        raw.extend_from_slice(&values[..64]);
        labels.push(label as usize);
    }
    if labels.len() < 2 {
        return Err(Error::Dataset("need at least 2 rows".into()));
    }
    let max = raw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if max > 0.0 { 1.0 / max } else { 1.0 };
    let data = Dataset { dim: 64, features: raw.iter().map(|&v| quantize_to_binary16(v * scale)).collect(), labels };
    Ok(shuffle_split(&data, seed))
}

pub fn load_digits_csv(path: &Path, seed: u64) -> Result<Split> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Dataset(format!("{}: {e}", path.display())))?;
    parse_digits_csv(&text, seed)
}

fn shuffle_split(data: &Dataset, seed: u64) -> Split {
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_5711));
    let n_test = ((data.len() as f64) * TEST_FRACTION).round() as usize;
    let n_test = n_test.clamp(1, data.len() - 1);
    let (test, train) = idx.split_at(n_test);
    Split { train: data.subset(train), test: data.subset(test) }
}

/// Anything that maps an input to class logits.
pub trait Classifier {
    fn input_dim(&self) -> usize;
    fn logits(&self, input: &[Binary16Value]) -> Vec<f64>;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Evaluation {
    pub accuracy: f64,
    /// Mean categorical cross-entropy.
    pub loss: f64,
}

pub fn evaluate<C: Classifier + ?Sized>(model: &C, data: &Dataset) -> Result<Evaluation> {
    if model.input_dim() != data.dim {
        return Err(Error::Contract(format!(
            "model expects {} inputs, dataset has {}",
            model.input_dim(),
            data.dim
        )));
    }
    if data.is_empty() {
        return Err(Error::Contract("cannot evaluate on an empty dataset".into()));
    }
    let (mut correct, mut loss) = (0usize, 0.0f64);
    for i in 0..data.len() {
        let logits = model.logits(data.sample(i));
        let label = data.labels[i];
        if label >= logits.len() {
            return Err(Error::Contract(format!("label {label} outside {} classes", logits.len())));
        }
        if argmax(&logits) == label {
            correct += 1;
        }
        loss += cross_entropy(&logits, label);
    }
    let n = data.len() as f64;
    Ok(Evaluation { accuracy: correct as f64 / n, loss: loss / n })
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn cross_entropy(logits: &[f64], label: usize) -> f64 {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&z| (z - max).exp()).sum::<f64>().ln();
    lse - logits[label]
}

/// Binary16 dot product with a single rounding.
fn dot16(w: &[Binary16Value], a: &[Binary16Value]) -> Binary16Value {
    quantize_to_binary16(w.iter().zip(a).map(|(x, y)| x.to_f64() * y.to_f64()).sum())
}

#[derive(Clone, Debug, PartialEq)]
struct Dense {
    /// out x (in + 1); the last column is the bias.
    weights: Matrix16,
    velocity: Matrix16,
}

/// ReLU multilayer perceptron with binary16 parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    layers: Vec<Dense>,
}

/// `(delta, augmented input)` of one layer.
pub type LayerTerms = (Vec<Binary16Value>, Vec<Binary16Value>);

/// Activations of one forward pass, each layer input augmented with 1.
struct Trace {
    inputs: Vec<Vec<Binary16Value>>,
    pre: Vec<Vec<Binary16Value>>,
}

impl Mlp {
    /// He-uniform weights, zero biases.
    pub fn new(topology: &[usize], seed: u64) -> Result<Self> {
        if topology.len() < 2 || topology.contains(&0) {
            return Err(Error::Contract("topology needs at least two positive layer sizes".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = topology
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let bound = (6.0 / fan_in as f64).sqrt();
                let mut data = Vec::with_capacity(fan_out * (fan_in + 1));
                for _ in 0..fan_out {
                    for _ in 0..fan_in {
                        data.push(quantize_to_binary16(rng.gen_range(-bound..bound)));
                    }
                    data.push(Binary16Value::ZERO);
                }
                Dense {
                    weights: Matrix16::from_vec(fan_out, fan_in + 1, data).expect("shape"),
                    velocity: Matrix16::zeros(fan_out, fan_in + 1),
                }
            })
            .collect();
        Ok(Self { layers })
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn weights(&self, layer: usize) -> &Matrix16 {
        &self.layers[layer].weights
    }

    fn forward(&self, input: &[Binary16Value]) -> Trace {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut a: Vec<Binary16Value> = input.to_vec();
        for (l, layer) in self.layers.iter().enumerate() {
            a.push(Binary16Value::ONE);
            let w = &layer.weights;
            let z: Vec<Binary16Value> = (0..w.rows()).map(|r| dot16(w.row(r), &a)).collect();
            let last = l + 1 == self.layers.len();
            let next = if last { z.clone() } else { z.iter().map(|&v| relu(v)).collect() };
            inputs.push(std::mem::replace(&mut a, next));
            pre.push(z);
        }
        Trace { inputs, pre }
    }

    /// Per-layer `(delta, augmented input)` pairs for one labeled sample, and
    /// the sample's loss. The layer's weight gradient is `delta * input^T`.
    pub fn backprop(&self, input: &[Binary16Value], label: usize) -> (Vec<LayerTerms>, f64) {
        let trace = self.forward(input);
        let logits: Vec<f64> = trace.pre.last().unwrap().iter().map(|v| v.to_f64()).collect();
        let loss = cross_entropy(&logits, label);
        let probs = softmax(&logits);
        let mut delta: Vec<Binary16Value> = probs
            .iter()
            .enumerate()
            .map(|(k, &p)| quantize_to_binary16(p - (k == label) as u8 as f64))
            .collect();

        let n = self.layers.len();
        let mut out = vec![(Vec::new(), Vec::new()); n];
        for l in (0..n).rev() {
            if l > 0 {
                let w = &self.layers[l].weights;
                let prev_pre = &trace.pre[l - 1];
                let back: Vec<Binary16Value> = (0..w.cols() - 1)
                    .map(|i| {
                        if prev_pre[i].to_f64() <= 0.0 {
                            return Binary16Value::ZERO;
                        }
                        quantize_to_binary16((0..w.rows()).map(|k| w.get(k, i).to_f64() * delta[k].to_f64()).sum())
                    })
                    .collect();
                out[l] = (std::mem::replace(&mut delta, back), trace.inputs[l].clone());
            } else {
                out[l] = (std::mem::take(&mut delta), trace.inputs[l].clone());
            }
        }
        (out, loss)
    }
}

impl Classifier for Mlp {
    fn input_dim(&self) -> usize {
        self.layers[0].weights.cols() - 1
    }

    fn logits(&self, input: &[Binary16Value]) -> Vec<f64> {
        let trace = self.forward(input);
        trace.pre.last().unwrap().iter().map(|v| v.to_f64()).collect()
    }
}

fn relu(v: Binary16Value) -> Binary16Value {
    if v.to_f64() > 0.0 {
        v
    } else {
        Binary16Value::ZERO
    }
}

/// Produces per-sample weight updates in either mode.
#[derive(Clone, Debug)]
pub struct UpdateSource {
    pub mode: UpdateMode,
    /// Learning rate folded into each per-sample update, if any.
    pub folded_lr: Option<f64>,
    pub essop_base: u16,
    /// Outer products issued so far; selects the next seed pair.
    pub counter: u64,
}

impl UpdateSource {
    pub fn new(mode: UpdateMode, essop_base: u16) -> Self {
        Self { mode, folded_lr: None, essop_base, counter: 0 }
    }

    /// `delta * x^T` for one sample and layer.
    pub fn outer(&mut self, x: &[Binary16Value], delta: &[Binary16Value]) -> Result<Matrix16> {
        match self.mode {
            UpdateMode::Exact => {
                let lr = self.folded_lr.unwrap_or(1.0);
                let data = delta
                    .iter()
                    .flat_map(|d| x.iter().map(move |v| quantize_to_binary16(lr * d.to_f64() * v.to_f64())))
                    .collect();
                Matrix16::from_vec(delta.len(), x.len(), data)
            }
            UpdateMode::Essop { seq_len } => {
                let (seed_x, seed_delta) = derive_seed_pair(self.essop_base, self.counter);
                self.counter += 1;
                let job = OuterProductJob {
                    x: x.to_vec(),
                    delta: delta.to_vec(),
                    seq_len,
                    seed_x,
                    seed_delta,
                    lr: self.folded_lr,
                };
                Ok(outer_product(&job)?.matrix)
            }
        }
    }
}

/// Sum of per-sample weight updates over a batch, per layer, plus the summed
/// sample loss.
pub fn batch_updates(model: &Mlp, data: &Dataset, batch: &[usize], source: &mut UpdateSource) -> Result<(Vec<Matrix16>, f64)> {
    let mut sums: Vec<Matrix16> = model
        .layers
        .iter()
        .map(|l| Matrix16::zeros(l.weights.rows(), l.weights.cols()))
        .collect();
    let mut loss = 0.0;
    for &i in batch {
        let (pairs, sample_loss) = model.backprop(data.sample(i), data.labels[i]);
        loss += sample_loss;
        for (sum, (delta, x)) in sums.iter_mut().zip(&pairs) {
            sum.accumulate(&source.outer(x, delta)?)?;
        }
    }
    Ok((sums, loss))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub test_loss: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunMetrics {
    pub mode: String,
    pub epochs: Vec<EpochMetrics>,
    pub final_test_accuracy: f64,
    /// Training stopped early on a non-finite loss.
    pub diverged: bool,
}

pub fn load_dataset(config: &TrainingConfig) -> Result<Split> {
    match &config.dataset {
        DatasetSpec::TwoMoons { n, noise } => generate_two_moons(*n, *noise, config.seeds.data),
        DatasetSpec::Digits8x8 { path } => load_digits_csv(Path::new(path), config.seeds.data),
    }
}

pub fn train(config: &TrainingConfig) -> Result<RunMetrics> {
    config.validate().map_err(|e| Error::Contract(e.to_string()))?;
    let split = load_dataset(config)?;
    train_on(config, &split)
}

/// Train on an already materialized split.
pub fn train_on(config: &TrainingConfig, split: &Split) -> Result<RunMetrics> {
    config.validate().map_err(|e| Error::Contract(e.to_string()))?;
    if split.train.dim != config.topology[0] {
        return Err(Error::Contract(format!(
            "dataset has {} features, topology expects {}",
            split.train.dim, config.topology[0]
        )));
    }
    let mut model = Mlp::new(&config.topology, config.seeds.init)?;
    let mut source = UpdateSource::new(config.mode, config.seeds.essop);
    let mut order: Vec<usize> = (0..split.train.len()).collect();
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seeds.data.wrapping_add(1));
    let mut epochs = Vec::with_capacity(config.epochs);
    let mut diverged = false;

    for epoch in 0..config.epochs {
        let lr = config.lr_schedule.lr_at(config.lr, epoch, config.epochs);
        order.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            let per_sample_lr = lr / batch.len() as f64;
            source.folded_lr = config.lr_folded.then_some(per_sample_lr);
            let (sums, loss) = batch_updates(&model, &split.train, batch, &mut source)?;
            epoch_loss += loss;
            let rule = MomentumSgd { lr: per_sample_lr, lr_folded: config.lr_folded, momentum: config.momentum };
            for (layer, update) in model.layers.iter_mut().zip(&sums) {
                apply_update(&mut layer.weights, &mut layer.velocity, update, rule)?;
            }
        }
        let train_loss = epoch_loss / split.train.len() as f64;
        let train_eval = evaluate(&model, &split.train)?;
        let test_eval = evaluate(&model, &split.test)?;
        epochs.push(EpochMetrics {
            epoch: epoch + 1,
            train_loss,
            train_accuracy: train_eval.accuracy,
            test_accuracy: test_eval.accuracy,
            test_loss: test_eval.loss,
        });
        if !train_loss.is_finite() || !test_eval.loss.is_finite() {
            diverged = true;
            break;
        }
    }
    let final_test_accuracy = epochs.last().map_or(0.0, |e| e.test_accuracy);
    Ok(RunMetrics { mode: config.mode.to_string(), epochs, final_test_accuracy, diverged })
}

/// Independent runs in parallel; results keep the input order.
pub fn train_many(configs: &[TrainingConfig]) -> Vec<Result<RunMetrics>> {
    configs.par_iter().map(train).collect()
}
