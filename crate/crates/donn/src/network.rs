//! Fully-connected network: float training and quantized inference through
//! the simulated hardware.
//!
//! Architectures follow the published experiment: 7x7 inputs flattened to 49
//! values, one or two hidden layers of 100 ReLU units, a 10-way softmax
//! output. Training is plain mini-batch SGD with momentum, cross-entropy
//! loss, and inverted dropout on the hidden layers; everything is seeded and
//! single-threaded so a (seed, config) pair reproduces weights bit-exactly.
//!
//! Quantized inference re-fits activation quantization per layer (the
//! transmitted values are the post-ReLU activations), streams each layer
//! through [`dataflow::run_layer`], and keeps biases in float.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{BerStats, ChannelConfig};
use crate::dataflow::{self, EnergyTally, SimMode};
use crate::energy::EnergyConfig;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::mnist::MnistSet;
use crate::quant::bilinear_downsample_antialiased;

const MODEL_MAGIC: &[u8; 8] = b"DONNMDL1";
const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arch {
    /// 49 -> 100 -> 10 (one hidden layer).
    TwoLayer,
    /// 49 -> 100 -> 100 -> 10 (two hidden layers).
    ThreeLayer,
}

impl Arch {
    pub fn dims(self) -> &'static [usize] {
        match self {
            Arch::TwoLayer => &[49, 100, 10],
            Arch::ThreeLayer => &[49, 100, 100, 10],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Arch::TwoLayer => "2layer",
            Arch::ThreeLayer => "3layer",
        }
    }

    pub fn from_name(name: &str) -> Option<Arch> {
        match name {
            "2layer" | "2" => Some(Arch::TwoLayer),
            "3layer" | "3" => Some(Arch::ThreeLayer),
            _ => None,
        }
    }
}

/// One dense layer: weights are `in_dim x out_dim` row-major, bias `out_dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcnnModel {
    pub layers: Vec<Layer>,
}

impl FcnnModel {
    /// Fan-in-scaled uniform init: W ~ U(-sqrt(3/fan_in), +sqrt(3/fan_in)),
    /// zero biases, fully determined by the seed.
    pub fn new_seeded(dims: &[usize], seed: u64) -> Result<FcnnModel> {
        if dims.len() < 2 {
            return Err(Error::usage("need at least input and output dims"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for w in dims.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (3.0 / fan_in as f64).sqrt();
            let data = (0..fan_in * fan_out)
                .map(|_| rng.random_range(-limit..limit))
                .collect();
            layers.push(Layer {
                weights: Matrix::from_vec(fan_in, fan_out, data)?,
                bias: vec![0.0; fan_out],
            });
        }
        Ok(FcnnModel { layers })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weights.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map(|l| l.weights.cols()).unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::usage("model has no layers"));
        }
        for (i, pair) in self.layers.windows(2).enumerate() {
            if pair[0].weights.cols() != pair[1].weights.rows() {
                return Err(Error::usage(format!(
                    "layer {i} output {} does not feed layer {} input {}",
                    pair[0].weights.cols(),
                    i + 1,
                    pair[1].weights.rows()
                )));
            }
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.bias.len() != l.weights.cols() {
                return Err(Error::usage(format!("layer {i} bias length mismatch")));
            }
        }
        Ok(())
    }

    /// Float reference forward pass: affine + ReLU per hidden layer, affine
    /// + softmax at the output.
    pub fn forward_float(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_dim() {
            return Err(Error::usage(format!(
                "input length {} does not match model input {}",
                input.len(),
                self.input_dim()
            )));
        }
        let mut activation = input.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = layer.bias.clone();
            for (row, &a) in activation.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (j, &w) in layer.weights.row(row).iter().enumerate() {
                    z[j] += a * w;
                }
            }
            if i + 1 < self.layers.len() {
                for v in &mut z {
                    *v = v.max(0.0);
                }
            }
            activation = z;
        }
        Ok(softmax(&activation))
    }

    /// Quantized forward pass through the bit-serial dataflow in the given
    /// mode. Returns the softmax scores plus the transmission accounting.
    /// `frame_id_base` decorrelates noise across images under one seed.
    pub fn forward_quantized(
        &self,
        input: &[f64],
        mode: SimMode,
        channel_cfg: &ChannelConfig,
        energy_cfg: &EnergyConfig,
        frame_id_base: u64,
    ) -> Result<QuantizedForward> {
        if input.len() != self.input_dim() {
            return Err(Error::usage(format!(
                "input length {} does not match model input {}",
                input.len(),
                self.input_dim()
            )));
        }
        let mut activation = Matrix::from_vec(1, input.len(), input.to_vec())?;
        let mut tally = EnergyTally::default();
        let mut ber = BerStats::default();
        let mut frame_id = frame_id_base;
        let mut scores = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            let run = dataflow::run_layer(
                &activation,
                &layer.weights,
                mode,
                channel_cfg,
                energy_cfg,
                8,
                frame_id,
            )?;
            frame_id += run.frames_used;
            tally.merge(&run.tally);
            ber.merge(&run.ber);
            let mut z: Vec<f64> = (0..run.output.cols())
                .map(|j| run.output.get(0, j) + layer.bias[j])
                .collect();
            if i + 1 < self.layers.len() {
                for v in &mut z {
                    *v = v.max(0.0);
                }
                activation = Matrix::from_vec(1, z.len(), z)?;
            } else {
                scores = softmax(&z);
            }
        }
        Ok(QuantizedForward {
            scores,
            tally,
            ber,
            frames_used: frame_id - frame_id_base,
        })
    }

    pub fn save_binary(&self, path: &Path) -> Result<()> {
        self.validate()?;
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let mut emit = |buf: &[u8]| w.write_all(buf).map_err(|e| Error::io(path, e));
        emit(MODEL_MAGIC)?;
        emit(&MODEL_VERSION.to_le_bytes())?;
        emit(&(self.layers.len() as u32).to_le_bytes())?;
        for layer in &self.layers {
            emit(&(layer.weights.rows() as u32).to_le_bytes())?;
            emit(&(layer.weights.cols() as u32).to_le_bytes())?;
            for v in layer.weights.data() {
                emit(&v.to_le_bytes())?;
            }
            for v in &layer.bias {
                emit(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn load_binary(path: &Path) -> Result<FcnnModel> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|e| Error::io(path, e))?;
        if &magic != MODEL_MAGIC {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                offset: 0,
                reason: "bad model magic".into(),
            });
        }
        let mut u32buf = [0u8; 4];
        r.read_exact(&mut u32buf).map_err(|e| Error::io(path, e))?;
        let version = u32::from_le_bytes(u32buf);
        if version != MODEL_VERSION {
            return Err(Error::Version {
                found: version,
                expected: MODEL_VERSION,
            });
        }
        r.read_exact(&mut u32buf).map_err(|e| Error::io(path, e))?;
        let layer_count = u32::from_le_bytes(u32buf) as usize;
        let mut f64buf = [0u8; 8];
        let mut layers = Vec::with_capacity(layer_count);
        for _ in 0..layer_count {
            r.read_exact(&mut u32buf).map_err(|e| Error::io(path, e))?;
            let rows = u32::from_le_bytes(u32buf) as usize;
            r.read_exact(&mut u32buf).map_err(|e| Error::io(path, e))?;
            let cols = u32::from_le_bytes(u32buf) as usize;
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows * cols {
                r.read_exact(&mut f64buf).map_err(|e| Error::io(path, e))?;
                data.push(f64::from_le_bytes(f64buf));
            }
            let mut bias = Vec::with_capacity(cols);
            for _ in 0..cols {
                r.read_exact(&mut f64buf).map_err(|e| Error::io(path, e))?;
                bias.push(f64::from_le_bytes(f64buf));
            }
            layers.push(Layer {
                weights: Matrix::from_vec(rows, cols, data)?,
                bias,
            });
        }
        let model = FcnnModel { layers };
        model.validate()?;
        Ok(model)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<FcnnModel> {
        let model: FcnnModel = serde_json::from_str(json)?;
        model.validate()?;
        Ok(model)
    }
}

/// Output of one quantized forward pass.
#[derive(Debug, Clone)]
pub struct QuantizedForward {
    pub scores: Vec<f64>,
    pub tally: EnergyTally,
    pub ber: BerStats,
    pub frames_used: u64,
}

/// Numerically stable softmax (max subtraction).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|&v| v / sum).collect()
}

/// Scale a 28x28 (or any) pixel image to the 7x7 network input: bytes to
/// [0, 1], antialiased bilinear downsample, row-major flatten.
///
/// The antialiased (triangle-filtered) resampler is load-bearing here:
/// point-sampled bilinear at 4x shrink drops most stroke pixels and caps the
/// classifier around 82% however long it trains.
pub fn preprocess_image(pixels: &[u8], rows: usize, cols: usize) -> Result<Vec<f64>> {
    if pixels.len() != rows * cols {
        return Err(Error::usage("pixel count does not match dimensions"));
    }
    let floats: Vec<f64> = pixels.iter().map(|&p| p as f64 / 255.0).collect();
    let image = Matrix::from_vec(rows, cols, floats)?;
    let small = bilinear_downsample_antialiased(&image, 7, 7)?;
    Ok(small.data().to_vec())
}

/// Preprocess a whole set into (inputs, labels).
pub fn preprocess_set(set: &MnistSet) -> Result<(Vec<Vec<f64>>, Vec<u8>)> {
    let mut inputs = Vec::with_capacity(set.count);
    for i in 0..set.count {
        inputs.push(preprocess_image(set.image(i), set.rows, set.cols)?);
    }
    Ok((inputs, set.labels.clone()))
}

// --- Training ---------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub dropout: f64,
    pub epochs: usize,
    pub momentum: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            batch_size: 64,
            dropout: 0.2,
            epochs: 20,
            momentum: 0.9,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::config("learning_rate", "must be > 0"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size", "must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::config("dropout", "must be in [0, 1)"));
        }
        if self.epochs == 0 {
            return Err(Error::config("epochs", "must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::config("momentum", "must be in [0, 1)"));
        }
        Ok(())
    }
}

struct Gradients {
    d_weights: Vec<Matrix>,
    d_bias: Vec<Vec<f64>>,
}

impl Gradients {
    fn zeros_like(model: &FcnnModel) -> Gradients {
        Gradients {
            d_weights: model
                .layers
                .iter()
                .map(|l| Matrix::zeros(l.weights.rows(), l.weights.cols()))
                .collect(),
            d_bias: model
                .layers
                .iter()
                .map(|l| vec![0.0; l.bias.len()])
                .collect(),
        }
    }

    fn reset(&mut self) {
        for m in &mut self.d_weights {
            m.data_mut().fill(0.0);
        }
        for b in &mut self.d_bias {
            b.fill(0.0);
        }
    }
}

/// Forward with cached activations, then backprop of the cross-entropy
/// loss. `dropout_masks` holds one inverted-dropout mask (values 0 or
/// 1/keep) per hidden layer, or `None` for a deterministic pass. Gradients
/// accumulate into `grads`; returns the sample loss.
fn backprop_sample(
    model: &FcnnModel,
    input: &[f64],
    label: u8,
    dropout_masks: Option<&[Vec<f64>]>,
    grads: &mut Gradients,
) -> f64 {
    let n_layers = model.layers.len();
    let mut activations: Vec<Vec<f64>> = Vec::with_capacity(n_layers + 1);
    activations.push(input.to_vec());

    for (i, layer) in model.layers.iter().enumerate() {
        let prev = &activations[i];
        let mut z = layer.bias.clone();
        for (row, &a) in prev.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &w) in layer.weights.row(row).iter().enumerate() {
                z[j] += a * w;
            }
        }
        if i + 1 < n_layers {
            for v in &mut z {
                *v = v.max(0.0);
            }
            if let Some(masks) = dropout_masks {
                for (v, m) in z.iter_mut().zip(&masks[i]) {
                    *v *= m;
                }
            }
        }
        activations.push(z);
    }

    let probs = softmax(activations.last().unwrap());
    let loss = -(probs[label as usize].max(1e-300)).ln();

    // delta at the output: softmax - onehot.
    let mut delta: Vec<f64> = probs;
    delta[label as usize] -= 1.0;

    for i in (0..n_layers).rev() {
        let prev = &activations[i];
        let dw = &mut grads.d_weights[i];
        for (row, &a) in prev.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let drow = dw.row_mut(row);
            for (j, &d) in delta.iter().enumerate() {
                drow[j] += a * d;
            }
        }
        for (j, &d) in delta.iter().enumerate() {
            grads.d_bias[i][j] += d;
        }
        if i > 0 {
            let layer = &model.layers[i];
            let mut prev_delta = vec![0.0; prev.len()];
            for (row, pd) in prev_delta.iter_mut().enumerate() {
                let wrow = layer.weights.row(row);
                *pd = wrow.iter().zip(delta.iter()).map(|(w, d)| w * d).sum();
            }
            // Chain through the stored activation a = mask * relu(z):
            // a == 0 kills the gradient (dead ReLU or dropped unit), a > 0
            // implies relu' = 1 and the inverted-dropout scale applies.
            for (r, (pd, &a)) in prev_delta.iter_mut().zip(prev.iter()).enumerate() {
                if a <= 0.0 {
                    *pd = 0.0;
                } else if let Some(masks) = dropout_masks {
                    *pd *= masks[i - 1][r];
                }
            }
            delta = prev_delta;
        }
    }
    loss
}

/// Summed cross-entropy gradients over a set of samples, no dropout:
/// per-layer (d_weights, d_bias). Exposed so finite-difference oracles can
/// check the analytic backprop path.
pub fn loss_gradients(
    model: &FcnnModel,
    samples: &[(Vec<f64>, u8)],
) -> Result<Vec<(Matrix, Vec<f64>)>> {
    if samples.is_empty() {
        return Err(Error::usage("need at least one sample"));
    }
    let mut grads = Gradients::zeros_like(model);
    for (x, y) in samples {
        backprop_sample(model, x, *y, None, &mut grads);
    }
    Ok(grads
        .d_weights
        .into_iter()
        .zip(grads.d_bias)
        .collect())
}

/// Mean cross-entropy of the model over a dataset (no dropout).
pub fn mean_cross_entropy(model: &FcnnModel, inputs: &[Vec<f64>], labels: &[u8]) -> Result<f64> {
    if inputs.len() != labels.len() || inputs.is_empty() {
        return Err(Error::usage("dataset inputs/labels mismatch or empty"));
    }
    let mut total = 0.0;
    for (x, &y) in inputs.iter().zip(labels) {
        let p = model.forward_float(x)?;
        total += -(p[y as usize].max(1e-300)).ln();
    }
    Ok(total / inputs.len() as f64)
}

/// Train a model of the given architecture. Deterministic per
/// (seed, config): weight init, shuffling, and dropout masks all derive
/// from one ChaCha stream and the loop is single-threaded.
pub fn train(
    inputs: &[Vec<f64>],
    labels: &[u8],
    arch: Arch,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<FcnnModel> {
    train_with_progress(inputs, labels, arch, cfg, seed, |_, _| {})
}

/// [`train`] with a per-epoch callback receiving (epoch, mean train loss).
pub fn train_with_progress(
    inputs: &[Vec<f64>],
    labels: &[u8],
    arch: Arch,
    cfg: &TrainConfig,
    seed: u64,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<FcnnModel> {
    cfg.validate()?;
    if inputs.len() != labels.len() || inputs.is_empty() {
        return Err(Error::usage("dataset inputs/labels mismatch or empty"));
    }
    if inputs[0].len() != arch.dims()[0] {
        return Err(Error::usage(format!(
            "input length {} does not match architecture input {}",
            inputs[0].len(),
            arch.dims()[0]
        )));
    }
    let mut model = FcnnModel::new_seeded(arch.dims(), seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let n_hidden = model.layers.len() - 1;
    let keep = 1.0 - cfg.dropout;

    let mut grads = Gradients::zeros_like(&model);
    let mut velocity = Gradients::zeros_like(&model);
    let mut order: Vec<usize> = (0..inputs.len()).collect();

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grads.reset();
            let mut batch_loss = 0.0;
            for &idx in batch {
                // Fresh inverted-dropout masks per sample.
                let masks: Option<Vec<Vec<f64>>> = if cfg.dropout > 0.0 {
                    Some(
                        (0..n_hidden)
                            .map(|l| {
                                let width = model.layers[l].weights.cols();
                                (0..width)
                                    .map(|_| {
                                        if rng.random::<f64>() < keep {
                                            1.0 / keep
                                        } else {
                                            0.0
                                        }
                                    })
                                    .collect()
                            })
                            .collect(),
                    )
                } else {
                    None
                };
                batch_loss += backprop_sample(
                    &model,
                    &inputs[idx],
                    labels[idx],
                    masks.as_deref(),
                    &mut grads,
                );
            }
            if !batch_loss.is_finite() {
                return Err(Error::Training(format!(
                    "loss diverged to {batch_loss} at epoch {epoch}"
                )));
            }
            epoch_loss += batch_loss;
            let scale = 1.0 / batch.len() as f64;
            for (l, layer) in model.layers.iter_mut().enumerate() {
                let v = velocity.d_weights[l].data_mut();
                let g = grads.d_weights[l].data();
                let w = layer.weights.data_mut();
                for i in 0..w.len() {
                    v[i] = cfg.momentum * v[i] - cfg.learning_rate * g[i] * scale;
                    w[i] += v[i];
                }
                let vb = &mut velocity.d_bias[l];
                let gb = &grads.d_bias[l];
                for i in 0..layer.bias.len() {
                    vb[i] = cfg.momentum * vb[i] - cfg.learning_rate * gb[i] * scale;
                    layer.bias[i] += vb[i];
                }
            }
        }
        on_epoch(epoch, epoch_loss / inputs.len() as f64);
    }
    Ok(model)
}

// --- Evaluation --------------------------------------------------------

/// Mean softmax vector per true class: `mean_scores[i][j]` is the average
/// score assigned to class i over test images whose true label is j. Each
/// column sums to 1 (softmax vectors average to a distribution).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputScores {
    pub mean_scores: Vec<Vec<f64>>,
    pub counts: Vec<u32>,
}

impl OutputScores {
    pub fn diagonal(&self) -> Vec<f64> {
        (0..10).map(|i| self.mean_scores[i][i]).collect()
    }
}

/// Per-class mean-score diagonal difference: diag(a) - diag(b).
pub fn diag_differences(a: &OutputScores, b: &OutputScores) -> Vec<f64> {
    a.diagonal()
        .iter()
        .zip(b.diagonal())
        .map(|(x, y)| x - y)
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalResult {
    pub images: usize,
    pub accuracy: f64,
    /// `confusion[true][pred]` counts.
    pub confusion: Vec<Vec<u32>>,
    pub scores: OutputScores,
    pub predictions: Vec<u8>,
    pub tally: EnergyTally,
    pub ber: BerStats,
}

/// Run the model over a test set in the given mode, producing the accuracy,
/// the confusion matrix, and the averaged output scores.
pub fn confusion_and_scores(
    model: &FcnnModel,
    inputs: &[Vec<f64>],
    labels: &[u8],
    mode: SimMode,
    channel_cfg: &ChannelConfig,
    energy_cfg: &EnergyConfig,
) -> Result<EvalResult> {
    if inputs.len() != labels.len() || inputs.is_empty() {
        return Err(Error::usage("test set inputs/labels mismatch or empty"));
    }
    if model.output_dim() != 10 {
        return Err(Error::usage("classifier output width must be 10"));
    }
    let mut confusion = vec![vec![0u32; 10]; 10];
    let mut score_sums = vec![vec![0.0f64; 10]; 10];
    let mut counts = vec![0u32; 10];
    let mut predictions = Vec::with_capacity(inputs.len());
    let mut tally = EnergyTally::default();
    let mut ber = BerStats::default();
    let mut correct = 0usize;
    // Wide stride so each image owns a disjoint block of channel frame ids.
    const FRAMES_PER_IMAGE: u64 = 1 << 24;

    for (idx, (x, &y)) in inputs.iter().zip(labels).enumerate() {
        let fwd = model.forward_quantized(
            x,
            mode,
            channel_cfg,
            energy_cfg,
            idx as u64 * FRAMES_PER_IMAGE,
        )?;
        tally.merge(&fwd.tally);
        ber.merge(&fwd.ber);
        let scores = fwd.scores;
        let pred = argmax(&scores);
        predictions.push(pred as u8);
        if pred == y as usize {
            correct += 1;
        }
        confusion[y as usize][pred] += 1;
        counts[y as usize] += 1;
        for (cls, &s) in scores.iter().enumerate() {
            score_sums[cls][y as usize] += s;
        }
    }
    let mean_scores = score_sums
        .into_iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(j, &s)| if counts[j] > 0 { s / counts[j] as f64 } else { 0.0 })
                .collect()
        })
        .collect();
    Ok(EvalResult {
        images: inputs.len(),
        accuracy: correct as f64 / inputs.len() as f64,
        confusion,
        scores: OutputScores {
            mean_scores,
            counts,
        },
        predictions,
        tally,
        ber,
    })
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}
