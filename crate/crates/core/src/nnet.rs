//! Dense feed-forward classifiers with a softmax output layer.
//!
//! Hidden layers are `relu(W x + b)`, the output layer is `softmax(W x + b)`.
//! Weights are stored row-major with shape `(out_dim, in_dim)`. Training is
//! plain mini-batch SGD on the mean cross-entropy of each batch, with an
//! optional learning rate that halves after every epoch.
//!
//! The hidden-stack forward/backward helpers are shared with
//! [`crate::multitask`], so a pruned multi-head network runs exactly the same
//! arithmetic as the head it came from.

use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::FrameSet;

/// Lower clamp applied to probabilities before taking a log.
pub const LOG_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
        }
    }
}

/// Affine layer `W x + b`. The nonlinearity is applied by the owner.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    in_dim: usize,
    out_dim: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
}

impl Dense {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Dense {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
            biases: vec![0.0; out_dim],
        }
    }

    /// Uniform init in `±sqrt(6 / fan_in)`, zero biases.
    pub(crate) fn random<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        let limit = (6.0 / in_dim as f64).sqrt();
        let weights = (0..in_dim * out_dim)
            .map(|_| rng.random_range(-limit..limit))
            .collect();
        Dense {
            in_dim,
            out_dim,
            weights,
            biases: vec![0.0; out_dim],
        }
    }

    pub fn from_parts(in_dim: usize, out_dim: usize, weights: Vec<f64>, biases: Vec<f64>) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::InvalidArchitecture("layer dims must be >= 1".into()));
        }
        if weights.len() != in_dim * out_dim {
            return Err(Error::shape(in_dim * out_dim, weights.len(), "layer weights"));
        }
        if biases.len() != out_dim {
            return Err(Error::shape(out_dim, biases.len(), "layer biases"));
        }
        Ok(Dense {
            in_dim,
            out_dim,
            weights,
            biases,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn biases_mut(&mut self) -> &mut [f64] {
        &mut self.biases
    }

    #[inline]
    pub(crate) fn affine(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.in_dim);
        debug_assert_eq!(out.len(), self.out_dim);
        for (o, row) in out.iter_mut().zip(self.weights.chunks_exact(self.in_dim)) {
            *o = 0.0;
            for (w, xi) in row.iter().zip(x) {
                *o += w * xi;
            }
        }
        for (o, b) in out.iter_mut().zip(&self.biases) {
            *o += b;
        }
    }

    /// Accumulates `dz ⊗ x` into the weight gradient and `dz` into the bias
    /// gradient, and writes `Wᵀ dz` into `d_input` when given.
    #[inline]
    pub(crate) fn backward(
        &self,
        x: &[f64],
        dz: &[f64],
        grad: &mut LayerGrad,
        d_input: Option<&mut [f64]>,
    ) {
        for ((g_row, &d), g_b) in grad
            .weights
            .chunks_exact_mut(self.in_dim)
            .zip(dz)
            .zip(grad.biases.iter_mut())
        {
            *g_b += d;
            if d != 0.0 {
                for (g, xi) in g_row.iter_mut().zip(x) {
                    *g += d * xi;
                }
            }
        }
        if let Some(d_input) = d_input {
            d_input.iter_mut().for_each(|v| *v = 0.0);
            for (row, &d) in self.weights.chunks_exact(self.in_dim).zip(dz) {
                if d != 0.0 {
                    for (di, w) in d_input.iter_mut().zip(row) {
                        *di += d * w;
                    }
                }
            }
        }
    }

    pub(crate) fn apply_update(&mut self, grad: &LayerGrad, step: f64) {
        for (w, g) in self.weights.iter_mut().zip(&grad.weights) {
            *w -= step * g;
        }
        for (b, g) in self.biases.iter_mut().zip(&grad.biases) {
            *b -= step * g;
        }
    }
}

/// Gradient buffers shaped like one [`Dense`] layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl LayerGrad {
    pub fn zeros_like(layer: &Dense) -> Self {
        LayerGrad {
            weights: vec![0.0; layer.weights.len()],
            biases: vec![0.0; layer.biases.len()],
        }
    }

    pub(crate) fn clear(&mut self) {
        self.weights.iter_mut().for_each(|v| *v = 0.0);
        self.biases.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn is_zero(&self) -> bool {
        self.weights.iter().chain(&self.biases).all(|&v| v == 0.0)
    }
}

/// Probability vector over a label inventory.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub probs: Vec<f64>,
}

impl Posterior {
    /// Index of the largest probability; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        argmax_lowest(&self.probs)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// First index of the maximum element. Panics on an empty slice.
pub fn argmax_lowest<T: PartialOrd + Copy>(values: &[T]) -> usize {
    assert!(!values.is_empty(), "argmax of empty slice");
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Numerically stable softmax, written in place over `logits`.
pub(crate) fn softmax_in_place(logits: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in logits.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in logits.iter_mut() {
        *v /= sum;
    }
}

/// Cross-entropy of a one-hot target against a probability vector.
pub fn cross_entropy(probs: &[f64], target: usize) -> f64 {
    -probs[target].max(LOG_CLAMP).ln()
}

/// Forward through a stack of ReLU layers. `acts[0]` must already hold the
/// input; `acts[k + 1]` receives the output of `layers[k]`.
pub(crate) fn relu_stack_forward(layers: &[Dense], acts: &mut [Vec<f64>]) {
    for (k, layer) in layers.iter().enumerate() {
        let (lower, upper) = acts.split_at_mut(k + 1);
        let out = &mut upper[0];
        layer.affine(&lower[k], out);
        for v in out.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
    }
}

/// Back-propagates `d_top` (gradient w.r.t. the last activation) through a
/// ReLU stack, accumulating into `grads`. `d_top` is consumed as scratch.
pub(crate) fn relu_stack_backward(
    layers: &[Dense],
    acts: &[Vec<f64>],
    d_top: &mut Vec<f64>,
    grads: &mut [LayerGrad],
    scratch: &mut Vec<f64>,
) {
    for k in (0..layers.len()).rev() {
        // relu'(z) via the post-activation value
        for (d, &a) in d_top.iter_mut().zip(&acts[k + 1]) {
            if a <= 0.0 {
                *d = 0.0;
            }
        }
        if k == 0 {
            layers[k].backward(&acts[k], d_top, &mut grads[k], None);
        } else {
            scratch.resize(layers[k].in_dim, 0.0);
            layers[k].backward(&acts[k], d_top, &mut grads[k], Some(scratch));
            std::mem::swap(d_top, scratch);
        }
    }
}

pub(crate) fn alloc_acts(dims: &[usize]) -> Vec<Vec<f64>> {
    dims.iter().map(|&d| vec![0.0; d]).collect()
}

/// A dense feed-forward classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layer_dims: Vec<usize>,
    layers: Vec<Dense>,
    activation: Activation,
    seed: u64,
}

/// Builds a network with seeded weights and zero biases.
pub fn init_network(layer_dims: &[usize], seed: u64) -> Result<Network> {
    validate_dims(layer_dims, 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = layer_dims
        .windows(2)
        .map(|w| Dense::random(w[0], w[1], &mut rng))
        .collect();
    Ok(Network {
        layer_dims: layer_dims.to_vec(),
        layers,
        activation: Activation::Relu,
        seed,
    })
}

pub(crate) fn validate_dims(dims: &[usize], min_len: usize) -> Result<()> {
    if dims.len() < min_len {
        return Err(Error::InvalidArchitecture(format!(
            "need at least {min_len} layer dims, got {}",
            dims.len()
        )));
    }
    if let Some(pos) = dims.iter().position(|&d| d == 0) {
        return Err(Error::InvalidArchitecture(format!("layer dim {pos} is zero")));
    }
    Ok(())
}

impl Network {
    /// Assembles a network from explicit layers; consecutive dims must chain.
    pub fn from_layers(layers: Vec<Dense>, seed: u64) -> Result<Network> {
        let first = layers
            .first()
            .ok_or_else(|| Error::InvalidArchitecture("network needs at least one layer".into()))?;
        let mut layer_dims = vec![first.in_dim];
        for layer in &layers {
            let prev = *layer_dims.last().unwrap();
            if layer.in_dim != prev {
                return Err(Error::shape(prev, layer.in_dim, "layer input dim"));
            }
            layer_dims.push(layer.out_dim);
        }
        Ok(Network {
            layer_dims,
            layers,
            activation: Activation::Relu,
            seed,
        })
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::shape(self.input_dim(), x.len(), "network input"));
        }
        Ok(())
    }

    fn hidden(&self) -> &[Dense] {
        &self.layers[..self.layers.len() - 1]
    }

    fn output_layer(&self) -> &Dense {
        self.layers.last().unwrap()
    }

    fn forward_into(&self, acts: &mut [Vec<f64>], probs: &mut [f64]) {
        relu_stack_forward(self.hidden(), acts);
        self.output_layer().affine(&acts[acts.len() - 1], probs);
        softmax_in_place(probs);
    }

    pub fn forward(&self, x: &[f64]) -> Result<Posterior> {
        self.check_input(x)?;
        let mut acts = alloc_acts(&self.layer_dims[..self.layer_dims.len() - 1]);
        acts[0].copy_from_slice(x);
        let mut probs = vec![0.0; self.output_dim()];
        self.forward_into(&mut acts, &mut probs);
        Ok(Posterior { probs })
    }

    /// Argmax of [`Network::forward`], lowest label on ties.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(self.forward(x)?.argmax())
    }

    /// Predictions for every frame. Scored in parallel; the result does not
    /// depend on the number of workers.
    pub fn predict_all(&self, frames: &FrameSet) -> Result<Vec<usize>> {
        if !frames.is_empty() && frames.dim() != self.input_dim() {
            return Err(Error::shape(self.input_dim(), frames.dim(), "network input"));
        }
        Ok((0..frames.len())
            .into_par_iter()
            .map_init(
                || {
                    (
                        alloc_acts(&self.layer_dims[..self.layer_dims.len() - 1]),
                        vec![0.0; self.output_dim()],
                    )
                },
                |(acts, probs), i| {
                    acts[0].copy_from_slice(frames.features(i));
                    self.forward_into(acts, probs);
                    argmax_lowest(probs)
                },
            )
            .collect())
    }

    /// Cross-entropy of one labeled frame and its gradient w.r.t. every
    /// weight and bias, in layer order.
    pub fn loss_and_gradients(&self, x: &[f64], label: usize) -> Result<(f64, Vec<LayerGrad>)> {
        self.check_input(x)?;
        if label >= self.output_dim() {
            return Err(Error::LabelRange {
                label,
                size: self.output_dim(),
            });
        }
        let mut ws = Workspace::new(self);
        let mut grads = self.zero_grads();
        let loss = self.accumulate(x, label, &mut ws, &mut grads);
        Ok((loss, grads))
    }

    pub fn zero_grads(&self) -> Vec<LayerGrad> {
        self.layers.iter().map(LayerGrad::zeros_like).collect()
    }

    fn accumulate(&self, x: &[f64], label: usize, ws: &mut Workspace, grads: &mut [LayerGrad]) -> f64 {
        ws.acts[0].copy_from_slice(x);
        self.forward_into(&mut ws.acts, &mut ws.probs);
        let loss = cross_entropy(&ws.probs, label);
        // d(CE)/d(logits) = p - onehot
        ws.probs[label] -= 1.0;
        let n_hidden = self.layers.len() - 1;
        let top = &ws.acts[n_hidden];
        let (hidden_grads, out_grad) = grads.split_at_mut(n_hidden);
        if n_hidden == 0 {
            self.output_layer().backward(top, &ws.probs, &mut out_grad[0], None);
            return loss;
        }
        ws.d_top.resize(top.len(), 0.0);
        self.output_layer()
            .backward(top, &ws.probs, &mut out_grad[0], Some(&mut ws.d_top));
        relu_stack_backward(self.hidden(), &ws.acts, &mut ws.d_top, hidden_grads, &mut ws.scratch);
        loss
    }

    pub(crate) fn apply_update(&mut self, grads: &[LayerGrad], step: f64) {
        for (layer, g) in self.layers.iter_mut().zip(grads) {
            layer.apply_update(g, step);
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, &NetworkFile::from(self))
    }

    pub fn load(path: &Path) -> Result<Network> {
        let file: NetworkFile = read_json(path)?;
        file.into_network()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&NetworkFile::from(self)).expect("network serializes")
    }

    pub fn from_json(text: &str) -> Result<Network> {
        let file: NetworkFile =
            serde_json::from_str(text).map_err(|e| Error::format("network model", e.to_string()))?;
        file.into_network()
    }
}

struct Workspace {
    acts: Vec<Vec<f64>>,
    probs: Vec<f64>,
    d_top: Vec<f64>,
    scratch: Vec<f64>,
}

impl Workspace {
    fn new(net: &Network) -> Self {
        let dims = net.layer_dims();
        Workspace {
            acts: alloc_acts(&dims[..dims.len() - 1]),
            probs: vec![0.0; net.output_dim()],
            d_top: Vec::new(),
            scratch: Vec::new(),
        }
    }
}

/// Hyperparameters of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub initial_lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub shuffle_seed: u64,
    pub halve_every_epoch: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            initial_lr: 0.08,
            epochs: 16,
            batch_size: 32,
            shuffle_seed: 0,
            halve_every_epoch: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_lr > 0.0 && self.initial_lr.is_finite()) {
            return Err(Error::Config(format!("initial_lr must be > 0, got {}", self.initial_lr)));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        Ok(())
    }
}

/// Learning rate used during `epoch` (0-based).
pub fn lr_at_epoch(cfg: &TrainConfig, epoch: usize) -> Result<f64> {
    if epoch >= cfg.epochs {
        return Err(Error::Range {
            what: "epoch",
            index: epoch,
            limit: cfg.epochs,
        });
    }
    Ok(schedule_lr(cfg.initial_lr, cfg.halve_every_epoch, epoch))
}

pub(crate) fn schedule_lr(initial: f64, halve: bool, epoch: usize) -> f64 {
    if halve {
        // exact: scaling by a power of two only touches the exponent
        initial * 0.5f64.powi(epoch as i32)
    } else {
        initial
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub lr: f64,
    pub mean_loss: f64,
    /// Mean loss per language id, for multi-language runs.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_language: Vec<(usize, f64)>,
}

/// Per-epoch record of a training run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub epochs: Vec<EpochStats>,
}

impl TrainLog {
    pub fn losses(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.mean_loss).collect()
    }

    pub fn lrs(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.lr).collect()
    }
}

impl fmt::Display for TrainLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.epochs {
            write!(f, "epoch {} lr {} loss {:.6}", e.epoch, e.lr, e.mean_loss)?;
            for (lang, loss) in &e.per_language {
                write!(f, " lang{lang} {loss:.6}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Trains `net` in place with shuffled mini-batch SGD.
pub fn train(net: &mut Network, data: &FrameSet, cfg: &TrainConfig) -> Result<TrainLog> {
    cfg.validate()?;
    sgd(net, data, cfg.initial_lr, cfg.halve_every_epoch, cfg.epochs, cfg.batch_size, cfg.shuffle_seed)
}

pub(crate) fn sgd(
    net: &mut Network,
    data: &FrameSet,
    initial_lr: f64,
    halve: bool,
    epochs: usize,
    batch_size: usize,
    shuffle_seed: u64,
) -> Result<TrainLog> {
    if data.is_empty() {
        return Err(Error::EmptyData("training set"));
    }
    if data.dim() != net.input_dim() {
        return Err(Error::shape(net.input_dim(), data.dim(), "training features"));
    }
    data.check_labels(net.output_dim())?;
    if batch_size == 0 {
        return Err(Error::Config("batch_size must be >= 1".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(shuffle_seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut ws = Workspace::new(net);
    let mut grads = net.zero_grads();
    let mut log = TrainLog::default();

    for epoch in 0..epochs {
        let lr = schedule_lr(initial_lr, halve, epoch);
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(batch_size) {
            grads.iter_mut().for_each(LayerGrad::clear);
            for &i in batch {
                total += net.accumulate(data.features(i), data.label(i), &mut ws, &mut grads);
            }
            net.apply_update(&grads, lr / batch.len() as f64);
        }
        log.epochs.push(EpochStats {
            epoch,
            lr,
            mean_loss: total / data.len() as f64,
            per_language: Vec::new(),
        });
    }
    Ok(log)
}

#[derive(Serialize, Deserialize)]
pub(crate) struct LayerFile {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl From<&Dense> for LayerFile {
    fn from(d: &Dense) -> Self {
        LayerFile {
            in_dim: d.in_dim,
            out_dim: d.out_dim,
            weights: d.weights.clone(),
            biases: d.biases.clone(),
        }
    }
}

impl LayerFile {
    pub(crate) fn into_dense(self) -> Result<Dense> {
        Dense::from_parts(self.in_dim, self.out_dim, self.weights, self.biases)
    }
}

pub(crate) const NETWORK_FORMAT: &str = "senmap-network";
pub(crate) const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    format: String,
    version: u32,
    layer_dims: Vec<usize>,
    activation: Activation,
    seed: u64,
    layers: Vec<LayerFile>,
}

impl From<&Network> for NetworkFile {
    fn from(net: &Network) -> Self {
        NetworkFile {
            format: NETWORK_FORMAT.into(),
            version: FORMAT_VERSION,
            layer_dims: net.layer_dims.clone(),
            activation: net.activation,
            seed: net.seed,
            layers: net.layers.iter().map(LayerFile::from).collect(),
        }
    }
}

impl NetworkFile {
    fn into_network(self) -> Result<Network> {
        if self.format != NETWORK_FORMAT {
            return Err(Error::format("network model", format!("unexpected format tag {:?}", self.format)));
        }
        if self.version != FORMAT_VERSION {
            return Err(Error::format("network model", format!("unsupported version {}", self.version)));
        }
        validate_dims(&self.layer_dims, 2)?;
        let layers = self
            .layers
            .into_iter()
            .map(LayerFile::into_dense)
            .collect::<Result<Vec<_>>>()?;
        let mut net = Network::from_layers(layers, self.seed)?;
        if net.layer_dims != self.layer_dims {
            return Err(Error::format("network model", "layer_dims disagree with layer shapes"));
        }
        net.activation = self.activation;
        Ok(net)
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hand_net() -> Network {
        // 2 -> 2 (relu) -> 3 (softmax)
        let hidden = Dense::from_parts(2, 2, vec![1.0, -1.0, 0.5, 2.0], vec![0.0, -1.0]).unwrap();
        let out = Dense::from_parts(2, 3, vec![1.0, 0.0, 0.0, 1.0, -1.0, 1.0], vec![0.0, 0.5, 0.0]).unwrap();
        Network::from_layers(vec![hidden, out], 0).unwrap()
    }

    #[test]
    fn init_is_deterministic_per_seed() {
        let a = init_network(&[4, 8, 3], 7).unwrap();
        let b = init_network(&[4, 8, 3], 7).unwrap();
        assert_eq!(a, b);
        let c = init_network(&[4, 8, 3], 8).unwrap();
        assert_ne!(a.layers()[0].weights(), c.layers()[0].weights());
        assert!(a.layers().iter().all(|l| l.biases().iter().all(|&b| b == 0.0)));
        assert_eq!(a.layers()[0].weights().len(), 8 * 4);
        assert_eq!(a.layers()[1].biases().len(), 3);
    }

    #[test]
    fn init_rejects_bad_dims() {
        assert!(matches!(init_network(&[4], 1), Err(Error::InvalidArchitecture(_))));
        assert!(matches!(init_network(&[], 1), Err(Error::InvalidArchitecture(_))));
        assert!(matches!(init_network(&[4, 0, 3], 1), Err(Error::InvalidArchitecture(_))));
    }

    #[test]
    fn zero_net_is_uniform() {
        let net = Network::from_layers(vec![Dense::zeros(5, 3)], 0).unwrap();
        let p = net.forward(&[1.0, -2.0, 3.0, 0.1, 9.0]).unwrap();
        for v in p.probs {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn hand_computed_forward() {
        // x = (1, 2): z1 = (1 - 2, 0.5 + 4 - 1) = (-1, 3.5) -> h = (0, 3.5)
        // logits = (0, 3.5 + 0.5, 3.5) = (0, 4, 3.5)
        let p = hand_net().forward(&[1.0, 2.0]).unwrap().probs;
        let e = [0f64.exp(), 4f64.exp(), 3.5f64.exp()];
        let s: f64 = e.iter().sum();
        for (got, want) in p.iter().zip(e.iter().map(|v| v / s)) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert_eq!(hand_net().predict(&[1.0, 2.0]).unwrap(), 1);
    }

    #[test]
    fn forward_shape_error() {
        assert!(matches!(hand_net().forward(&[1.0]), Err(Error::Shape { .. })));
    }

    #[test]
    fn argmax_ties_go_low() {
        assert_eq!(argmax_lowest(&[0.2, 0.5, 0.3]), 1);
        assert_eq!(argmax_lowest(&[0.4, 0.4, 0.2]), 0);
        assert_eq!(argmax_lowest(&[1u64, 3, 3]), 1);
    }

    #[test]
    fn softmax_survives_large_logits() {
        let mut v = vec![1000.0, 1000.0, -1000.0];
        softmax_in_place(&mut v);
        assert!((v[0] - 0.5).abs() < 1e-12 && v[2] == 0.0);
        assert!(cross_entropy(&v, 2).is_finite());
    }

    #[test]
    fn lr_schedule() {
        let cfg = TrainConfig::default();
        assert_eq!(lr_at_epoch(&cfg, 0).unwrap(), 0.08);
        assert_eq!(lr_at_epoch(&cfg, 1).unwrap(), 0.04);
        let cfg = TrainConfig {
            initial_lr: 0.008,
            ..TrainConfig::default()
        };
        assert!((lr_at_epoch(&cfg, 3).unwrap() - 0.001).abs() < 1e-18);
        assert!(matches!(lr_at_epoch(&cfg, 16), Err(Error::Range { .. })));
        let flat = TrainConfig {
            halve_every_epoch: false,
            ..TrainConfig::default()
        };
        assert_eq!(lr_at_epoch(&flat, 9).unwrap(), 0.08);
    }

    #[test]
    fn train_errors() {
        let mut net = init_network(&[2, 3], 0).unwrap();
        let empty = FrameSet::new(2);
        assert!(matches!(
            train(&mut net, &empty, &TrainConfig::default()),
            Err(Error::EmptyData(_))
        ));
        let bad = FrameSet::from_rows(&[vec![0.0, 0.0]], &[3], 0).unwrap();
        assert!(matches!(
            train(&mut net, &bad, &TrainConfig::default()),
            Err(Error::LabelRange { label: 3, size: 3 })
        ));
    }

    #[test]
    fn single_frame_overfits() {
        let mut net = init_network(&[3, 6, 4], 3).unwrap();
        let data = FrameSet::from_rows(&[vec![0.3, -0.7, 1.1]], &[2], 0).unwrap();
        let cfg = TrainConfig {
            initial_lr: 0.5,
            epochs: 200,
            batch_size: 1,
            shuffle_seed: 0,
            halve_every_epoch: false,
        };
        let log = train(&mut net, &data, &cfg).unwrap();
        let p = net.forward(data.features(0)).unwrap();
        assert!(cross_entropy(&p.probs, 2) < 0.01, "loss {:?}", log.losses().last());
    }

    #[test]
    fn json_roundtrip_is_bitwise() {
        let net = init_network(&[5, 7, 3], 11).unwrap();
        let back = Network::from_json(&net.to_json()).unwrap();
        assert_eq!(net, back);
        let x = [0.1, 0.2, -0.3, 0.4, 1e-3];
        let a = net.forward(&x).unwrap().probs;
        let b = back.forward(&x).unwrap().probs;
        assert!(a.iter().zip(&b).all(|(u, v)| u.to_bits() == v.to_bits()));
    }

    #[test]
    fn load_rejects_inconsistent_file() {
        let net = init_network(&[2, 3], 0).unwrap();
        let text = net.to_json().replace("\"layer_dims\":[2,3]", "\"layer_dims\":[2,4]");
        assert!(Network::from_json(&text).is_err());
    }
}
