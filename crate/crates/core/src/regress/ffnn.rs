//! Multi-task feed-forward network.
//!
//! Hidden layers are rectifier layers shared by every target variable; only
//! the final affine layer has per-variable parameters. Training is full-batch
//! Adam on the mean squared error over all cells, with inverted dropout on
//! hidden activations.

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::EmotionFormat;
use crate::lexicon::AlignedLexicon;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FfnnConfig {
    pub hidden_sizes: Vec<usize>,
    /// Dropout rate on every hidden layer's output.
    pub dropout: f64,
    /// Full-batch optimizer steps.
    pub iterations: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for FfnnConfig {
    fn default() -> Self {
        Self {
            hidden_sizes: vec![128, 128],
            dropout: 0.2,
            iterations: 10_000,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
        }
    }
}

impl FfnnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_sizes.is_empty() || self.hidden_sizes.contains(&0) {
            return Err(Error::config("hidden_sizes must be non-empty and positive"));
        }
        self.validate_optimizer()
    }

    fn validate_optimizer(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::config(format!("dropout {} not in [0, 1)", self.dropout)));
        }
        if self.iterations == 0 {
            return Err(Error::config("iterations must be at least 1"));
        }
        if !(self.learning_rate > 0.0
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.epsilon > 0.0)
        {
            return Err(Error::config("invalid optimizer hyperparameters"));
        }
        Ok(())
    }
}

/// One affine layer; `weights` is `fan_out x fan_in`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    fn fan_in(&self) -> usize {
        self.weights.ncols()
    }

    fn fan_out(&self) -> usize {
        self.weights.nrows()
    }

    fn apply(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut z = x.dot(&self.weights.t());
        z += &self.bias;
        z
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mode {
    Train,
    Eval,
}

/// Intermediate values of one forward pass, needed for backpropagation.
#[derive(Clone, Debug)]
pub struct ForwardCache {
    /// Input of each layer (`inputs[0]` is the network input).
    inputs: Vec<Array2<f64>>,
    /// Pre-activations of the hidden layers.
    pre_activations: Vec<Array2<f64>>,
    /// Scaled dropout masks of the hidden layers (train mode only).
    masks: Vec<Option<Array2<f64>>>,
    output: Array2<f64>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        &self.output
    }
}

/// Gradients in the same layout as the network's layers.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

impl Gradients {
    pub fn flatten(&self) -> Vec<f64> {
        flatten_layers(&self.layers)
    }
}

fn flatten_layers(layers: &[Dense]) -> Vec<f64> {
    let mut out = Vec::new();
    for l in layers {
        out.extend(l.weights.iter());
        out.extend(l.bias.iter());
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub layers: Vec<Dense>,
}

impl Network {
    /// Uniform Glorot weights and zero biases; `hidden` may be empty, which
    /// gives a purely affine network.
    pub fn init(input: usize, hidden: &[usize], output: usize, rng: &mut impl Rng) -> Network {
        let widths: Vec<usize> = std::iter::once(input)
            .chain(hidden.iter().copied())
            .chain(std::iter::once(output))
            .collect();
        let layers = widths
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let weights =
                    Array2::from_shape_simple_fn((fan_out, fan_in), || rng.random_range(-limit..limit));
                Dense {
                    weights,
                    bias: Array1::zeros(fan_out),
                }
            })
            .collect();
        Network { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].fan_in()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("network has layers").fan_out()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| (l.fan_in() + 1) * l.fan_out()).sum()
    }

    pub fn params(&self) -> Vec<f64> {
        flatten_layers(&self.layers)
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::contract(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                flat.len()
            )));
        }
        let mut it = flat.iter().copied();
        for l in &mut self.layers {
            l.weights.iter_mut().for_each(|w| *w = it.next().unwrap());
            l.bias.iter_mut().for_each(|b| *b = it.next().unwrap());
        }
        Ok(())
    }

    fn check_input(&self, x: ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.input_dim() {
            return Err(Error::contract(format!(
                "input has {} columns, network expects {}",
                x.ncols(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    /// Forward pass. In train mode each hidden activation is multiplied by
    /// a fresh mask of `1/(1-dropout)` (kept) or `0` (dropped).
    pub fn forward(
        &self,
        x: ArrayView2<f64>,
        mode: Mode,
        dropout: f64,
        rng: &mut impl Rng,
    ) -> Result<ForwardCache> {
        self.check_input(x)?;
        let hidden = self.layers.len() - 1;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre_activations = Vec::with_capacity(hidden);
        let mut masks = Vec::with_capacity(hidden);
        let mut a = x.to_owned();
        for layer in &self.layers[..hidden] {
            let z = layer.apply(a.view());
            let mut h = z.mapv(|v| v.max(0.0));
            let mask = if mode == Mode::Train && dropout > 0.0 {
                let keep = 1.0 - dropout;
                let scale = 1.0 / keep;
                let m = Array2::from_shape_simple_fn(h.raw_dim(), || {
                    if rng.random::<f64>() < keep {
                        scale
                    } else {
                        0.0
                    }
                });
                h *= &m;
                Some(m)
            } else {
                None
            };
            inputs.push(a);
            pre_activations.push(z);
            masks.push(mask);
            a = h;
        }
        let output = self.layers[hidden].apply(a.view());
        inputs.push(a);
        Ok(ForwardCache {
            inputs,
            pre_activations,
            masks,
            output,
        })
    }

    /// Deterministic eval-mode prediction.
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(x)?;
        let mut a = x.to_owned();
        let hidden = self.layers.len() - 1;
        for layer in &self.layers[..hidden] {
            a = layer.apply(a.view()).mapv_into(|v| v.max(0.0));
        }
        Ok(self.layers[hidden].apply(a.view()))
    }

    /// Exact gradients of [`mse`] through the cached (possibly masked)
    /// forward computation.
    pub fn backward(&self, cache: &ForwardCache, gold: ArrayView2<f64>) -> Result<Gradients> {
        let hidden = self.layers.len() - 1;
        let consistent = cache.inputs.len() == self.layers.len()
            && cache.pre_activations.len() == hidden
            && cache.masks.len() == hidden
            && cache
                .inputs
                .iter()
                .zip(&self.layers)
                .all(|(a, l)| a.ncols() == l.fan_in())
            && cache.output.ncols() == self.output_dim();
        if !consistent {
            return Err(Error::contract("forward cache does not belong to this network"));
        }
        if gold.dim() != cache.output.dim() {
            return Err(Error::contract(format!(
                "gold shape {:?} differs from output shape {:?}",
                gold.dim(),
                cache.output.dim()
            )));
        }
        let cells = (gold.nrows() * gold.ncols()).max(1) as f64;
        let mut delta = (&cache.output - &gold) * (2.0 / cells);
        let mut grads: Vec<Dense> = Vec::with_capacity(self.layers.len());
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let a_in = &cache.inputs[l];
            grads.push(Dense {
                weights: delta.t().dot(a_in),
                bias: delta.sum_axis(Axis(0)),
            });
            if l == 0 {
                break;
            }
            let mut upstream = delta.dot(&layer.weights);
            if let Some(mask) = &cache.masks[l - 1] {
                upstream *= mask;
            }
            Zip::from(&mut upstream)
                .and(&cache.pre_activations[l - 1])
                .for_each(|d, &z| {
                    if z <= 0.0 {
                        *d = 0.0;
                    }
                });
            delta = upstream;
        }
        grads.reverse();
        Ok(Gradients { layers: grads })
    }
}

/// Mean squared error over all `n x |t|` cells.
pub fn mse(pred: ArrayView2<f64>, gold: ArrayView2<f64>) -> Result<f64> {
    if pred.dim() != gold.dim() {
        return Err(Error::contract(format!(
            "prediction shape {:?} differs from gold shape {:?}",
            pred.dim(),
            gold.dim()
        )));
    }
    let cells = pred.len();
    if cells == 0 {
        return Ok(0.0);
    }
    let sum: f64 = pred.iter().zip(gold).map(|(p, g)| (p - g) * (p - g)).sum();
    Ok(sum / cells as f64)
}

struct Adam {
    m: Vec<Dense>,
    v: Vec<Dense>,
    step: i32,
}

impl Adam {
    fn new(net: &Network) -> Self {
        let zeros: Vec<Dense> = net
            .layers
            .iter()
            .map(|l| Dense {
                weights: Array2::zeros(l.weights.raw_dim()),
                bias: Array1::zeros(l.bias.raw_dim()),
            })
            .collect();
        Self {
            m: zeros.clone(),
            v: zeros,
            step: 0,
        }
    }

    fn update(&mut self, net: &mut Network, grads: &Gradients, cfg: &FfnnConfig) {
        self.step += 1;
        let (b1, b2) = (cfg.beta1, cfg.beta2);
        let c1 = 1.0 - b1.powi(self.step);
        let c2 = 1.0 - b2.powi(self.step);
        let (lr, eps) = (cfg.learning_rate, cfg.epsilon);
        for (((p, g), m), v) in net
            .layers
            .iter_mut()
            .zip(&grads.layers)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            Zip::from(&mut p.weights)
                .and(&g.weights)
                .and(&mut m.weights)
                .and(&mut v.weights)
                .for_each(|p, &g, m, v| adam_step(p, g, m, v, b1, b2, c1, c2, lr, eps));
            Zip::from(&mut p.bias)
                .and(&g.bias)
                .and(&mut m.bias)
                .and(&mut v.bias)
                .for_each(|p, &g, m, v| adam_step(p, g, m, v, b1, b2, c1, c2, lr, eps));
        }
    }
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn adam_step(p: &mut f64, g: f64, m: &mut f64, v: &mut f64, b1: f64, b2: f64, c1: f64, c2: f64, lr: f64, eps: f64) {
    *m = b1 * *m + (1.0 - b1) * g;
    *v = b2 * *v + (1.0 - b2) * g * g;
    let m_hat = *m / c1;
    let v_hat = *v / c2;
    *p -= lr * m_hat / (v_hat.sqrt() + eps);
}

/// Trains a network on raw matrices. Returns the network and the training
/// loss recorded at every iteration (before that iteration's update).
///
/// An empty `hidden_sizes` is accepted here and yields an affine model.
pub fn train_network(cfg: &FfnnConfig, x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<(Network, Vec<f64>)> {
    cfg.validate_optimizer()?;
    if x.nrows() == 0 {
        return Err(Error::contract("cannot train on an empty training set"));
    }
    if x.nrows() != y.nrows() {
        return Err(Error::contract(format!(
            "{} source rows but {} target rows",
            x.nrows(),
            y.nrows()
        )));
    }
    let mut init_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    dropout_rng.set_stream(1);
    let mut net = Network::init(x.ncols(), &cfg.hidden_sizes, y.ncols(), &mut init_rng);
    let mut adam = Adam::new(&net);
    let mut trace = Vec::with_capacity(cfg.iterations);
    for iteration in 0..cfg.iterations {
        let cache = net.forward(x, Mode::Train, cfg.dropout, &mut dropout_rng)?;
        let loss = mse(cache.output.view(), y)?;
        if !loss.is_finite() {
            return Err(Error::Divergence { iteration, loss });
        }
        trace.push(loss);
        let grads = net.backward(&cache, y)?;
        adam.update(&mut net, &grads, cfg);
    }
    if net.params().iter().any(|p| !p.is_finite()) {
        return Err(Error::Divergence {
            iteration: cfg.iterations,
            loss: f64::NAN,
        });
    }
    Ok((net, trace))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FfnnModel {
    pub network: Network,
    pub config: FfnnConfig,
    pub source_format: EmotionFormat,
    pub target_format: EmotionFormat,
    pub loss_trace: Vec<f64>,
}

/// Untrained model with seeded initial weights.
pub fn init_ffnn(cfg: &FfnnConfig, source: &EmotionFormat, target: &EmotionFormat) -> Result<FfnnModel> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    Ok(FfnnModel {
        network: Network::init(source.dim(), &cfg.hidden_sizes, target.dim(), &mut rng),
        config: cfg.clone(),
        source_format: source.clone(),
        target_format: target.clone(),
        loss_trace: Vec::new(),
    })
}

pub fn train_ffnn(cfg: &FfnnConfig, train: &AlignedLexicon) -> Result<FfnnModel> {
    cfg.validate()?;
    let (network, loss_trace) = train_network(cfg, train.source().view(), train.target().view())?;
    Ok(FfnnModel {
        network,
        config: cfg.clone(),
        source_format: train.source_format().clone(),
        target_format: train.target_format().clone(),
        loss_trace,
    })
}

impl FfnnModel {
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.network.predict(x)
    }
}
