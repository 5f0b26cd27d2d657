//! Finite-difference verification of the network gradients.

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ffnn::{FfnnConfig, Mode, Network};
use crate::error::{Error, Result};

pub const DEFAULT_STEP: f64 = 1e-5;

/// Central-difference gradient of the eval-mode loss for every parameter.
pub fn numerical_gradient(net: &Network, x: ArrayView2<f64>, y: ArrayView2<f64>, step: f64) -> Result<Vec<f64>> {
    let base = net.params();
    let mut probe = net.clone();
    let mut params = base.clone();
    let mut out = Vec::with_capacity(base.len());
    for i in 0..base.len() {
        let (up, down) = (base[i] + step, base[i] - step);
        params[i] = up;
        probe.set_params(&params)?;
        let plus = probe.predict(x)?;
        params[i] = down;
        probe.set_params(&params)?;
        let minus = probe.predict(x)?;
        params[i] = base[i];
        // Divide by the step actually taken after rounding, not the nominal one.
        out.push(loss_difference(plus.view(), minus.view(), y) / (up - down));
    }
    Ok(out)
}

/// `mse(a, y) - mse(b, y)`, evaluated as a difference of squares so the
/// two nearly equal losses never have to be subtracted.
fn loss_difference(a: ArrayView2<f64>, b: ArrayView2<f64>, y: ArrayView2<f64>) -> f64 {
    let total: f64 = a
        .iter()
        .zip(b)
        .zip(y)
        .map(|((p, q), g)| (p - q) * ((p - g) + (q - g)))
        .sum();
    total / y.len() as f64
}

/// Largest `|a - n| / max(|a|, |n|, 1e-8)` over all components.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> Result<f64> {
    if analytic.len() != numeric.len() {
        return Err(Error::contract("gradient vectors differ in length"));
    }
    Ok(analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-8))
        .fold(0.0, f64::max))
}

/// Backprop gradient of the eval-mode loss, flattened like [`Network::params`].
pub fn analytic_gradient(net: &Network, x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<Vec<f64>> {
    let mut unused = ChaCha8Rng::seed_from_u64(0);
    let cache = net.forward(x, Mode::Eval, 0.0, &mut unused)?;
    Ok(net.backward(&cache, y)?.flatten())
}

/// Builds a network from `cfg` (hidden layers may be empty here; dropout is
/// ignored) and compares backprop against central differences on `(x, y)`.
///
/// Biases are drawn from `[-0.1, 0.1]` instead of starting at zero. With zero
/// biases a unit whose inputs are all inactive sits exactly on the ReLU
/// kink, where the two one-sided derivatives disagree.
pub fn gradient_check(cfg: &FfnnConfig, x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<f64> {
    if x.nrows() != y.nrows() || x.nrows() == 0 {
        return Err(Error::contract("gradient check needs matching, non-empty samples"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut net = Network::init(x.ncols(), &cfg.hidden_sizes, y.ncols(), &mut rng);
    for layer in &mut net.layers {
        layer.bias.mapv_inplace(|_| rng.random_range(-0.1..0.1));
    }
    let analytic = analytic_gradient(&net, x, y)?;
    let numeric = numerical_gradient(&net, x, y, DEFAULT_STEP)?;
    max_relative_error(&analytic, &numeric)
}

/// Seeded random inputs and targets in `[-2, 2]` for a check.
pub fn random_problem(n: usize, inputs: usize, outputs: usize, seed: u64) -> (Array2<f64>, Array2<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Array2::from_shape_simple_fn((n, inputs), || rng.random_range(-2.0..=2.0));
    let y = Array2::from_shape_simple_fn((n, outputs), || rng.random_range(-2.0..=2.0));
    (x, y)
}
