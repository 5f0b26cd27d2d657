//! Seeded synthetic VAD to BE5 datasets with known generating functions,
//! for tests, fixtures and calibration runs.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::format::EmotionFormat;
use crate::lexicon::AlignedLexicon;

/// `n` words with VAD ratings drawn uniformly from `[1, 9]` and BE5 ratings
/// `f(vad)`, clamped to `[1, 5]`.
pub fn generate(
    n: usize,
    seed: u64,
    language: &str,
    prefix: &str,
    f: impl Fn(&[f64], &mut ChaCha8Rng) -> [f64; 5],
) -> Result<AlignedLexicon> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut source = Array2::zeros((n, 3));
    let mut target = Array2::zeros((n, 5));
    let be5 = EmotionFormat::be5();
    for i in 0..n {
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(1.0..=9.0)).collect();
        let y = f(&x, &mut rng);
        for j in 0..3 {
            source[[i, j]] = x[j];
        }
        for j in 0..5 {
            target[[i, j]] = be5.clamp(y[j]);
        }
    }
    let words = (0..n).map(|i| format!("{prefix}{i:05}")).collect();
    AlignedLexicon::new(words, EmotionFormat::vad(), be5, source, target, language)
}

/// Random `5 x 3` coefficient matrix. Each row is rescaled to an L1 norm of
/// 0.45, so `3 + W (x - 5)` stays inside `[1, 5]` without clamping while
/// still using most of the scale.
pub fn affine_weights(seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = Array2::from_shape_simple_fn((5, 3), || rng.random_range(-1.0..=1.0));
    for mut row in w.rows_mut() {
        let norm: f64 = row.iter().map(|v: &f64| v.abs()).sum();
        row.mapv_inplace(|v| 0.45 * v / norm);
    }
    w
}

/// Noise-free affine map `3 + W (x - 5)`.
pub fn affine(n: usize, seed: u64) -> Result<AlignedLexicon> {
    let w = affine_weights(seed ^ 0x5eed);
    generate(n, seed, "en", "a", |x, _| {
        let mut y = [3.0; 5];
        for (j, yj) in y.iter_mut().enumerate() {
            for k in 0..3 {
                *yj += w[[j, k]] * (x[k] - 5.0);
            }
        }
        y
    })
}

/// Symmetric V shapes: each target is `1 + 0.9 |x_k - 5|` of one source
/// variable, so no linear function of the source explains it.
pub fn v_shaped(n: usize, seed: u64) -> Result<AlignedLexicon> {
    generate(n, seed, "en", "v", |x, _| {
        let mut y = [0.0; 5];
        for (j, yj) in y.iter_mut().enumerate() {
            *yj = 1.0 + 0.9 * (x[j % 3] - 5.0).abs();
        }
        y
    })
}

/// Every target is `3 + 0.12 * c · (x - 5)` with a per-target sign pattern
/// plus Gaussian noise, so the influence of source variable `k` grows with
/// `|c_k|`.
pub fn additive(n: usize, coefficients: [f64; 3], noise_sd: f64, seed: u64, language: &str) -> Result<AlignedLexicon> {
    let noise = Normal::new(0.0, noise_sd).expect("finite noise");
    let signs = [1.0, -1.0, -1.0, -1.0, -1.0];
    generate(n, seed, language, language, |x, rng| {
        let mut y = [3.0; 5];
        for (j, yj) in y.iter_mut().enumerate() {
            for k in 0..3 {
                *yj += signs[j] * 0.12 * coefficients[k] * (x[k] - 5.0);
            }
            *yj += noise.sample(rng);
        }
        y
    })
}
