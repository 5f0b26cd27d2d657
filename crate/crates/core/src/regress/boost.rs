//! AdaBoost.R2 over small rectifier networks, one ensemble per target
//! variable. This is the word-emotion-induction baseline: it maps arbitrary
//! word features (typically embeddings) to ratings.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::FeatureTable;
use super::ffnn::{train_network, FfnnConfig, Network};
use crate::error::{Error, Result};
use crate::format::EmotionFormat;
use crate::lexicon::{AlignedLexicon, Lexicon};
use crate::util::derive_seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoostConfig {
    /// Maximum number of boosting stages per target variable.
    pub stages: usize,
    pub learning_rate: f64,
    pub base: FfnnConfig,
    pub seed: u64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        Self {
            stages: 50,
            learning_rate: 1.0,
            base: FfnnConfig {
                hidden_sizes: vec![100],
                dropout: 0.0,
                iterations: 1_000,
                ..FfnnConfig::default()
            },
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub network: Network,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostedEnsemble {
    /// `ensembles[j]` predicts target variable `j`.
    pub ensembles: Vec<Vec<Stage>>,
    pub config: BoostConfig,
    pub feature_dim: usize,
    /// Present when trained on emotion ratings rather than raw features.
    pub source_format: Option<EmotionFormat>,
    pub target_format: EmotionFormat,
}

/// Weighted median as used by AdaBoost.R2: the smallest value whose
/// cumulative weight (in ascending value order) reaches half the total.
pub fn weighted_median(values: &[f64], weights: &[f64]) -> f64 {
    debug_assert_eq!(values.len(), weights.len());
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let total: f64 = weights.iter().sum();
    let mut cdf = 0.0;
    for &i in &order {
        cdf += weights[i];
        if cdf >= 0.5 * total {
            return values[i];
        }
    }
    values[*order.last().expect("non-empty ensemble")]
}

/// Draws `n` indices with probability proportional to `weights`.
fn weighted_resample(weights: &[f64], rng: &mut impl Rng) -> Vec<usize> {
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for &w in weights {
        acc += w;
        cdf.push(acc);
    }
    (0..weights.len())
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            cdf.partition_point(|&c| c <= u).min(weights.len() - 1)
        })
        .collect()
}

fn fit_one_target(cfg: &BoostConfig, x: ArrayView2<f64>, y: ArrayView1<f64>, target: usize) -> Result<Vec<Stage>> {
    let n = x.nrows();
    let label = target.to_string();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &["resample", &label]));
    let mut weights = vec![1.0 / n as f64; n];
    let mut stages = Vec::new();
    for stage in 0..cfg.stages {
        let sample = weighted_resample(&weights, &mut rng);
        let xb = x.select(Axis(0), &sample);
        let yb = y.select(Axis(0), &sample).insert_axis(Axis(1));
        let base = FfnnConfig {
            seed: derive_seed(cfg.seed, &["stage", &label, &stage.to_string()]),
            ..cfg.base.clone()
        };
        let (network, _) = train_network(&base, xb.view(), yb.view())?;
        let pred = network.predict(x)?;
        let mut err: Vec<f64> = pred.column(0).iter().zip(y).map(|(p, t)| (p - t).abs()).collect();
        let max = err.iter().copied().fold(0.0, f64::max);
        if max > 0.0 {
            err.iter_mut().for_each(|e| *e /= max);
        }
        let avg: f64 = err.iter().zip(&weights).map(|(e, w)| e * w).sum();
        if avg <= 0.0 {
            stages.push(Stage { network, weight: 1.0 });
            break;
        }
        if avg >= 0.5 {
            if stages.is_empty() {
                stages.push(Stage { network, weight: 1.0 });
            }
            break;
        }
        let beta = avg / (1.0 - avg);
        let weight = cfg.learning_rate * (1.0 / beta).ln();
        for (w, e) in weights.iter_mut().zip(&err) {
            *w *= beta.powf((1.0 - e) * cfg.learning_rate);
        }
        let total: f64 = weights.iter().sum();
        stages.push(Stage { network, weight });
        if !(total > 0.0) {
            break;
        }
        weights.iter_mut().for_each(|w| *w /= total);
    }
    Ok(stages)
}

fn validate(cfg: &BoostConfig) -> Result<()> {
    if cfg.stages == 0 {
        return Err(Error::config("boosting needs at least one stage"));
    }
    if !(cfg.learning_rate > 0.0) {
        return Err(Error::config("boosting learning rate must be positive"));
    }
    cfg.base.validate()
}

/// Fits one ensemble per column of `y`.
pub fn fit_boosted_matrices(cfg: &BoostConfig, x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<Vec<Vec<Stage>>> {
    validate(cfg)?;
    if x.nrows() == 0 || x.nrows() != y.nrows() {
        return Err(Error::contract("boosting needs matching, non-empty training matrices"));
    }
    (0..y.ncols())
        .map(|j| fit_one_target(cfg, x, y.column(j), j))
        .collect()
}

pub fn fit_boosted_aligned(cfg: &BoostConfig, train: &AlignedLexicon) -> Result<BoostedEnsemble> {
    let ensembles = fit_boosted_matrices(cfg, train.source().view(), train.target().view())?;
    Ok(BoostedEnsemble {
        ensembles,
        config: cfg.clone(),
        feature_dim: train.source().ncols(),
        source_format: Some(train.source_format().clone()),
        target_format: train.target_format().clone(),
    })
}

/// Trains on the words present both in `features` and in `targets`.
pub fn fit_boosted(features: &FeatureTable, targets: &Lexicon, cfg: &BoostConfig) -> Result<BoostedEnsemble> {
    let dim = features
        .values()
        .next()
        .map(Vec::len)
        .ok_or_else(|| Error::contract("feature table is empty"))?;
    if features.values().any(|v| v.len() != dim) {
        return Err(Error::contract("feature vectors differ in length"));
    }
    let shared: Vec<(&Vec<f64>, &Vec<f64>)> = targets
        .entries()
        .iter()
        .filter_map(|(w, r)| features.get(w).map(|f| (f, r)))
        .collect();
    if shared.is_empty() {
        return Err(Error::contract("features and targets share no words"));
    }
    let x = Array2::from_shape_fn((shared.len(), dim), |(i, j)| shared[i].0[j]);
    let y = Array2::from_shape_fn((shared.len(), targets.format().dim()), |(i, j)| shared[i].1[j]);
    let ensembles = fit_boosted_matrices(cfg, x.view(), y.view())?;
    Ok(BoostedEnsemble {
        ensembles,
        config: cfg.clone(),
        feature_dim: dim,
        source_format: None,
        target_format: targets.format().clone(),
    })
}

impl BoostedEnsemble {
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.feature_dim {
            return Err(Error::contract(format!(
                "input has {} columns, ensemble expects {}",
                x.ncols(),
                self.feature_dim
            )));
        }
        let mut out = Array2::zeros((x.nrows(), self.ensembles.len()));
        for (j, stages) in self.ensembles.iter().enumerate() {
            let preds = stages
                .iter()
                .map(|s| s.network.predict(x).map(|p| p.column(0).to_owned()))
                .collect::<Result<Vec<_>>>()?;
            let weights: Vec<f64> = stages.iter().map(|s| s.weight).collect();
            let mut column = vec![0.0; stages.len()];
            for i in 0..x.nrows() {
                for (c, p) in column.iter_mut().zip(&preds) {
                    *c = p[i];
                }
                out[[i, j]] = weighted_median(&column, &weights);
            }
        }
        Ok(out)
    }

    /// Predicts every word of `features`, in table order.
    pub fn predict_words(&self, features: &FeatureTable) -> Result<(Vec<String>, Array2<f64>)> {
        let words: Vec<String> = features.keys().cloned().collect();
        let x = Array2::from_shape_fn((words.len(), self.feature_dim), |(i, j)| {
            features[i].get(j).copied().unwrap_or(f64::NAN)
        });
        if x.iter().any(|v| v.is_nan()) {
            return Err(Error::contract("feature vectors differ in length"));
        }
        Ok((words, self.predict(x.view())?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array1;

    #[test]
    fn weighted_median_examples() {
        assert_eq!(weighted_median(&[1.0, 2.0, 9.0], &[1.0, 1.0, 1.0]), 2.0);
        assert_eq!(weighted_median(&[9.0, 1.0, 2.0], &[1.0, 1.0, 1.0]), 2.0);
        assert_eq!(weighted_median(&[1.0, 2.0, 9.0], &[0.1, 0.1, 5.0]), 9.0);
        assert_eq!(weighted_median(&[3.0], &[0.7]), 3.0);
    }

    /// Enumerates every candidate value and keeps the smallest one whose
    /// at-or-below weight reaches half the total.
    fn brute_force_median(values: &[f64], weights: &[f64]) -> f64 {
        let total: f64 = weights.iter().sum();
        let mut best = f64::INFINITY;
        for &v in values {
            let below: f64 = values
                .iter()
                .zip(weights)
                .filter(|(x, _)| **x <= v)
                .map(|(_, w)| w)
                .sum();
            if below >= 0.5 * total && v < best {
                best = v;
            }
        }
        best
    }

    #[test]
    fn weighted_median_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..500 {
            let n = rng.random_range(1..9);
            let values: Vec<f64> = (0..n).map(|_| rng.random_range(0..6) as f64).collect();
            let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..2.0)).collect();
            assert_eq!(weighted_median(&values, &weights), brute_force_median(&values, &weights));
        }
    }

    #[test]
    fn resampling_follows_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let idx = weighted_resample(&[0.0, 1.0, 0.0, 0.0], &mut rng);
        assert!(idx.iter().all(|&i| i == 1));
    }

    fn toy(n: usize, seed: u64) -> (Array2<f64>, Array2<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_simple_fn((n, 4), || rng.random_range(-1.0..1.0));
        let y = Array2::from_shape_fn((n, 2), |(i, j)| {
            3.0 + x[[i, 0]] * (1.0 + j as f64) - 0.5 * x[[i, 1]] * x[[i, 2]]
        });
        (x, y)
    }

    fn small_cfg(stages: usize, seed: u64) -> BoostConfig {
        BoostConfig {
            stages,
            seed,
            base: FfnnConfig {
                hidden_sizes: vec![12],
                dropout: 0.0,
                iterations: 150,
                learning_rate: 1e-2,
                ..FfnnConfig::default()
            },
            ..BoostConfig::default()
        }
    }

    #[test]
    fn single_stage_equals_base_learner() {
        let (x, y) = toy(40, 2);
        let cfg = small_cfg(1, 9);
        let stages = fit_boosted_matrices(&cfg, x.view(), y.view()).unwrap();
        let e = BoostedEnsemble {
            ensembles: stages.clone(),
            config: cfg,
            feature_dim: 4,
            source_format: None,
            target_format: EmotionFormat::va(),
        };
        let pred = e.predict(x.view()).unwrap();
        for (j, s) in stages.iter().enumerate() {
            assert_eq!(s.len(), 1);
            let base: Array1<f64> = s[0].network.predict(x.view()).unwrap().column(0).to_owned();
            assert_eq!(pred.column(j), base);
        }
    }

    #[test]
    fn boosting_is_seeded_and_weights_positive() {
        let (x, y) = toy(40, 3);
        let cfg = small_cfg(4, 1);
        let a = fit_boosted_matrices(&cfg, x.view(), y.view()).unwrap();
        let b = fit_boosted_matrices(&cfg, x.view(), y.view()).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().flatten().all(|s| s.weight > 0.0));
        assert!(a.iter().all(|e| !e.is_empty() && e.len() <= 4));
    }

    #[test]
    fn fit_on_feature_table_requires_overlap() {
        let mut features = FeatureTable::new();
        features.insert("x".into(), vec![1.0, 2.0]);
        let lex = Lexicon::new(
            EmotionFormat::va(),
            [("y".to_string(), vec![5.0, 5.0])].into_iter().collect(),
            "en",
            "t",
        )
        .unwrap();
        assert!(matches!(fit_boosted(&features, &lex, &small_cfg(1, 0)), Err(Error::Contract(_))));
    }
}
