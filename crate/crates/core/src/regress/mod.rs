//! Mapping models and the uniform fit/predict contract that experiments and
//! lexicon generation program against.

pub mod boost;
pub mod features;
pub mod ffnn;
pub mod gradcheck;
pub mod knn;
pub mod linear;
pub mod serialize;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::format::EmotionFormat;
use crate::lexicon::AlignedLexicon;

pub use boost::{BoostConfig, BoostedEnsemble};
pub use ffnn::{FfnnConfig, FfnnModel};
pub use knn::{KnnModel, DEFAULT_K};
pub use linear::LinearModel;

fn default_k() -> usize {
    DEFAULT_K
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelKind {
    Linear,
    Knn {
        #[serde(default = "default_k")]
        k: usize,
    },
    Ffnn(FfnnConfig),
    Boosted(BoostConfig),
}

/// A named, fully configured model recipe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: ModelKind,
}

impl ModelSpec {
    pub fn new(name: impl Into<String>, kind: ModelKind) -> Self {
        Self {
            name: name.into(),
            kind,
        }
    }

    pub fn linear() -> Self {
        Self::new("LR", ModelKind::Linear)
    }

    pub fn knn() -> Self {
        Self::new("KNN", ModelKind::Knn { k: DEFAULT_K })
    }

    pub fn ffnn() -> Self {
        Self::new("FFNN", ModelKind::Ffnn(FfnnConfig::default()))
    }

    /// Trains on `train`. For stochastic models `seed` replaces the seed in
    /// the configuration.
    pub fn fit(&self, train: &AlignedLexicon, seed: u64) -> Result<MappingModel> {
        Ok(match &self.kind {
            ModelKind::Linear => MappingModel::Linear(linear::fit_linear(train)?),
            ModelKind::Knn { k } => MappingModel::Knn(knn::fit_knn(train, *k)?),
            ModelKind::Ffnn(cfg) => {
                let cfg = FfnnConfig { seed, ..cfg.clone() };
                MappingModel::Ffnn(ffnn::train_ffnn(&cfg, train)?)
            }
            ModelKind::Boosted(cfg) => {
                let cfg = BoostConfig { seed, ..cfg.clone() };
                MappingModel::Boosted(boost::fit_boosted_aligned(&cfg, train)?)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "lowercase")]
pub enum MappingModel {
    Linear(LinearModel),
    Knn(KnnModel),
    Ffnn(FfnnModel),
    Boosted(BoostedEnsemble),
}

impl MappingModel {
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        match self {
            MappingModel::Linear(m) => m.predict(x),
            MappingModel::Knn(m) => m.predict(x),
            MappingModel::Ffnn(m) => m.predict(x),
            MappingModel::Boosted(m) => m.predict(x),
        }
    }

    /// `None` for ensembles trained on raw features.
    pub fn source_format(&self) -> Option<&EmotionFormat> {
        match self {
            MappingModel::Linear(m) => Some(&m.source_format),
            MappingModel::Knn(m) => Some(&m.source_format),
            MappingModel::Ffnn(m) => Some(&m.source_format),
            MappingModel::Boosted(m) => m.source_format.as_ref(),
        }
    }

    pub fn target_format(&self) -> &EmotionFormat {
        match self {
            MappingModel::Linear(m) => &m.target_format,
            MappingModel::Knn(m) => &m.target_format,
            MappingModel::Ffnn(m) => &m.target_format,
            MappingModel::Boosted(m) => &m.target_format,
        }
    }
}

/// Anything that can be trained on aligned data. Experiments accept this
/// rather than `ModelSpec` so that reference predictors can be plugged in.
pub trait Learner: Sync {
    fn name(&self) -> &str;
    fn fit(&self, train: &AlignedLexicon, seed: u64) -> Result<Box<dyn Predictor>>;
}

pub trait Predictor: Send {
    fn predict(&self, x: ArrayView2<f64>) -> Result<Array2<f64>>;
}

impl Predictor for MappingModel {
    fn predict(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        MappingModel::predict(self, x)
    }
}

impl Learner for ModelSpec {
    fn name(&self) -> &str {
        &self.name
    }

    fn fit(&self, train: &AlignedLexicon, seed: u64) -> Result<Box<dyn Predictor>> {
        Ok(Box::new(ModelSpec::fit(self, train, seed)?))
    }
}
