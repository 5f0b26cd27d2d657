//! k-nearest-neighbour regression in source space.

use std::cmp::Ordering;

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::EmotionFormat;
use crate::lexicon::AlignedLexicon;

pub const DEFAULT_K: usize = 20;

/// A lazy learner: keeps the training matrices and averages the targets of
/// the nearest stored rows at prediction time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub source: Array2<f64>,
    pub target: Array2<f64>,
    pub source_format: EmotionFormat,
    pub target_format: EmotionFormat,
}

pub fn fit_knn(train: &AlignedLexicon, k: usize) -> Result<KnnModel> {
    if k < 1 {
        return Err(Error::contract("k must be at least 1"));
    }
    if train.is_empty() {
        return Err(Error::contract("cannot fit on an empty training set"));
    }
    Ok(KnnModel {
        k,
        source: train.source().clone(),
        target: train.target().clone(),
        source_format: train.source_format().clone(),
        target_format: train.target_format().clone(),
    })
}

fn squared_distance(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Orders by distance, then by stored row index.
fn by_distance_then_index(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

impl KnnModel {
    /// Number of neighbours actually used: `k` clamped to the stored rows.
    pub fn effective_k(&self) -> usize {
        self.k.min(self.source.nrows())
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.source.ncols() {
            return Err(Error::contract(format!(
                "input has {} columns, model expects {}",
                x.ncols(),
                self.source.ncols()
            )));
        }
        let k = self.effective_k();
        if k < self.k {
            log::warn!("k = {} exceeds {} training rows; using k = {k}", self.k, self.source.nrows());
        }
        let mut out = Array2::zeros((x.nrows(), self.target.ncols()));
        let mut dist: Vec<(f64, usize)> = Vec::with_capacity(self.source.nrows());
        for (q, query) in x.rows().into_iter().enumerate() {
            dist.clear();
            dist.extend(
                self.source
                    .rows()
                    .into_iter()
                    .enumerate()
                    .map(|(i, r)| (squared_distance(query, r), i)),
            );
            if k < dist.len() {
                dist.select_nth_unstable_by(k - 1, by_distance_then_index);
            }
            let nearest = &mut dist[..k];
            nearest.sort_unstable_by(by_distance_then_index);
            let mut row = out.row_mut(q);
            for &(_, i) in nearest.iter() {
                row += &self.target.row(i);
            }
            row /= k as f64;
        }
        Ok(out)
    }
}
