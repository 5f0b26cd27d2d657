use ndarray::{Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use super::folds::FoldSplit;
use crate::error::{Error, Result};
use crate::lexicon::AlignedLexicon;
use crate::regress::Learner;
use crate::stats::pearson;

/// Correlations from one cross-validation run. `None` marks a degenerate
/// fold (fewer than two rows or a constant series).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    /// `fold_r[variable][fold]`.
    pub fold_r: Vec<Vec<Option<f64>>>,
    /// r over the out-of-fold predictions of all folds pooled together.
    pub pooled_r: Vec<Option<f64>>,
}

/// Pearson r, or `None` where it is undefined.
pub fn correlation(x: ArrayView1<f64>, y: ArrayView1<f64>) -> Result<Option<f64>> {
    if x.len() < 2 {
        return Ok(None);
    }
    match pearson(&x.to_vec(), &y.to_vec()) {
        Ok(r) => Ok(Some(r)),
        Err(Error::Degenerate(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Trains on each fold's complement and scores the fold.
pub fn cross_validate(
    learner: &dyn Learner,
    data: &AlignedLexicon,
    folds: &FoldSplit,
    fold_seed: &(dyn Fn(usize) -> u64 + Sync),
) -> Result<CvResult> {
    if folds.n_items != data.len() {
        return Err(Error::contract(format!(
            "fold split covers {} items but the data has {}",
            folds.n_items,
            data.len()
        )));
    }
    let t = data.target_format().dim();
    let mut fold_r = vec![Vec::with_capacity(folds.k_folds); t];
    let mut pooled = Array2::<f64>::zeros((data.len(), t));
    for fold in 0..folds.k_folds {
        let test_idx = folds.test_indices(fold);
        let train = data.select(&folds.train_indices(fold));
        let test = data.select(&test_idx);
        let model = learner.fit(&train, fold_seed(fold))?;
        let pred = model.predict(test.source().view())?;
        if pred.dim() != test.target().dim() {
            return Err(Error::contract(format!(
                "{} predicted shape {:?}, expected {:?}",
                learner.name(),
                pred.dim(),
                test.target().dim()
            )));
        }
        for (j, column) in fold_r.iter_mut().enumerate() {
            column.push(correlation(pred.column(j), test.target().column(j))?);
        }
        for (row, &i) in pred.axis_iter(Axis(0)).zip(&test_idx) {
            pooled.row_mut(i).assign(&row);
        }
    }
    let pooled_r = (0..t)
        .map(|j| correlation(pooled.column(j), data.target().column(j)))
        .collect::<Result<_>>()?;
    Ok(CvResult { fold_r, pooled_r })
}
