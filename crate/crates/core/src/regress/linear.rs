//! Multi-output ordinary least squares.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::EmotionFormat;
use crate::lexicon::AlignedLexicon;

/// Affine map `W x + b` with `W` of shape `|t| x |s|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub source_format: EmotionFormat,
    pub target_format: EmotionFormat,
}

pub fn fit_linear(train: &AlignedLexicon) -> Result<LinearModel> {
    let (weights, bias) = least_squares(train.source().view(), train.target().view())?;
    Ok(LinearModel {
        weights,
        bias,
        source_format: train.source_format().clone(),
        target_format: train.target_format().clone(),
    })
}

/// Solves the bias-augmented normal equations once per target column.
///
/// Cholesky is tried first; singular or indefinite Gram matrices fall back
/// to the Moore-Penrose pseudo-inverse.
pub fn least_squares(x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<(Array2<f64>, Array1<f64>)> {
    let (n, s) = x.dim();
    if n == 0 {
        return Err(Error::contract("cannot fit on an empty training set"));
    }
    if y.nrows() != n {
        return Err(Error::contract(format!(
            "{n} source rows but {} target rows",
            y.nrows()
        )));
    }
    let t = y.ncols();
    let p = s + 1;
    // Gram matrix of [x | 1] and its products with every target column.
    let mut gram = DMatrix::<f64>::zeros(p, p);
    let mut rhs = DMatrix::<f64>::zeros(p, t);
    let mut row = vec![0.0; p];
    for i in 0..n {
        for j in 0..s {
            row[j] = x[[i, j]];
        }
        row[s] = 1.0;
        for a in 0..p {
            for b in a..p {
                gram[(a, b)] += row[a] * row[b];
            }
            for c in 0..t {
                rhs[(a, c)] += row[a] * y[[i, c]];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            gram[(a, b)] = gram[(b, a)];
        }
    }

    let solution = match gram.clone().cholesky() {
        Some(chol) => chol.solve(&rhs),
        None => {
            log::warn!("normal equations are singular; using the pseudo-inverse");
            let pinv = gram
                .pseudo_inverse(1e-12)
                .map_err(|e| Error::Degenerate(format!("pseudo-inverse failed: {e}")))?;
            pinv * rhs
        }
    };
    let mut weights = Array2::zeros((t, s));
    let mut bias = Array1::zeros(t);
    for c in 0..t {
        let beta: DVector<f64> = solution.column(c).into_owned();
        for j in 0..s {
            weights[[c, j]] = beta[j];
        }
        bias[c] = beta[s];
    }
    Ok((weights, bias))
}

impl LinearModel {
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.weights.ncols() {
            return Err(Error::contract(format!(
                "input has {} columns, model expects {}",
                x.ncols(),
                self.weights.ncols()
            )));
        }
        let (n, t) = (x.nrows(), self.weights.nrows());
        let mut out = Array2::zeros((n, t));
        for i in 0..n {
            for c in 0..t {
                let mut acc = self.bias[c];
                for j in 0..x.ncols() {
                    acc += self.weights[[c, j]] * x[[i, j]];
                }
                out[[i, c]] = acc;
            }
        }
        Ok(out)
    }
}
