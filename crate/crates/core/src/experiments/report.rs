use std::fmt;

use serde::{Deserialize, Serialize};

use super::cv::CvResult;
use crate::error::Error;
use crate::format::{EmotionFormat, FormatKind};
use crate::stats::{mean, paired_t_test, star_label, ReliabilityRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Cat2Dim,
    Dim2Cat,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Cat2Dim, Direction::Dim2Cat];

    /// Direction whose source side has `source`'s kind.
    pub fn from_source(source: &EmotionFormat) -> Direction {
        match source.kind() {
            FormatKind::Categorical => Direction::Cat2Dim,
            FormatKind::Dimensional => Direction::Dim2Cat,
        }
    }

    pub fn source_kind(self) -> FormatKind {
        match self {
            Direction::Cat2Dim => FormatKind::Categorical,
            Direction::Dim2Cat => FormatKind::Dimensional,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Cat2Dim => "cat2dim",
            Direction::Dim2Cat => "dim2cat",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShrFlag {
    Above,
    Below,
    Unreported,
}

/// Paired t-test of this system against the runner-up.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Significance {
    pub competitor: String,
    pub t: Option<f64>,
    pub df: Option<usize>,
    pub p: Option<f64>,
    pub stars: u8,
    /// `*`, `**`, `***` or `n.s.`.
    pub label: String,
    /// Why no test statistic is available, when it is not.
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegenerateFold {
    pub variable: String,
    pub fold: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset_id: String,
    pub direction: Direction,
    pub model: String,
    pub variables: Vec<String>,
    /// `fold_r[variable][fold]`; `None` marks a degenerate fold.
    pub fold_r: Vec<Vec<Option<f64>>>,
    /// Mean over non-degenerate folds, per variable.
    pub mean_r: Vec<Option<f64>>,
    /// Mean of `mean_r` over variables.
    pub average_r: Option<f64>,
    pub pooled_r: Vec<Option<f64>>,
    pub degenerate_folds: Vec<DegenerateFold>,
    /// 1 for the best system on this dataset and direction.
    pub rank: usize,
    pub significance: Option<Significance>,
    pub shr_flags: Vec<ShrFlag>,
}

fn mean_of_defined(values: &[Option<f64>]) -> Option<f64> {
    let defined: Vec<f64> = values.iter().flatten().copied().collect();
    (!defined.is_empty()).then(|| mean(&defined))
}

impl EvalReport {
    pub fn new(
        dataset_id: &str,
        direction: Direction,
        model: &str,
        target: &EmotionFormat,
        cv: CvResult,
    ) -> EvalReport {
        let variables = target.variables().to_vec();
        let mean_r: Vec<Option<f64>> = cv.fold_r.iter().map(|f| mean_of_defined(f)).collect();
        let average_r = mean_r
            .iter()
            .copied()
            .collect::<Option<Vec<f64>>>()
            .map(|m| mean(&m));
        let degenerate_folds = cv
            .fold_r
            .iter()
            .zip(&variables)
            .flat_map(|(folds, v)| {
                folds
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| r.is_none())
                    .map(|(fold, _)| DegenerateFold {
                        variable: v.clone(),
                        fold,
                    })
            })
            .collect::<Vec<_>>();
        for d in &degenerate_folds {
            log::warn!(
                "{dataset_id} {direction} {model}: fold {} is degenerate for {} and is excluded",
                d.fold,
                d.variable
            );
        }
        let shr_flags = vec![ShrFlag::Unreported; variables.len()];
        EvalReport {
            dataset_id: dataset_id.to_string(),
            direction,
            model: model.to_string(),
            variables,
            fold_r: cv.fold_r,
            mean_r,
            average_r,
            pooled_r: cv.pooled_r,
            degenerate_folds,
            rank: 0,
            significance: None,
            shr_flags,
        }
    }

    pub fn k_folds(&self) -> usize {
        self.fold_r.first().map_or(0, Vec::len)
    }

    /// Format-average r of every fold; `None` where any variable is
    /// degenerate in that fold.
    pub fn fold_averages(&self) -> Vec<Option<f64>> {
        (0..self.k_folds())
            .map(|f| {
                self.fold_r
                    .iter()
                    .map(|v| v[f])
                    .collect::<Option<Vec<f64>>>()
                    .map(|rs| mean(&rs))
            })
            .collect()
    }
}

/// Paired two-tailed t-test over the folds where both systems are defined.
pub fn significance(best: &EvalReport, runner_up: &EvalReport) -> Significance {
    let (a, b): (Vec<f64>, Vec<f64>) = best
        .fold_averages()
        .into_iter()
        .zip(runner_up.fold_averages())
        .filter_map(|(a, b)| Some((a?, b?)))
        .unzip();
    let not_significant = |note: String| Significance {
        competitor: runner_up.model.clone(),
        t: None,
        df: None,
        p: None,
        stars: 0,
        label: "n.s.".to_string(),
        note: Some(note),
    };
    match paired_t_test(&a, &b) {
        Ok(test) => Significance {
            competitor: runner_up.model.clone(),
            t: Some(test.t),
            df: Some(test.df),
            p: Some(test.p),
            stars: test.stars,
            label: if test.stars == 0 {
                "n.s.".to_string()
            } else {
                star_label(test.stars).to_string()
            },
            note: None,
        },
        Err(Error::Degenerate(m)) | Err(Error::Contract(m)) => not_significant(m),
        Err(e) => not_significant(e.to_string()),
    }
}

/// Flags each variable as above (strictly) or below the normalized human
/// split-half reliability of the dataset, or unreported.
pub fn compare_to_shr(mut report: EvalReport, records: &[ReliabilityRecord]) -> EvalReport {
    report.shr_flags = report
        .variables
        .iter()
        .zip(&report.mean_r)
        .map(|(v, r)| {
            let shr = records
                .iter()
                .find(|rec| rec.dataset_id == report.dataset_id && &rec.variable == v)
                .and_then(|rec| rec.normalized_r);
            match (shr, r) {
                (None, _) => ShrFlag::Unreported,
                (Some(h), Some(r)) if *r > h => ShrFlag::Above,
                (Some(_), _) => ShrFlag::Below,
            }
        })
        .collect();
    report
}
