use std::collections::HashSet;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::{correlation, cross_validate, CvResult};
use super::folds::{make_folds, FoldSplit, DEFAULT_FOLDS};
use super::report::{compare_to_shr, significance, Direction, EvalReport};
use crate::error::{Error, Result};
use crate::format::DOMINANCE;
use crate::lexicon::AlignedLexicon;
use crate::regress::{Learner, ModelSpec};
use crate::stats::ReliabilityRecord;
use crate::util::derive_seed;

/// An aligned bi-representational dataset, stored in either orientation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub id: String,
    pub data: AlignedLexicon,
}

impl Dataset {
    pub fn new(id: impl Into<String>, data: AlignedLexicon) -> Self {
        Self { id: id.into(), data }
    }

    pub fn language(&self) -> &str {
        self.data.language()
    }

    /// The data with the source side matching `direction`.
    pub fn oriented(&self, direction: Direction) -> Result<AlignedLexicon> {
        let want = direction.source_kind();
        if self.data.source_format().kind() == want {
            Ok(self.data.clone())
        } else if self.data.target_format().kind() == want {
            Ok(self.data.swap())
        } else {
            Err(Error::config(format!(
                "dataset {} has no {:?} side for {direction}",
                self.id, want
            )))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvOptions {
    pub seed: u64,
    pub k_folds: usize,
}

impl CvOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            k_folds: DEFAULT_FOLDS,
        }
    }
}

/// Split shared by every model and both directions of one dataset.
pub fn dataset_folds(dataset: &Dataset, opts: &CvOptions) -> Result<FoldSplit> {
    make_folds(
        dataset.data.len(),
        opts.k_folds,
        derive_seed(opts.seed, &[&dataset.id, "folds"]),
    )
}

pub fn cell_seed(base: u64, dataset_id: &str, direction: Direction, model: &str, fold: usize) -> u64 {
    derive_seed(base, &[dataset_id, direction.as_str(), model, &fold.to_string()])
}

fn check_unique<'a>(what: &str, names: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(Error::config(format!("{what} {n} is listed twice")));
        }
    }
    Ok(())
}

/// Sorts by format-average r (undefined last, input order on ties), sets
/// ranks, and tests the best system against the runner-up.
fn rank_group(group: &mut [EvalReport]) {
    let mut order: Vec<usize> = (0..group.len()).collect();
    order.sort_by(|&a, &b| {
        let key = |r: &EvalReport| r.average_r.unwrap_or(f64::NEG_INFINITY);
        key(&group[b]).total_cmp(&key(&group[a]))
    });
    for (rank, &i) in order.iter().enumerate() {
        group[i].rank = rank + 1;
    }
    if let [best, second, ..] = order[..] {
        let sig = significance(&group[best], &group[second]);
        group[best].significance = Some(sig);
    }
}

/// Cross-validates every learner on every dataset in both directions.
/// Output order is dataset, then direction, then learner.
pub fn run_monolingual(
    datasets: &[Dataset],
    learners: &[&dyn Learner],
    records: &[ReliabilityRecord],
    opts: &CvOptions,
) -> Result<Vec<EvalReport>> {
    check_unique("dataset", datasets.iter().map(|d| d.id.as_str()))?;
    check_unique("model", learners.iter().map(|l| l.name()))?;
    let mut groups = Vec::new();
    for d in datasets {
        let folds = dataset_folds(d, opts)?;
        for direction in Direction::BOTH {
            groups.push((d, direction, d.oriented(direction)?, folds.clone()));
        }
    }
    let cells: Vec<(usize, usize)> = (0..groups.len())
        .flat_map(|g| (0..learners.len()).map(move |l| (g, l)))
        .collect();
    let reports = cells
        .par_iter()
        .map(|&(g, l)| {
            let (d, direction, data, folds) = &groups[g];
            let learner = learners[l];
            let seed = |fold: usize| cell_seed(opts.seed, &d.id, *direction, learner.name(), fold);
            let cv = cross_validate(learner, data, folds, &seed)?;
            Ok(EvalReport::new(&d.id, *direction, learner.name(), data.target_format(), cv))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(reports.len());
    for mut group in chunk(reports, learners.len().max(1)) {
        rank_group(&mut group);
        out.extend(group.into_iter().map(|r| compare_to_shr(r, records)));
    }
    Ok(out)
}

fn chunk<T>(items: Vec<T>, size: usize) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    let mut it = items.into_iter().peekable();
    while it.peek().is_some() {
        out.push(it.by_ref().take(size).collect());
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationDataset {
    pub dataset_id: String,
    pub full_r: f64,
    /// Format-average r with each source variable left out, in `variables` order.
    pub ablated_r: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub direction: Direction,
    pub model: String,
    /// Source variables, each ablated in turn.
    pub variables: Vec<String>,
    /// Full-model average r minus ablated average r, averaged over datasets.
    pub drops: Vec<f64>,
    pub datasets: Vec<AblationDataset>,
}

/// Leave-one-source-variable-out study with linear regression on the
/// monolingual folds.
pub fn run_ablation(datasets: &[Dataset], direction: Direction, opts: &CvOptions) -> Result<AblationReport> {
    let first = datasets
        .first()
        .ok_or_else(|| Error::config("ablation needs at least one dataset"))?;
    let variables = first.oriented(direction)?.source_format().variables().to_vec();
    let lr = ModelSpec::linear();
    let per_dataset = datasets
        .par_iter()
        .map(|d| {
            let data = d.oriented(direction)?;
            let has_dominance = data.source_format().position(DOMINANCE).is_some()
                || data.target_format().position(DOMINANCE).is_some();
            if !has_dominance {
                return Err(Error::config(format!(
                    "ablation dataset {} has no {DOMINANCE} ratings",
                    d.id
                )));
            }
            if data.source_format().variables() != variables.as_slice() {
                return Err(Error::config(format!(
                    "ablation dataset {} has source variables {:?}, expected {:?}",
                    d.id,
                    data.source_format().variables(),
                    variables
                )));
            }
            let folds = dataset_folds(d, opts)?;
            let average = |data: &AlignedLexicon, label: &str| -> Result<f64> {
                let seed = |fold: usize| cell_seed(opts.seed, &d.id, direction, label, fold);
                let cv = cross_validate(&lr, data, &folds, &seed)?;
                EvalReport::new(&d.id, direction, label, data.target_format(), cv)
                    .average_r
                    .ok_or_else(|| Error::Degenerate(format!("dataset {} ({label}) has no defined r", d.id)))
            };
            let full_r = average(&data, "full")?;
            let ablated_r = variables
                .iter()
                .map(|v| {
                    let keep: Vec<&str> = variables.iter().filter(|x| *x != v).map(String::as_str).collect();
                    average(&data.project(&keep)?, &format!("without {v}"))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(AblationDataset {
                dataset_id: d.id.clone(),
                full_r,
                ablated_r,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let drops = (0..variables.len())
        .map(|j| per_dataset.iter().map(|d| d.full_r - d.ablated_r[j]).sum::<f64>() / per_dataset.len() as f64)
        .collect();
    Ok(AblationReport {
        direction,
        model: lr.name,
        variables,
        drops,
        datasets: per_dataset,
    })
}

/// Removes dominance from whichever side carries it.
pub fn without_dominance(data: &AlignedLexicon) -> Result<AlignedLexicon> {
    for format in [data.source_format(), data.target_format()] {
        if format.position(DOMINANCE).is_some() {
            let keep: Vec<&str> = format
                .variables()
                .iter()
                .map(String::as_str)
                .filter(|v| *v != DOMINANCE)
                .collect();
            return data.project(&keep);
        }
    }
    Ok(data.clone())
}

/// Training data for evaluating `target`: every other-language dataset,
/// dominance removed, oriented to `direction`, concatenated in input order.
pub fn crosslingual_training(datasets: &[Dataset], target: &Dataset, direction: Direction) -> Result<AlignedLexicon> {
    let parts = datasets
        .iter()
        .filter(|d| d.language() != target.language())
        .map(|d| without_dominance(&d.oriented(direction)?))
        .collect::<Result<Vec<_>>>()?;
    if parts.is_empty() {
        return Err(Error::config(format!(
            "no training data outside language {} for dataset {}",
            target.language(),
            target.id
        )));
    }
    let train = AlignedLexicon::concat(&parts)?;
    if train.row_languages().iter().any(|l| l == target.language()) {
        return Err(Error::contract(format!(
            "cross-lingual training for {} contains {} rows",
            target.id,
            target.language()
        )));
    }
    Ok(train)
}

/// Trains once per dataset and direction on out-of-language data and
/// evaluates on the whole dataset.
pub fn run_crosslingual(
    datasets: &[Dataset],
    learner: &dyn Learner,
    records: &[ReliabilityRecord],
    seed: u64,
) -> Result<Vec<EvalReport>> {
    check_unique("dataset", datasets.iter().map(|d| d.id.as_str()))?;
    let languages: HashSet<&str> = datasets.iter().map(|d| d.language()).collect();
    if languages.len() < 2 {
        return Err(Error::config("cross-lingual evaluation needs at least two languages"));
    }
    let cells: Vec<(&Dataset, Direction)> = datasets
        .iter()
        .flat_map(|d| Direction::BOTH.map(|dir| (d, dir)))
        .collect();
    cells
        .par_iter()
        .map(|&(d, direction)| {
            let train = crosslingual_training(datasets, d, direction)?;
            let test = without_dominance(&d.oriented(direction)?)?;
            let model = learner.fit(&train, cell_seed(seed, &d.id, direction, learner.name(), 0))?;
            let pred: Array2<f64> = model.predict(test.source().view())?;
            if pred.dim() != test.target().dim() {
                return Err(Error::contract(format!("{} predicted the wrong shape", learner.name())));
            }
            let r = (0..pred.ncols())
                .map(|j| correlation(pred.column(j), test.target().column(j)))
                .collect::<Result<Vec<_>>>()?;
            let cv = CvResult {
                fold_r: r.iter().map(|&x| vec![x]).collect(),
                pooled_r: r,
            };
            let mut report = EvalReport::new(&d.id, direction, learner.name(), test.target_format(), cv);
            report.rank = 1;
            Ok(compare_to_shr(report, records))
        })
        .collect()
}
