//! Evaluation protocols: folds, cross-validation, monolingual comparison
//! with significance tests, ablation, cross-lingual transfer and report
//! rendering.

pub mod cv;
pub mod folds;
pub mod protocols;
pub mod render;
pub mod report;

pub use cv::{correlation, cross_validate, CvResult};
pub use folds::{make_folds, FoldSplit, DEFAULT_FOLDS};
pub use protocols::{
    crosslingual_training, dataset_folds, run_ablation, run_crosslingual, run_monolingual, without_dominance,
    AblationDataset, AblationReport, CvOptions, Dataset,
};
pub use report::{compare_to_shr, significance, Direction, EvalReport, ShrFlag, Significance};
