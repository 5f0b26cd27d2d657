//! Lexicon construction: train a mapping on aligned data, apply it to a
//! mono-format lexicon, drop words that are already rated, and export.

use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::{AlignedLexicon, Lexicon};
use crate::regress::ModelSpec;
use crate::util::{format_fixed3, sha256_hex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BuildMode {
    Monolingual,
    Crosslingual,
}

#[derive(Clone, Debug)]
pub struct LexiconBuildJob {
    pub mode: BuildMode,
    /// Lexicon to be translated into the training target format.
    pub source_lexicon: Lexicon,
    pub training: AlignedLexicon,
    /// Dataset ids that make up `training`, for the manifest.
    pub training_ids: Vec<String>,
    pub model: ModelSpec,
    /// Lexicons whose words already have ratings in the target format.
    pub exclusion_sets: Vec<Lexicon>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcludedCount {
    pub source_id: String,
    /// Source words found in this exclusion set.
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildManifest {
    pub mode: BuildMode,
    pub training_ids: Vec<String>,
    pub training_size: usize,
    pub source_size: usize,
    pub excluded_counts: Vec<ExcludedCount>,
    /// Source words found in at least one exclusion set.
    pub excluded_total: usize,
    pub output_count: usize,
    pub clamped_values: usize,
    pub model_config: ModelSpec,
    pub seed: u64,
    pub input_digests: IndexMap<String, String>,
    pub output_digest: String,
}

fn json_digest<T: Serialize>(value: &T) -> Result<String> {
    let bytes = serde_json::to_vec(value).map_err(|e| Error::Model(e.to_string()))?;
    Ok(sha256_hex(&bytes))
}

/// Brings the source lexicon onto the training source variables, projecting
/// away extra variables (such as dominance for cross-lingual models).
fn matching_source(job: &LexiconBuildJob) -> Result<Lexicon> {
    let want = job.training.source_format();
    let have = job.source_lexicon.format();
    let lex = if have.same_layout(want) {
        job.source_lexicon.clone()
    } else {
        job.source_lexicon.project(want.variables()).map_err(|_| {
            Error::config(format!(
                "source lexicon format {} does not provide the training variables of {}",
                have.name(),
                want.name()
            ))
        })?
    };
    let f = lex.format();
    if f.scale_low() != want.scale_low() || f.scale_high() != want.scale_high() {
        return Err(Error::config(format!(
            "source lexicon is on [{}, {}] but the model was trained on [{}, {}]",
            f.scale_low(),
            f.scale_high(),
            want.scale_low(),
            want.scale_high()
        )));
    }
    Ok(lex)
}

pub fn build_lexicon(job: &LexiconBuildJob) -> Result<(Lexicon, BuildManifest)> {
    let source = matching_source(job)?;
    let excluded_counts = job
        .exclusion_sets
        .iter()
        .map(|set| ExcludedCount {
            source_id: set.source_id().to_string(),
            count: source.words().filter(|w| set.contains(w)).count(),
        })
        .collect();
    let keep: Vec<(&String, &Vec<f64>)> = source
        .entries()
        .iter()
        .filter(|(w, _)| !job.exclusion_sets.iter().any(|set| set.contains(w)))
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptyOutput);
    }
    let excluded_total = source.len() - keep.len();
    let model = job.model.fit(&job.training, job.seed)?;
    let x = Array2::from_shape_fn((keep.len(), source.format().dim()), |(i, j)| keep[i].1[j]);
    let pred = model.predict(x.view())?;
    let target = job.training.target_format();
    let mut clamped_values = 0;
    let entries: IndexMap<String, Vec<f64>> = keep
        .iter()
        .zip(pred.rows())
        .map(|((w, _), row)| {
            let values = row
                .iter()
                .map(|&v| {
                    let c = target.clamp(v);
                    if c != v {
                        clamped_values += 1;
                    }
                    c
                })
                .collect();
            ((*w).clone(), values)
        })
        .collect();
    if clamped_values > 0 {
        log::info!("clamped {clamped_values} predicted values to [{}, {}]", target.scale_low(), target.scale_high());
    }
    let lexicon = Lexicon::new(
        target.clone(),
        entries,
        source.language(),
        format!("{}->{}", source.source_id(), target.name()),
    )?;
    let mut input_digests = IndexMap::new();
    input_digests.insert(
        format!("source:{}", job.source_lexicon.source_id()),
        sha256_hex(render_lexicon(&job.source_lexicon).as_bytes()),
    );
    input_digests.insert("training".to_string(), json_digest(&job.training)?);
    for set in &job.exclusion_sets {
        input_digests.insert(
            format!("exclusion:{}", set.source_id()),
            sha256_hex(render_lexicon(set).as_bytes()),
        );
    }
    let manifest = BuildManifest {
        mode: job.mode,
        training_ids: job.training_ids.clone(),
        training_size: job.training.len(),
        source_size: source.len(),
        excluded_counts,
        excluded_total,
        output_count: lexicon.len(),
        clamped_values,
        model_config: job.model.clone(),
        seed: job.seed,
        input_digests,
        output_digest: sha256_hex(render_lexicon(&lexicon).as_bytes()),
    };
    Ok((lexicon, manifest))
}

/// TSV with a `word` header column, rows sorted by word, three decimals.
pub fn render_lexicon(lex: &Lexicon) -> String {
    let mut out = format!("word\t{}\n", lex.format().variables().join("\t"));
    let mut rows: Vec<(&String, &Vec<f64>)> = lex.entries().iter().collect();
    rows.sort_by(|a, b| a.0.cmp(b.0));
    for (w, values) in rows {
        out.push_str(w);
        for &v in values {
            out.push('\t');
            out.push_str(&format_fixed3(v));
        }
        out.push('\n');
    }
    out
}

pub fn write_lexicon(lex: &Lexicon, path: &Path) -> Result<()> {
    fs::write(path, render_lexicon(lex)).map_err(|e| Error::io(path, e))
}
