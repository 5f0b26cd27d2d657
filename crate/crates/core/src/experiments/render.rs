//! Report documents: pretty JSON with every per-fold number, and TSV
//! summary tables.

use serde::Serialize;

use super::protocols::AblationReport;
use super::report::EvalReport;
use crate::error::{Error, Result};
use crate::util::format_fixed3;

/// Notes written into every monolingual document.
pub const T_TEST_SERIES: &str = "per-fold format-average r";
pub const HEADLINE_R: &str = "mean of per-fold r; pooled_r correlates all out-of-fold predictions";

#[derive(Clone, Debug, Serialize)]
pub struct MonolingualDocument<'a> {
    pub protocol: &'static str,
    pub seed: u64,
    pub k_folds: usize,
    pub t_test_series: &'static str,
    pub headline_r: &'static str,
    pub reports: &'a [EvalReport],
}

#[derive(Clone, Debug, Serialize)]
pub struct CrosslingualDocument<'a> {
    pub protocol: &'static str,
    pub seed: u64,
    pub reports: &'a [EvalReport],
}

#[derive(Clone, Debug, Serialize)]
pub struct AblationDocument<'a> {
    pub protocol: &'static str,
    pub seed: u64,
    pub k_folds: usize,
    pub reports: &'a [AblationReport],
}

pub fn to_json<T: Serialize>(doc: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(doc).map_err(|e| Error::Model(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn cell(r: Option<f64>) -> String {
    r.map_or_else(|| "NA".to_string(), format_fixed3)
}

/// One row per dataset and direction, one column per model holding the
/// format-average r. The best system carries its significance stars and
/// is named in the last column.
pub fn monolingual_table(reports: &[EvalReport]) -> String {
    let mut models: Vec<&str> = Vec::new();
    for r in reports {
        if !models.contains(&r.model.as_str()) {
            models.push(&r.model);
        }
    }
    let mut out = format!("dataset\tdirection\t{}\tbest\n", models.join("\t"));
    let mut keys: Vec<(&str, String)> = Vec::new();
    for r in reports {
        let key = (r.dataset_id.as_str(), r.direction.to_string());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    for (dataset, direction) in keys {
        let group: Vec<&EvalReport> = reports
            .iter()
            .filter(|r| r.dataset_id == dataset && r.direction.as_str() == direction)
            .collect();
        let mut row = vec![dataset.to_string(), direction.clone()];
        for m in &models {
            row.push(match group.iter().find(|r| r.model == *m) {
                Some(r) => {
                    let stars = r
                        .significance
                        .as_ref()
                        .filter(|s| s.stars > 0)
                        .map_or("", |s| s.label.as_str());
                    format!("{}{stars}", cell(r.average_r))
                }
                None => String::new(),
            });
        }
        let best = group.iter().find(|r| r.rank == 1).map_or("", |r| r.model.as_str());
        row.push(best.to_string());
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    out
}

/// Per-variable r for single-evaluation protocols.
pub fn variable_table(reports: &[EvalReport]) -> String {
    let mut out = String::from("dataset\tdirection\tmodel\taverage_r\tvariables\n");
    for r in reports {
        let vars: Vec<String> = r
            .variables
            .iter()
            .zip(&r.mean_r)
            .map(|(v, x)| format!("{v}={}", cell(*x)))
            .collect();
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            r.dataset_id,
            r.direction,
            r.model,
            cell(r.average_r),
            vars.join(",")
        ));
    }
    out
}

pub fn ablation_table(reports: &[AblationReport]) -> String {
    let mut out = String::from("direction\tvariable\tdrop\n");
    for rep in reports {
        for (v, d) in rep.variables.iter().zip(&rep.drops) {
            out.push_str(&format!("{}\t{v}\t{}\n", rep.direction, format_fixed3(*d)));
        }
    }
    out
}
