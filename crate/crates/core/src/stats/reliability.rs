//! Split-half reliability and the Spearman-Brown adjustment used to put
//! published reliabilities on a common participant count.

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::pearson;
use crate::error::{Error, Result};
use crate::util::format_fixed3;

/// Participant count that reliabilities are normalized to.
pub const NORMALIZED_PARTICIPANTS: u32 = 20;

/// Spearman-Brown estimate of reliability when the rater pool grows by `k`.
pub fn sba_adjust(r: f64, k: f64) -> Result<f64> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Domain(format!("reliability {r} outside (0, 1]")));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Domain(format!("adjustment factor {k} must be positive")));
    }
    Ok(k * r / (1.0 + (k - 1.0) * r))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityRecord {
    pub dataset_id: String,
    pub variable: String,
    pub reported_r: f64,
    pub n_participants: u32,
    pub sba_already_applied: bool,
    pub normalized_r: Option<f64>,
}

/// Rescales a reported split-half reliability to `n_star` participants.
///
/// Reported values that were already Spearman-Brown adjusted describe the
/// full pool of `N` raters, so they are first taken back to halves of size
/// `N` and the factor becomes `n_star / (2 N)`.
pub fn normalize_shr(rec: &ReliabilityRecord, n_star: u32) -> Result<ReliabilityRecord> {
    if rec.n_participants == 0 {
        return Err(Error::contract(format!(
            "{}/{}: participant count must be positive",
            rec.dataset_id, rec.variable
        )));
    }
    let n = rec.n_participants as f64;
    let k = if rec.sba_already_applied {
        n_star as f64 / (2.0 * n)
    } else {
        n_star as f64 / n
    };
    let normalized = sba_adjust(rec.reported_r, k)?;
    Ok(ReliabilityRecord {
        normalized_r: Some(normalized),
        ..rec.clone()
    })
}

/// Individual ratings of one variable: one row per item, one column per rater.
#[derive(Clone, Debug, PartialEq)]
pub struct RaterMatrix {
    pub items: Vec<String>,
    pub ratings: Array2<f64>,
    pub scale: (f64, f64),
}

impl RaterMatrix {
    pub fn new(items: Vec<String>, ratings: Array2<f64>, scale: (f64, f64)) -> Result<Self> {
        if ratings.nrows() != items.len() {
            return Err(Error::contract(format!(
                "{} items but {} rating rows",
                items.len(),
                ratings.nrows()
            )));
        }
        if ratings.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("rater matrix must be complete and finite"));
        }
        Ok(Self {
            items,
            ratings,
            scale,
        })
    }

    pub fn n_raters(&self) -> usize {
        self.ratings.ncols()
    }

    pub fn n_items(&self) -> usize {
        self.ratings.nrows()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitHalf {
    pub reliability: f64,
    pub iterations_used: usize,
    pub iterations_skipped: usize,
}

/// Average correlation between the item means of two random rater halves.
///
/// Each iteration shuffles the raters and splits them into groups of
/// `floor(R/2)` and `ceil(R/2)`. Iterations whose correlation is degenerate
/// are skipped and counted.
pub fn split_half_reliability(m: &RaterMatrix, iterations: usize, seed: u64) -> Result<SplitHalf> {
    let raters = m.n_raters();
    if raters < 2 {
        return Err(Error::contract("split-half reliability needs at least two raters"));
    }
    if m.n_items() < 3 {
        return Err(Error::contract("split-half reliability needs at least three items"));
    }
    if iterations == 0 {
        return Err(Error::contract("iterations must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..raters).collect();
    let half = raters / 2;
    let (mut total, mut used, mut skipped) = (0.0, 0, 0);
    for _ in 0..iterations {
        order.shuffle(&mut rng);
        let a = m.ratings.select(Axis(1), &order[..half]);
        let b = m.ratings.select(Axis(1), &order[half..]);
        let mean_a = a.mean_axis(Axis(1)).expect("non-empty half");
        let mean_b = b.mean_axis(Axis(1)).expect("non-empty half");
        match pearson(mean_a.as_slice().unwrap(), mean_b.as_slice().unwrap()) {
            Ok(r) => {
                total += r;
                used += 1;
            }
            Err(Error::Degenerate(_)) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    if used == 0 {
        return Err(Error::Degenerate(format!(
            "all {iterations} split-half iterations were degenerate"
        )));
    }
    Ok(SplitHalf {
        reliability: total / used as f64,
        iterations_used: used,
        iterations_skipped: skipped,
    })
}

/// Synthetic ratings: each item has a normally distributed true score and
/// every rater adds independent normal noise.
pub fn simulate_raters(
    n_items: usize,
    n_raters: usize,
    item_sd: f64,
    noise_sd: f64,
    seed: u64,
) -> Result<RaterMatrix> {
    let item_dist = Normal::new(0.0, item_sd).map_err(|e| Error::contract(e.to_string()))?;
    let noise_dist = Normal::new(0.0, noise_sd).map_err(|e| Error::contract(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ratings = Array2::zeros((n_items, n_raters));
    for mut row in ratings.rows_mut() {
        let truth = item_dist.sample(&mut rng);
        for cell in row.iter_mut() {
            *cell = truth + noise_dist.sample(&mut rng);
        }
    }
    let items = (0..n_items).map(|i| format!("item{i}")).collect();
    RaterMatrix::new(items, ratings, (f64::NEG_INFINITY, f64::INFINITY))
}

const RELIABILITY_HEADER: [&str; 5] = [
    "dataset",
    "variable",
    "reported_r",
    "n_participants",
    "sba_applied",
];

/// Reads `dataset, variable, reported_r, n_participants, sba_applied` rows.
/// A header row is optional; an existing `normalized_r` column is ignored.
pub fn parse_reliability_records(text: &str) -> Result<Vec<ReliabilityRecord>> {
    let text = text.replace("\r\n", "\n");
    let mut out = Vec::new();
    for (i, line) in text.split('\n').enumerate() {
        let row = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').map(str::trim).collect();
        if i == 0 && f.first() == Some(&"dataset") {
            continue;
        }
        if f.len() < 5 {
            return Err(Error::Parse {
                row,
                message: format!("expected 5 fields, found {}", f.len()),
            });
        }
        let parse_err = |what: &str| Error::Parse {
            row,
            message: format!("invalid {what}"),
        };
        let reported_r: f64 = f[2].parse().map_err(|_| parse_err("reported_r"))?;
        if !(reported_r > 0.0 && reported_r <= 1.0) {
            return Err(Error::Validation {
                row,
                word: format!("{}/{}", f[0], f[1]),
                message: format!("reported_r {reported_r} outside (0, 1]"),
            });
        }
        let n_participants: u32 = f[3].parse().map_err(|_| parse_err("n_participants"))?;
        if n_participants == 0 {
            return Err(Error::Validation {
                row,
                word: format!("{}/{}", f[0], f[1]),
                message: "n_participants must be positive".into(),
            });
        }
        let sba_already_applied = match f[4].to_ascii_lowercase().as_str() {
            "true" => true,
            "false" => false,
            _ => return Err(parse_err("sba_applied (expected true|false)")),
        };
        out.push(ReliabilityRecord {
            dataset_id: f[0].to_string(),
            variable: f[1].to_string(),
            reported_r,
            n_participants,
            sba_already_applied,
            normalized_r: None,
        });
    }
    Ok(out)
}

/// Writes records with an appended `normalized_r` column (3 decimals).
pub fn format_reliability_records(records: &[ReliabilityRecord]) -> String {
    let mut s = RELIABILITY_HEADER.join("\t");
    s.push_str("\tnormalized_r\n");
    for r in records {
        let normalized = r.normalized_r.map(format_fixed3).unwrap_or_default();
        s.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            r.dataset_id, r.variable, r.reported_r, r.n_participants, r.sba_already_applied, normalized
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn record(r: f64, n: u32, sba: bool) -> ReliabilityRecord {
        ReliabilityRecord {
            dataset_id: "d".into(),
            variable: "valence".into(),
            reported_r: r,
            n_participants: n,
            sba_already_applied: sba,
            normalized_r: None,
        }
    }

    #[test]
    fn sba_examples() {
        assert_eq!(sba_adjust(1.0, 3.0).unwrap(), 1.0);
        assert!((sba_adjust(0.5, 2.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((sba_adjust(0.8, 0.25).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(sba_adjust(0.0, 2.0), Err(Error::Domain(_))));
        assert!(matches!(sba_adjust(-0.2, 2.0), Err(Error::Domain(_))));
        assert!(matches!(sba_adjust(0.5, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn normalization_examples() {
        let a = normalize_shr(&record(0.8, 40, true), 20).unwrap();
        assert!((a.normalized_r.unwrap() - 0.5).abs() < 1e-15);
        let b = normalize_shr(&record(0.7, 10, false), 20).unwrap();
        assert!((b.normalized_r.unwrap() - 1.4 / 1.7).abs() < 1e-15);
        let c = normalize_shr(&record(1.0, 7, false), 20).unwrap();
        assert_eq!(c.normalized_r, Some(1.0));
        let same = normalize_shr(&record(0.63, 20, false), 20).unwrap();
        assert!((same.normalized_r.unwrap() - 0.63).abs() < 1e-15);
    }

    #[test]
    fn sba_monotone() {
        let rs = [0.05, 0.2, 0.5, 0.8, 0.99];
        let ks = [0.1, 0.5, 1.0, 2.0, 10.0];
        for &k in &ks {
            for w in rs.windows(2) {
                assert!(sba_adjust(w[0], k).unwrap() < sba_adjust(w[1], k).unwrap());
            }
        }
        for &r in &rs {
            assert!((sba_adjust(r, 1.0).unwrap() - r).abs() < 1e-15);
            for w in ks.windows(2) {
                assert!(sba_adjust(r, w[0]).unwrap() < sba_adjust(r, w[1]).unwrap());
            }
        }
    }

    #[test]
    fn identical_raters_are_perfectly_reliable() {
        let truth = [1.0, 4.0, 2.0, 8.0, 5.0];
        let ratings = Array2::from_shape_fn((5, 6), |(i, _)| truth[i]);
        let m = RaterMatrix::new((0..5).map(|i| i.to_string()).collect(), ratings, (1.0, 9.0))
            .unwrap();
        let shr = split_half_reliability(&m, 100, 7).unwrap();
        assert!((shr.reliability - 1.0).abs() < 1e-12);
        assert_eq!(shr.iterations_used, 100);
    }

    #[test]
    fn single_rater_rejected() {
        let m = RaterMatrix::new(vec!["a".into(); 4], Array2::zeros((4, 1)), (0.0, 1.0)).unwrap();
        assert!(matches!(split_half_reliability(&m, 10, 0), Err(Error::Contract(_))));
    }

    #[test]
    fn constant_items_are_degenerate() {
        let m = RaterMatrix::new(vec!["a".into(); 4], Array2::ones((4, 4)), (0.0, 1.0)).unwrap();
        assert!(matches!(split_half_reliability(&m, 10, 0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn seeded_and_approaching_one() {
        let m = simulate_raters(80, 9, 1.0, 1.0, 3).unwrap();
        let a = split_half_reliability(&m, 50, 11).unwrap();
        let b = split_half_reliability(&m, 50, 11).unwrap();
        assert_eq!(a, b);
        let mut last = 0.0;
        for noise in [2.0, 1.0, 0.5, 0.1, 0.01] {
            let m = simulate_raters(80, 9, 1.0, noise, 3).unwrap();
            let r = split_half_reliability(&m, 50, 11).unwrap().reliability;
            assert!(r > last, "noise {noise}: {r} <= {last}");
            last = r;
        }
        assert!(last > 0.999);
    }

    #[test]
    fn matches_analytic_expectation() {
        // Halves of 10 raters: rho = var_item / (var_item + var_noise / 10).
        let m = simulate_raters(200, 20, 1.0, 2.0, 99).unwrap();
        let rho = 1.0 / (1.0 + 4.0 / 10.0);
        let r = split_half_reliability(&m, 100, 5).unwrap().reliability;
        assert!((r - rho).abs() < 0.05, "{r} vs {rho}");
    }

    #[test]
    fn reliability_tsv_roundtrip() {
        let text = "dataset\tvariable\treported_r\tn_participants\tsba_applied\n\
                    en_2\tvalence\t0.8\t40\ttrue\n\
                    es_1\tjoy\t0.7\t10\tfalse\n";
        let recs = parse_reliability_records(text).unwrap();
        assert_eq!(recs.len(), 2);
        let norm: Vec<_> = recs.iter().map(|r| normalize_shr(r, 20).unwrap()).collect();
        let out = format_reliability_records(&norm);
        assert!(out.contains("en_2\tvalence\t0.8\t40\ttrue\t0.500\n"), "{out}");
        assert!(out.contains("es_1\tjoy\t0.7\t10\tfalse\t0.824\n"), "{out}");
        assert!(parse_reliability_records("a\tb\t1.2\t3\ttrue\n").is_err());
        assert!(parse_reliability_records("a\tb\t0.5\t3\tyes\n").is_err());
    }
}
