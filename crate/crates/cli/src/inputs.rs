//! Reading the lexicons, datasets and reliability records a manifest names.

use std::fs;

use emomap::experiments::Dataset;
use emomap::lexicon::{align_with, parse_lexicon, Diagnostic, Lexicon, ParseOptions};
use emomap::stats::{normalize_shr, parse_reliability_records, ReliabilityRecord, NORMALIZED_PARTICIPANTS};
use emomap::util::sha256_hex;
use indexmap::IndexMap;
use serde::Serialize;

use crate::failure::Failure;
use crate::manifest::{LexiconEntry, Loaded};

/// Input file digests keyed by the path as written in the manifest.
pub type Digests = IndexMap<String, String>;

pub struct LoadedLexicon {
    pub lexicon: Lexicon,
    pub warnings: Vec<Diagnostic>,
}

pub fn read_input(loaded: &Loaded, path: &std::path::Path, digests: &mut Digests) -> Result<Vec<u8>, Failure> {
    let full = loaded.resolve(path);
    let bytes = fs::read(&full).map_err(|e| Failure::io(format!("{}: {e}", full.display())))?;
    digests.insert(path.display().to_string(), sha256_hex(&bytes));
    Ok(bytes)
}

pub fn load_lexicon(loaded: &Loaded, entry: &LexiconEntry, digests: &mut Digests) -> Result<LoadedLexicon, Failure> {
    let format = loaded.format(&entry.format)?;
    let columns = entry.column_map(&format)?;
    let bytes = read_input(loaded, &entry.path, digests)?;
    let opts = ParseOptions {
        language: entry.language.clone(),
        source_id: entry.id.clone(),
        lowercase: entry.lowercase,
        clamp: entry.clamp,
        file_scale: entry.file_scale.map(|[lo, hi]| (lo, hi)),
    };
    let parsed = parse_lexicon(&bytes, &format, &columns, &opts)
        .map_err(|e| Failure::from(e).context(&format!("lexicon {}", entry.id)))?;
    Ok(LoadedLexicon {
        lexicon: parsed.lexicon,
        warnings: parsed.warnings,
    })
}

/// Everything a run needs, loaded eagerly and in manifest order.
pub struct Inputs {
    pub lexicons: IndexMap<String, Lexicon>,
    pub datasets: Vec<Dataset>,
    pub digests: Digests,
}

impl Inputs {
    pub fn load(loaded: &Loaded) -> Result<Inputs, Failure> {
        let mut digests = Digests::new();
        let mut lexicons = IndexMap::new();
        for entry in &loaded.manifest.lexicons {
            let l = load_lexicon(loaded, entry, &mut digests)?;
            for w in &l.warnings {
                log::warn!("lexicon {} row {} ({}): {}", entry.id, w.row, w.word, w.message);
            }
            lexicons.insert(entry.id.clone(), l.lexicon);
        }
        let datasets = loaded
            .manifest
            .datasets
            .iter()
            .map(|d| {
                let get = |id: &str| {
                    lexicons
                        .get(id)
                        .ok_or_else(|| Failure::validation(format!("dataset {} names unknown lexicon {id:?}", d.id)))
                };
                let aligned = align_with(get(&d.source)?, get(&d.target)?, d.allow_language_mismatch)
                    .map_err(|e| Failure::from(e).context(&format!("dataset {}", d.id)))?;
                Ok(Dataset::new(d.id.clone(), aligned))
            })
            .collect::<Result<Vec<_>, Failure>>()?;
        Ok(Inputs {
            lexicons,
            datasets,
            digests,
        })
    }

    pub fn lexicon(&self, id: &str) -> Result<&Lexicon, Failure> {
        self.lexicons
            .get(id)
            .ok_or_else(|| Failure::validation(format!("unknown lexicon {id:?}")))
    }

    pub fn dataset(&self, id: &str) -> Result<&Dataset, Failure> {
        self.datasets
            .iter()
            .find(|d| d.id == id)
            .ok_or_else(|| Failure::validation(format!("unknown dataset {id:?}")))
    }

    /// The named datasets in the given order, or all of them.
    pub fn select(&self, ids: Option<&[String]>) -> Result<Vec<Dataset>, Failure> {
        match ids {
            None => Ok(self.datasets.clone()),
            Some(ids) => ids.iter().map(|id| self.dataset(id).cloned()).collect(),
        }
    }
}

/// Reliability records with `normalized_r` filled in where missing.
pub fn load_records(loaded: &Loaded, digests: &mut Digests) -> Result<Vec<ReliabilityRecord>, Failure> {
    let Some(path) = &loaded.manifest.reliability else {
        return Ok(Vec::new());
    };
    let bytes = read_input(loaded, path, digests)?;
    let text = String::from_utf8(bytes).map_err(|_| Failure::validation(format!("{} is not UTF-8", path.display())))?;
    let records = parse_reliability_records(&text)?;
    records
        .iter()
        .map(|r| match r.normalized_r {
            Some(_) => Ok(r.clone()),
            None => Ok(normalize_shr(r, NORMALIZED_PARTICIPANTS)?),
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub source: String,
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub word: Option<String>,
    #[serde(skip)]
    pub code: u8,
}

impl ErrorRecord {
    pub fn from_failure(source: String, f: &Failure) -> Self {
        let (kind, row, word) = match &f.cause {
            Some(emomap::Error::Parse { row, .. }) => ("parse", Some(*row), None),
            Some(emomap::Error::Validation { row, word, .. }) => ("validation", Some(*row), Some(word.clone())),
            Some(emomap::Error::Config(_)) => ("configuration", None, None),
            Some(emomap::Error::EmptyAlignment { .. }) => ("empty_alignment", None, None),
            Some(emomap::Error::Io { .. }) => ("io", None, None),
            Some(_) => ("invalid", None, None),
            None if f.code == Failure::IO => ("io", None, None),
            None => ("configuration", None, None),
        };
        ErrorRecord {
            source,
            kind,
            message: f.cause.as_ref().map_or_else(|| f.message.clone(), |c| c.to_string()),
            row,
            word,
            code: f.code,
        }
    }
}
