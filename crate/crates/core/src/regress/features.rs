//! Word feature vectors (e.g. converted embeddings) for the boosted baseline.

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::lexicon::canonical_word;

pub type FeatureTable = IndexMap<String, Vec<f64>>;

/// Reads `word<TAB>v1<TAB>...<TAB>vD` lines. A first line whose second field
/// is not numeric is treated as a header. All vectors must share one length.
pub fn parse_features(bytes: &[u8], lowercase: bool) -> Result<FeatureTable> {
    let text = std::str::from_utf8(bytes).map_err(|_| Error::Parse {
        row: 0,
        message: "feature file is not valid UTF-8".into(),
    })?;
    let text = text.replace("\r\n", "\n");
    let mut table = FeatureTable::new();
    let mut dim = None;
    for (i, line) in text.split('\n').enumerate() {
        let row = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if i == 0 && fields.get(1).is_some_and(|f| f.trim().parse::<f64>().is_err()) {
            continue;
        }
        if fields.len() < 2 {
            return Err(Error::Parse {
                row,
                message: "feature row has no values".into(),
            });
        }
        let values = fields[1..]
            .iter()
            .map(|f| f.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| Error::Parse {
                row,
                message: "non-numeric feature value".into(),
            })?;
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(Error::Parse {
                    row,
                    message: format!("expected {d} features, found {}", values.len()),
                })
            }
            _ => {}
        }
        let word = canonical_word(fields[0], lowercase);
        if table.insert(word.clone(), values).is_some() {
            log::warn!("row {row}: repeated feature vector for {word}; keeping the last one");
        }
    }
    Ok(table)
}
