//! Experiment manifest: a TOML file naming every input, model and job.
//! Relative paths resolve against the manifest's directory.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use emomap::format::{EmotionFormat, FormatKind};
use emomap::lexicon::ColumnMap;
use emomap::regress::ModelSpec;
use emomap::util::sha256_hex;
use indexmap::IndexMap;
use serde::Deserialize;

use crate::failure::Failure;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_folds")]
    pub k_folds: usize,
    pub reliability: Option<PathBuf>,
    #[serde(default)]
    pub formats: Vec<FormatEntry>,
    #[serde(default)]
    pub lexicons: Vec<LexiconEntry>,
    #[serde(default)]
    pub datasets: Vec<DatasetEntry>,
    #[serde(default)]
    pub models: Vec<ModelSpec>,
    #[serde(default)]
    pub monolingual: Selection,
    #[serde(default)]
    pub crosslingual: CrosslingualEntry,
    #[serde(default)]
    pub ablation: AblationEntry,
    #[serde(default)]
    pub build: Vec<BuildEntry>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_folds() -> usize {
    emomap::experiments::DEFAULT_FOLDS
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormatEntry {
    pub name: String,
    pub variables: Vec<String>,
    pub scale: [f64; 2],
    pub kind: FormatKind,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconEntry {
    pub id: String,
    pub path: PathBuf,
    pub format: String,
    pub language: String,
    /// Header of the word column plus one header per variable; defaults
    /// to `word` and the variable names.
    pub columns: Option<IndexMap<String, String>>,
    #[serde(default)]
    pub lowercase: bool,
    #[serde(default)]
    pub clamp: bool,
    /// Scale the file is rated on, when it differs from the format's.
    pub file_scale: Option<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub id: String,
    pub source: String,
    pub target: String,
    #[serde(default)]
    pub allow_language_mismatch: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Selection {
    pub datasets: Option<Vec<String>>,
    pub models: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrosslingualEntry {
    pub model: Option<String>,
    pub datasets: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblationEntry {
    pub datasets: Option<Vec<String>>,
    pub directions: Option<Vec<emomap::experiments::Direction>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildEntry {
    pub id: String,
    pub mode: emomap::lexgen::BuildMode,
    pub source: String,
    pub training: Vec<String>,
    pub model: String,
    #[serde(default)]
    pub exclude: Vec<String>,
    pub output: PathBuf,
}

/// A parsed manifest plus what is needed to reproduce it.
pub struct Loaded {
    pub manifest: Manifest,
    pub base_dir: PathBuf,
    pub digest: String,
    pub overrides: Vec<String>,
}

/// Applies a `key=value` override. Keys are dotted paths; numeric
/// segments index arrays (`models.1.iterations=500`). Values are TOML
/// literals, and anything that does not parse as one is taken as a string.
pub fn apply_override(root: &mut toml::Value, assignment: &str) -> Result<(), Failure> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Failure::usage(format!("override {assignment:?} is not key=value")))?;
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let bad = || Failure::usage(format!("override key {key:?} does not name a manifest field"));
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, path) = parts.split_last().ok_or_else(bad)?;
    let mut node = root;
    for seg in path {
        node = child(node, seg).ok_or_else(bad)?;
    }
    match node {
        toml::Value::Table(t) => {
            t.insert(last.to_string(), value);
        }
        toml::Value::Array(a) => {
            let i: usize = last.parse().map_err(|_| bad())?;
            *a.get_mut(i).ok_or_else(bad)? = value;
        }
        _ => return Err(bad()),
    }
    Ok(())
}

fn child<'a>(node: &'a mut toml::Value, seg: &str) -> Option<&'a mut toml::Value> {
    match node {
        toml::Value::Table(t) => Some(
            t.entry(seg.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new())),
        ),
        toml::Value::Array(a) => seg.parse::<usize>().ok().and_then(|i| a.get_mut(i)),
        _ => None,
    }
}

fn check_unique<'a>(what: &str, ids: impl Iterator<Item = &'a str>) -> Result<(), Failure> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Failure::validation(format!("{what} id {id:?} appears twice")));
        }
    }
    Ok(())
}

pub fn load(path: &Path, overrides: &[String], seed: Option<u64>, out: Option<&Path>) -> Result<Loaded, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Failure::validation(format!("{} is not UTF-8", path.display())))?;
    let mut root: toml::Value = toml::from_str::<toml::Table>(&text)
        .map(toml::Value::Table)
        .map_err(|e| Failure::validation(format!("{}: {e}", path.display())))?;
    let mut applied = overrides.to_vec();
    for o in overrides {
        apply_override(&mut root, o)?;
    }
    if let Some(seed) = seed {
        let v = i64::try_from(seed).map_err(|_| Failure::usage("seed must fit in a signed 64-bit integer"))?;
        root.as_table_mut()
            .expect("manifest root is a table")
            .insert("seed".into(), toml::Value::Integer(v));
        applied.push(format!("seed={seed}"));
    }
    let mut manifest: Manifest = root
        .try_into()
        .map_err(|e| Failure::validation(format!("{}: {e}", path.display())))?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    manifest.output_dir = match out {
        Some(dir) => dir.to_path_buf(),
        None => base_dir.join(&manifest.output_dir),
    };
    check_unique("format", manifest.formats.iter().map(|f| f.name.as_str()))?;
    check_unique("lexicon", manifest.lexicons.iter().map(|l| l.id.as_str()))?;
    check_unique("dataset", manifest.datasets.iter().map(|d| d.id.as_str()))?;
    check_unique("model", manifest.models.iter().map(|m| m.name.as_str()))?;
    check_unique("build", manifest.build.iter().map(|b| b.id.as_str()))?;
    Ok(Loaded {
        manifest,
        base_dir,
        digest: sha256_hex(&bytes),
        overrides: applied,
    })
}

impl Loaded {
    pub fn resolve(&self, path: &Path) -> PathBuf {
        self.base_dir.join(path)
    }

    pub fn format(&self, name: &str) -> Result<EmotionFormat, Failure> {
        if let Some(f) = self.manifest.formats.iter().find(|f| f.name == name) {
            return Ok(EmotionFormat::new(
                f.name.clone(),
                f.variables.clone(),
                f.scale[0],
                f.scale[1],
                f.kind,
            )?);
        }
        EmotionFormat::builtin(name).ok_or_else(|| Failure::validation(format!("unknown format {name:?}")))
    }

    pub fn model(&self, name: &str) -> Result<&ModelSpec, Failure> {
        self.manifest
            .models
            .iter()
            .find(|m| m.name == name)
            .ok_or_else(|| Failure::validation(format!("unknown model {name:?}")))
    }
}

impl LexiconEntry {
    pub fn column_map(&self, format: &EmotionFormat) -> Result<ColumnMap, Failure> {
        let Some(cols) = &self.columns else {
            return Ok(ColumnMap::identity(format));
        };
        let mut map = ColumnMap::identity(format);
        for (key, header) in cols {
            if key == "word" {
                map.word = header.clone();
            } else if let Some(slot) = map.variables.get_mut(key) {
                *slot = header.clone();
            } else {
                return Err(Failure::validation(format!(
                    "lexicon {}: column key {key:?} is not a variable of {}",
                    self.id,
                    format.name()
                )));
            }
        }
        Ok(map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn root(text: &str) -> toml::Value {
        toml::Value::Table(toml::from_str(text).unwrap())
    }

    #[test]
    fn overrides_reach_nested_fields() {
        let mut v = root("seed = 1\n[[models]]\nname = \"a\"\nkind = \"linear\"\n[[models]]\nname = \"b\"\nkind = \"ffnn\"\n");
        apply_override(&mut v, "models.1.iterations=50").unwrap();
        apply_override(&mut v, "seed=7").unwrap();
        apply_override(&mut v, "output_dir=results/x").unwrap();
        apply_override(&mut v, "monolingual.models=[\"a\"]").unwrap();
        assert_eq!(v["models"][1]["iterations"].as_integer(), Some(50));
        assert_eq!(v["seed"].as_integer(), Some(7));
        assert_eq!(v["output_dir"].as_str(), Some("results/x"));
        assert_eq!(v["monolingual"]["models"][0].as_str(), Some("a"));
    }

    #[test]
    fn malformed_overrides_are_usage_errors() {
        let mut v = root("seed = 1\n[[models]]\nname = \"a\"\nkind = \"linear\"\n");
        assert_eq!(apply_override(&mut v, "seed").unwrap_err().code, 64);
        assert_eq!(apply_override(&mut v, "seed.x=1").unwrap_err().code, 64);
        assert_eq!(apply_override(&mut v, "models.3.k=1").unwrap_err().code, 64);
    }
}
