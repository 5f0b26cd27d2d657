//! Emotion representation formats.
//!
//! A format is an ordered list of affective variables sharing one rating
//! scale. Three formats are built in: `VAD` and `VA` (dimensional, rated on
//! `[1, 9]`) and `BE5` (the five basic emotions without surprise, rated on
//! `[1, 5]`).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether a format describes bipolar dimensions or unipolar categories.
///
/// Used to label mapping directions (`dim2cat`, `cat2dim`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatKind {
    Dimensional,
    Categorical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmotionFormat {
    name: String,
    variables: Vec<String>,
    scale_low: f64,
    scale_high: f64,
    kind: FormatKind,
}

pub const VALENCE: &str = "valence";
pub const AROUSAL: &str = "arousal";
pub const DOMINANCE: &str = "dominance";
pub const BE5_VARIABLES: [&str; 5] = ["joy", "anger", "sadness", "fear", "disgust"];

impl EmotionFormat {
    pub fn new(
        name: impl Into<String>,
        variables: Vec<String>,
        scale_low: f64,
        scale_high: f64,
        kind: FormatKind,
    ) -> Result<Self> {
        let name = name.into();
        if name.trim().is_empty() {
            return Err(Error::config("format name must not be empty"));
        }
        if variables.is_empty() {
            return Err(Error::config(format!("format {name} has no variables")));
        }
        for (i, v) in variables.iter().enumerate() {
            if variables[..i].contains(v) {
                return Err(Error::config(format!(
                    "format {name} lists variable {v} twice"
                )));
            }
        }
        if !(scale_low.is_finite() && scale_high.is_finite() && scale_low < scale_high) {
            return Err(Error::config(format!(
                "format {name} has invalid scale [{scale_low}, {scale_high}]"
            )));
        }
        Ok(Self {
            name,
            variables,
            scale_low,
            scale_high,
            kind,
        })
    }

    pub fn vad() -> Self {
        Self::builtin_unchecked(
            "VAD",
            &[VALENCE, AROUSAL, DOMINANCE],
            1.0,
            9.0,
            FormatKind::Dimensional,
        )
    }

    pub fn va() -> Self {
        Self::builtin_unchecked("VA", &[VALENCE, AROUSAL], 1.0, 9.0, FormatKind::Dimensional)
    }

    pub fn be5() -> Self {
        Self::builtin_unchecked("BE5", &BE5_VARIABLES, 1.0, 5.0, FormatKind::Categorical)
    }

    /// Looks up a built-in format by name (case-insensitive).
    pub fn builtin(name: &str) -> Option<Self> {
        match name.to_ascii_uppercase().as_str() {
            "VAD" => Some(Self::vad()),
            "VA" => Some(Self::va()),
            "BE5" => Some(Self::be5()),
            _ => None,
        }
    }

    fn builtin_unchecked(name: &str, vars: &[&str], lo: f64, hi: f64, kind: FormatKind) -> Self {
        Self {
            name: name.to_string(),
            variables: vars.iter().map(|v| v.to_string()).collect(),
            scale_low: lo,
            scale_high: hi,
            kind,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    pub fn scale_low(&self) -> f64 {
        self.scale_low
    }

    pub fn scale_high(&self) -> f64 {
        self.scale_high
    }

    pub fn kind(&self) -> FormatKind {
        self.kind
    }

    pub fn position(&self, variable: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == variable)
    }

    pub fn contains(&self, value: f64) -> bool {
        value >= self.scale_low && value <= self.scale_high
    }

    pub fn clamp(&self, value: f64) -> f64 {
        value.clamp(self.scale_low, self.scale_high)
    }

    /// Same name and same variable list; scale differences are ignored.
    pub fn same_layout(&self, other: &EmotionFormat) -> bool {
        self.name == other.name && self.variables == other.variables
    }

    pub(crate) fn with_scale(&self, low: f64, high: f64) -> Result<Self> {
        Self::new(self.name.clone(), self.variables.clone(), low, high, self.kind)
    }

    /// Restricts the format to `keep` (in that order) and returns the new
    /// format together with the column indices to retain.
    ///
    /// Dropping dominance from `VAD` yields `VA`; other subsets get a
    /// derived name such as `BE5[joy,fear]`.
    pub fn project(&self, keep: &[impl AsRef<str>]) -> Result<(EmotionFormat, Vec<usize>)> {
        if keep.is_empty() {
            return Err(Error::config(format!(
                "projection of {} must keep at least one variable",
                self.name
            )));
        }
        let mut idx = Vec::with_capacity(keep.len());
        for k in keep {
            let k = k.as_ref();
            let pos = self.position(k).ok_or_else(|| {
                Error::config(format!("format {} has no variable {k}", self.name))
            })?;
            if idx.contains(&pos) {
                return Err(Error::config(format!("variable {k} kept twice")));
            }
            idx.push(pos);
        }
        let vars: Vec<String> = idx.iter().map(|&i| self.variables[i].clone()).collect();
        if vars == self.variables {
            return Ok((self.clone(), idx));
        }
        let known = [Self::vad(), Self::va(), Self::be5()];
        let name = known
            .iter()
            .find(|f| {
                f.variables == vars
                    && f.kind == self.kind
                    && f.scale_low == self.scale_low
                    && f.scale_high == self.scale_high
            })
            .map(|f| f.name.clone())
            .unwrap_or_else(|| format!("{}[{}]", self.name, vars.join(",")));
        let format = Self::new(name, vars, self.scale_low, self.scale_high, self.kind)?;
        Ok((format, idx))
    }
}

impl fmt::Display for EmotionFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}({}) on [{}, {}]",
            self.name,
            self.variables.join(", "),
            self.scale_low,
            self.scale_high
        )
    }
}

/// Affine map taking `[from.0, from.1]` onto `[to.0, to.1]`.
pub fn rescale_value(v: f64, from: (f64, f64), to: (f64, f64)) -> f64 {
    to.0 + (v - from.0) * (to.1 - to.0) / (from.1 - from.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_match_conventions() {
        let vad = EmotionFormat::vad();
        assert_eq!(vad.variables(), ["valence", "arousal", "dominance"]);
        assert_eq!((vad.scale_low(), vad.scale_high()), (1.0, 9.0));
        let be5 = EmotionFormat::be5();
        assert_eq!(be5.dim(), 5);
        assert_eq!((be5.scale_low(), be5.scale_high()), (1.0, 5.0));
        assert_eq!(EmotionFormat::builtin("va"), Some(EmotionFormat::va()));
    }

    #[test]
    fn rejects_bad_formats() {
        let dup = vec!["a".to_string(), "a".to_string()];
        assert!(EmotionFormat::new("X", dup, 0.0, 1.0, FormatKind::Categorical).is_err());
        assert!(EmotionFormat::new("X", vec![], 0.0, 1.0, FormatKind::Categorical).is_err());
        let one = vec!["a".to_string()];
        assert!(EmotionFormat::new("X", one, 1.0, 1.0, FormatKind::Categorical).is_err());
    }

    #[test]
    fn dropping_dominance_gives_va() {
        let (f, idx) = EmotionFormat::vad().project(&["valence", "arousal"]).unwrap();
        assert_eq!(f, EmotionFormat::va());
        assert_eq!(idx, vec![0, 1]);

        let (f, _) = EmotionFormat::be5().project(&["fear", "joy"]).unwrap();
        assert_eq!(f.name(), "BE5[fear,joy]");
        assert!(EmotionFormat::be5().project(&["surprise"]).is_err());
    }

    #[test]
    fn affine_rescale() {
        assert_eq!(rescale_value(3.0, (1.0, 5.0), (1.0, 9.0)), 5.0);
        assert_eq!(rescale_value(2.0, (1.0, 5.0), (1.0, 9.0)), 3.0);
        assert_eq!(rescale_value(5.0, (1.0, 5.0), (1.0, 9.0)), 9.0);
    }
}
