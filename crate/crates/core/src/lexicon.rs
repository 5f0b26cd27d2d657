//! Word-level emotion lexicons: TSV ingestion, rescaling, alignment of two
//! lexicons over shared words, projection onto variable subsets and
//! concatenation of aligned data sets.

use std::collections::HashMap;

use indexmap::IndexMap;
use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::format::{rescale_value, EmotionFormat};

/// Language tag used for aligned data mixing several languages.
pub const MULTI_LANGUAGE: &str = "multi";

/// NFC-normalizes and trims a word; lowercases only on request.
pub fn canonical_word(raw: &str, lowercase: bool) -> String {
    let w: String = raw.trim().nfc().collect();
    if lowercase {
        w.to_lowercase()
    } else {
        w
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lexicon {
    format: EmotionFormat,
    entries: IndexMap<String, Vec<f64>>,
    language: String,
    source_id: String,
}

impl Lexicon {
    pub fn new(
        format: EmotionFormat,
        entries: IndexMap<String, Vec<f64>>,
        language: impl Into<String>,
        source_id: impl Into<String>,
    ) -> Result<Self> {
        for (i, (word, ratings)) in entries.iter().enumerate() {
            if ratings.len() != format.dim() {
                return Err(Error::contract(format!(
                    "entry {word} has {} ratings, format {} expects {}",
                    ratings.len(),
                    format.name(),
                    format.dim()
                )));
            }
            if let Some(v) = ratings.iter().find(|v| !format.contains(**v)) {
                return Err(Error::Validation {
                    row: i + 1,
                    word: word.clone(),
                    message: format!(
                        "rating {v} outside [{}, {}]",
                        format.scale_low(),
                        format.scale_high()
                    ),
                });
            }
        }
        Ok(Self {
            format,
            entries,
            language: language.into(),
            source_id: source_id.into(),
        })
    }

    pub fn format(&self) -> &EmotionFormat {
        &self.format
    }

    pub fn entries(&self) -> &IndexMap<String, Vec<f64>> {
        &self.entries
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.entries.get(word).map(Vec::as_slice)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Linearly maps every rating onto `[low, high]`.
    pub fn rescale(&self, low: f64, high: f64) -> Result<Lexicon> {
        if !(low.is_finite() && high.is_finite() && low < high) {
            return Err(Error::contract(format!("invalid target scale [{low}, {high}]")));
        }
        let from = (self.format.scale_low(), self.format.scale_high());
        let format = self.format.with_scale(low, high)?;
        let entries = self
            .entries
            .iter()
            .map(|(w, r)| {
                let mapped = r
                    .iter()
                    .map(|&v| format.clamp(rescale_value(v, from, (low, high))))
                    .collect();
                (w.clone(), mapped)
            })
            .collect();
        Ok(Lexicon {
            format,
            entries,
            language: self.language.clone(),
            source_id: self.source_id.clone(),
        })
    }

    /// Keeps only the listed variables, in the given order.
    pub fn project(&self, keep: &[impl AsRef<str>]) -> Result<Lexicon> {
        let (format, idx) = self.format.project(keep)?;
        let entries = self
            .entries
            .iter()
            .map(|(w, r)| (w.clone(), idx.iter().map(|&i| r[i]).collect()))
            .collect();
        Ok(Lexicon {
            format,
            entries,
            language: self.language.clone(),
            source_id: self.source_id.clone(),
        })
    }
}

/// Maps each format variable to the header of the column holding it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub word: String,
    pub variables: IndexMap<String, String>,
}

impl ColumnMap {
    /// Columns named exactly like the format's variables, words under `word`.
    pub fn identity(format: &EmotionFormat) -> Self {
        Self {
            word: "word".to_string(),
            variables: format
                .variables()
                .iter()
                .map(|v| (v.clone(), v.clone()))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ParseOptions {
    pub language: String,
    pub source_id: String,
    pub lowercase: bool,
    /// Clamp out-of-range values (with a warning) instead of failing.
    pub clamp: bool,
    /// Scale used by the file, if it differs from the format's scale. Values
    /// are validated against it and then mapped onto the format's scale.
    pub file_scale: Option<(f64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    DuplicateWord,
    Clamped,
}

/// A structured warning produced while reading a lexicon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub row: usize,
    pub word: String,
    pub kind: DiagnosticKind,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct Parsed {
    pub lexicon: Lexicon,
    pub warnings: Vec<Diagnostic>,
}

/// Reads a tab-separated lexicon with a header row.
///
/// Row numbers in errors and warnings are 1-based file lines (the header is
/// line 1). Repeated words are averaged per variable.
pub fn parse_lexicon(
    bytes: &[u8],
    format: &EmotionFormat,
    columns: &ColumnMap,
    opts: &ParseOptions,
) -> Result<Parsed> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
        row: 1 + bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count(),
        message: "input is not valid UTF-8".to_string(),
    })?;
    let text = text.replace("\r\n", "\n").replace('\r', "\n");
    let mut lines = text.split('\n').enumerate();

    let header: Vec<&str> = match lines.next() {
        Some((_, h)) if !h.trim().is_empty() => h.split('\t').map(str::trim).collect(),
        _ => return Err(Error::config("lexicon has no header row")),
    };
    let find = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| Error::config(format!("missing column {name:?}")))
    };
    let word_col = find(&columns.word)?;
    let mut value_cols = Vec::with_capacity(format.dim());
    for var in format.variables() {
        let col = columns
            .variables
            .get(var)
            .ok_or_else(|| Error::config(format!("column map has no entry for {var}")))?;
        value_cols.push(find(col)?);
    }
    let needed = value_cols.iter().copied().chain([word_col]).max().unwrap_or(0) + 1;

    let file_scale = opts
        .file_scale
        .unwrap_or((format.scale_low(), format.scale_high()));
    if !(file_scale.0 < file_scale.1) {
        return Err(Error::config(format!(
            "invalid file scale [{}, {}]",
            file_scale.0, file_scale.1
        )));
    }
    let target_scale = (format.scale_low(), format.scale_high());

    let mut warnings = Vec::new();
    // word -> (first row, summed ratings, count)
    let mut acc: IndexMap<String, (Vec<f64>, usize)> = IndexMap::new();

    for (i, line) in lines {
        let row = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < needed {
            return Err(Error::Parse {
                row,
                message: format!("expected at least {needed} fields, found {}", fields.len()),
            });
        }
        let word = canonical_word(fields[word_col], opts.lowercase);
        if word.is_empty() {
            return Err(Error::Parse {
                row,
                message: "empty word".to_string(),
            });
        }
        let mut ratings = Vec::with_capacity(value_cols.len());
        for (&col, var) in value_cols.iter().zip(format.variables()) {
            let cell = fields[col].trim();
            let mut v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    row,
                    message: format!("{var}: {cell:?} is not a number"),
                })?;
            if v < file_scale.0 || v > file_scale.1 {
                if !opts.clamp {
                    return Err(Error::Validation {
                        row,
                        word,
                        message: format!(
                            "{var} = {v} outside [{}, {}]",
                            file_scale.0, file_scale.1
                        ),
                    });
                }
                let c = v.clamp(file_scale.0, file_scale.1);
                warnings.push(Diagnostic {
                    row,
                    word: word.clone(),
                    kind: DiagnosticKind::Clamped,
                    message: format!("{var} = {v} clamped to {c}"),
                });
                v = c;
            }
            let mapped = rescale_value(v, file_scale, target_scale);
            ratings.push(mapped.clamp(target_scale.0, target_scale.1));
        }
        match acc.get_mut(&word) {
            Some((sum, count)) => {
                warnings.push(Diagnostic {
                    row,
                    word: word.clone(),
                    kind: DiagnosticKind::DuplicateWord,
                    message: "repeated word; ratings averaged".to_string(),
                });
                for (s, r) in sum.iter_mut().zip(&ratings) {
                    *s += r;
                }
                *count += 1;
            }
            None => {
                acc.insert(word, (ratings, 1));
            }
        }
    }

    let entries = acc
        .into_iter()
        .map(|(w, (sum, count))| {
            let mean = if count == 1 {
                sum
            } else {
                sum.into_iter().map(|s| s / count as f64).collect()
            };
            (w, mean)
        })
        .collect();
    let lexicon = Lexicon::new(
        format.clone(),
        entries,
        opts.language.clone(),
        opts.source_id.clone(),
    )?;
    Ok(Parsed { lexicon, warnings })
}

/// Words with ratings in two formats: row `i` of both matrices belongs to
/// `words[i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignedLexicon {
    words: Vec<String>,
    source_format: EmotionFormat,
    target_format: EmotionFormat,
    source: Array2<f64>,
    target: Array2<f64>,
    language: String,
    /// Language each row came from; survives concatenation.
    row_languages: Vec<String>,
}

impl AlignedLexicon {
    pub fn new(
        words: Vec<String>,
        source_format: EmotionFormat,
        target_format: EmotionFormat,
        source: Array2<f64>,
        target: Array2<f64>,
        language: impl Into<String>,
    ) -> Result<Self> {
        let language = language.into();
        let row_languages = vec![language.clone(); words.len()];
        Self::with_row_languages(
            words,
            source_format,
            target_format,
            source,
            target,
            language,
            row_languages,
        )
    }

    fn with_row_languages(
        words: Vec<String>,
        source_format: EmotionFormat,
        target_format: EmotionFormat,
        source: Array2<f64>,
        target: Array2<f64>,
        language: String,
        row_languages: Vec<String>,
    ) -> Result<Self> {
        if source_format.name() == target_format.name() {
            return Err(Error::config(format!(
                "source and target share format {}",
                source_format.name()
            )));
        }
        let n = words.len();
        if source.dim() != (n, source_format.dim()) || target.dim() != (n, target_format.dim()) {
            return Err(Error::contract(format!(
                "matrix shapes {:?}/{:?} do not match {n} words and formats {}/{}",
                source.dim(),
                target.dim(),
                source_format.name(),
                target_format.name()
            )));
        }
        if row_languages.len() != n {
            return Err(Error::contract("row language tags do not match row count"));
        }
        for (m, f) in [(&source, &source_format), (&target, &target_format)] {
            for (i, row) in m.axis_iter(Axis(0)).enumerate() {
                if let Some(v) = row.iter().find(|v| !f.contains(**v)) {
                    return Err(Error::Validation {
                        row: i + 1,
                        word: words[i].clone(),
                        message: format!("{} rating {v} out of bounds", f.name()),
                    });
                }
            }
        }
        Ok(Self {
            words,
            source_format,
            target_format,
            source,
            target,
            language,
            row_languages,
        })
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn source_format(&self) -> &EmotionFormat {
        &self.source_format
    }

    pub fn target_format(&self) -> &EmotionFormat {
        &self.target_format
    }

    pub fn source(&self) -> &Array2<f64> {
        &self.source
    }

    pub fn target(&self) -> &Array2<f64> {
        &self.target
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn row_languages(&self) -> &[String] {
        &self.row_languages
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Exchanges the source and target roles.
    pub fn swap(&self) -> AlignedLexicon {
        AlignedLexicon {
            words: self.words.clone(),
            source_format: self.target_format.clone(),
            target_format: self.source_format.clone(),
            source: self.target.clone(),
            target: self.source.clone(),
            language: self.language.clone(),
            row_languages: self.row_languages.clone(),
        }
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> AlignedLexicon {
        let row_languages: Vec<String> =
            indices.iter().map(|&i| self.row_languages[i].clone()).collect();
        let language = language_of(&row_languages).unwrap_or_else(|| self.language.clone());
        AlignedLexicon {
            words: indices.iter().map(|&i| self.words[i].clone()).collect(),
            source_format: self.source_format.clone(),
            target_format: self.target_format.clone(),
            source: self.source.select(Axis(0), indices),
            target: self.target.select(Axis(0), indices),
            language,
            row_languages,
        }
    }

    /// Restricts whichever side's format holds all of `keep`.
    pub fn project(&self, keep: &[impl AsRef<str>]) -> Result<AlignedLexicon> {
        let on_source = keep
            .iter()
            .all(|k| self.source_format.position(k.as_ref()).is_some());
        let on_target = keep
            .iter()
            .all(|k| self.target_format.position(k.as_ref()).is_some());
        let mut out = self.clone();
        if on_source && !keep.is_empty() {
            let (f, idx) = self.source_format.project(keep)?;
            out.source = self.source.select(Axis(1), &idx);
            out.source_format = f;
        } else if on_target && !keep.is_empty() {
            let (f, idx) = self.target_format.project(keep)?;
            out.target = self.target.select(Axis(1), &idx);
            out.target_format = f;
        } else {
            // Fails with the offending variable (or the empty-keep error).
            self.source_format.project(keep)?;
            return Err(Error::config("projection must stay within one format"));
        }
        Ok(out)
    }

    /// Row-wise concatenation; duplicate words across parts stay distinct rows.
    pub fn concat(parts: &[AlignedLexicon]) -> Result<AlignedLexicon> {
        let first = parts
            .first()
            .ok_or_else(|| Error::contract("nothing to concatenate"))?;
        for p in &parts[1..] {
            if !p.source_format.same_layout(&first.source_format)
                || !p.target_format.same_layout(&first.target_format)
            {
                return Err(Error::config(format!(
                    "cannot concatenate {}->{} with {}->{}; project to a shared format first",
                    first.source_format.name(),
                    first.target_format.name(),
                    p.source_format.name(),
                    p.target_format.name()
                )));
            }
        }
        let sources: Vec<_> = parts.iter().map(|p| p.source.view()).collect();
        let targets: Vec<_> = parts.iter().map(|p| p.target.view()).collect();
        let source = ndarray::concatenate(Axis(0), &sources)
            .map_err(|e| Error::contract(e.to_string()))?;
        let target = ndarray::concatenate(Axis(0), &targets)
            .map_err(|e| Error::contract(e.to_string()))?;
        let words = parts.iter().flat_map(|p| p.words.iter().cloned()).collect();
        let row_languages: Vec<String> = parts
            .iter()
            .flat_map(|p| p.row_languages.iter().cloned())
            .collect();
        let language = language_of(&row_languages).unwrap_or_else(|| first.language.clone());
        Ok(AlignedLexicon {
            words,
            source_format: first.source_format.clone(),
            target_format: first.target_format.clone(),
            source,
            target,
            language,
            row_languages,
        })
    }
}

fn language_of(tags: &[String]) -> Option<String> {
    let first = tags.first()?;
    if tags.iter().all(|t| t == first) {
        Some(first.clone())
    } else {
        Some(MULTI_LANGUAGE.to_string())
    }
}

/// Pairs two lexicons over their shared words, in `source`'s entry order.
pub fn align(source: &Lexicon, target: &Lexicon) -> Result<AlignedLexicon> {
    align_with(source, target, false)
}

/// Like [`align`], optionally accepting lexicons of different languages
/// (the result is then tagged as multilingual).
pub fn align_with(
    source: &Lexicon,
    target: &Lexicon,
    allow_language_mismatch: bool,
) -> Result<AlignedLexicon> {
    if source.format.name() == target.format.name() {
        return Err(Error::config(format!(
            "both lexicons use format {}",
            source.format.name()
        )));
    }
    let language = if source.language == target.language {
        source.language.clone()
    } else if allow_language_mismatch {
        MULTI_LANGUAGE.to_string()
    } else {
        return Err(Error::config(format!(
            "language mismatch: {} is {}, {} is {}",
            source.source_id, source.language, target.source_id, target.language
        )));
    };

    let shared: Vec<(&String, &Vec<f64>, &Vec<f64>)> = source
        .entries
        .iter()
        .filter_map(|(w, s)| target.entries.get(w).map(|t| (w, s, t)))
        .collect();
    if shared.is_empty() {
        return Err(Error::EmptyAlignment {
            left: source.source_id.clone(),
            right: target.source_id.clone(),
        });
    }
    let n = shared.len();
    let mut src = Array2::zeros((n, source.format.dim()));
    let mut tgt = Array2::zeros((n, target.format.dim()));
    let mut words = Vec::with_capacity(n);
    for (i, (w, s, t)) in shared.into_iter().enumerate() {
        words.push(w.clone());
        src.row_mut(i).iter_mut().zip(s).for_each(|(d, v)| *d = *v);
        tgt.row_mut(i).iter_mut().zip(t).for_each(|(d, v)| *d = *v);
    }
    let row_languages = if source.language == target.language {
        vec![language.clone(); n]
    } else {
        vec![source.language.clone(); n]
    };
    AlignedLexicon::with_row_languages(
        words,
        source.format.clone(),
        target.format.clone(),
        src,
        tgt,
        language,
        row_languages,
    )
}

/// Index of words to their row, for lookups by word.
pub fn row_index(words: &[String]) -> HashMap<&str, usize> {
    words.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::EmotionFormat;

    fn vad_tsv(rows: &[(&str, [f64; 3])]) -> String {
        let mut s = String::from("word\tvalence\tarousal\tdominance\n");
        for (w, r) in rows {
            s.push_str(&format!("{w}\t{}\t{}\t{}\n", r[0], r[1], r[2]));
        }
        s
    }

    fn be5_tsv(rows: &[(&str, [f64; 5])]) -> String {
        let mut s = String::from("word\tjoy\tanger\tsadness\tfear\tdisgust\n");
        for (w, r) in rows {
            let cells: Vec<String> = r.iter().map(|v| v.to_string()).collect();
            s.push_str(&format!("{w}\t{}\n", cells.join("\t")));
        }
        s
    }

    fn parse(text: &str, format: EmotionFormat) -> Result<Parsed> {
        let cols = ColumnMap::identity(&format);
        let opts = ParseOptions {
            language: "en".into(),
            source_id: "test".into(),
            ..Default::default()
        };
        parse_lexicon(text.as_bytes(), &format, &cols, &opts)
    }

    #[test]
    fn parses_three_rows() {
        let tsv = vad_tsv(&[
            ("sunshine", [8.1, 5.3, 5.4]),
            ("terrorism", [1.6, 7.4, 2.7]),
            ("orgasm", [8.0, 7.2, 5.8]),
        ]);
        let p = parse(&tsv, EmotionFormat::vad()).unwrap();
        assert_eq!(p.lexicon.len(), 3);
        assert_eq!(p.lexicon.get("terrorism"), Some(&[1.6, 7.4, 2.7][..]));
        assert!(p.warnings.is_empty());
    }

    #[test]
    fn missing_column_is_named() {
        let tsv = "word\tvalence\tdominance\nx\t1\t1\n";
        match parse(tsv, EmotionFormat::vad()) {
            Err(Error::Config(msg)) => assert!(msg.contains("arousal"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicates_are_averaged_with_warning() {
        let tsv = vad_tsv(&[("a", [2.0, 2.0, 2.0]), ("a", [4.0, 4.0, 4.0])]);
        let p = parse(&tsv, EmotionFormat::vad()).unwrap();
        assert_eq!(p.lexicon.len(), 1);
        assert_eq!(p.lexicon.get("a"), Some(&[3.0, 3.0, 3.0][..]));
        assert_eq!(p.warnings.len(), 1);
        assert_eq!(p.warnings[0].kind, DiagnosticKind::DuplicateWord);
        assert_eq!(p.warnings[0].row, 3);
    }

    #[test]
    fn non_numeric_cell_reports_row() {
        let tsv = "word\tvalence\tarousal\tdominance\na\t1\t2\t3\nb\t1\tx\t3\n";
        match parse(tsv, EmotionFormat::vad()) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn out_of_range_fails_unless_clamped() {
        let tsv = vad_tsv(&[("a", [9.5, 2.0, 2.0])]);
        match parse(&tsv, EmotionFormat::vad()) {
            Err(Error::Validation { row, word, .. }) => assert_eq!((row, word.as_str()), (2, "a")),
            other => panic!("unexpected {other:?}"),
        }
        let format = EmotionFormat::vad();
        let opts = ParseOptions {
            clamp: true,
            ..Default::default()
        };
        let p = parse_lexicon(tsv.as_bytes(), &format, &ColumnMap::identity(&format), &opts)
            .unwrap();
        assert_eq!(p.lexicon.get("a").unwrap()[0], 9.0);
        assert_eq!(p.warnings[0].kind, DiagnosticKind::Clamped);
    }

    #[test]
    fn file_scale_is_mapped_onto_format_scale() {
        let format = EmotionFormat::be5();
        let tsv = "word\tjoy\tanger\tsadness\tfear\tdisgust\nw\t1\t2\t3\t4\t7\n";
        let opts = ParseOptions {
            file_scale: Some((1.0, 7.0)),
            ..Default::default()
        };
        let p = parse_lexicon(tsv.as_bytes(), &format, &ColumnMap::identity(&format), &opts)
            .unwrap();
        let r = p.lexicon.get("w").unwrap();
        assert_eq!(r[0], 1.0);
        assert_eq!(r[4], 5.0);
        assert!((r[3] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn crlf_and_custom_columns() {
        let format = EmotionFormat::va();
        let tsv = "Word\tV.Mean\tA.Mean\textra\r\n Café \t5\t6\tz\r\n";
        let cols = ColumnMap {
            word: "Word".into(),
            variables: [("valence", "V.Mean"), ("arousal", "A.Mean")]
                .into_iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
        };
        let p = parse_lexicon(tsv.as_bytes(), &format, &cols, &ParseOptions::default()).unwrap();
        // NFC: "Cafe\u{301}" and "Café" collapse to the same key.
        assert_eq!(canonical_word("Cafe\u{301}", false), "Café");
        assert_eq!(p.lexicon.get("Café"), Some(&[5.0, 6.0][..]));
        assert_eq!(canonical_word(" Café ", true), "café");
    }

    #[test]
    fn rescale_examples() {
        let tsv = "word\tjoy\tanger\tsadness\tfear\tdisgust\nw\t3\t1\t5\t2\t2\n";
        let lex = parse(tsv, EmotionFormat::be5()).unwrap().lexicon;
        let r = lex.rescale(1.0, 9.0).unwrap();
        assert_eq!(r.get("w"), Some(&[5.0, 1.0, 9.0, 3.0, 3.0][..]));
        assert_eq!(r.format().scale_high(), 9.0);
        assert!(lex.rescale(2.0, 2.0).is_err());
    }

    #[test]
    fn align_orders_by_source_and_rejects_disjoint() {
        let vad = parse(
            &vad_tsv(&[("c", [1.0; 3]), ("a", [2.0; 3]), ("b", [3.0; 3])]),
            EmotionFormat::vad(),
        )
        .unwrap()
        .lexicon;
        let be5 = parse(&be5_tsv(&[("a", [1.0; 5]), ("c", [2.0; 5])]), EmotionFormat::be5())
            .unwrap()
            .lexicon;
        let al = align(&vad, &be5).unwrap();
        assert_eq!(al.words(), ["c", "a"]);
        assert_eq!(al.target()[[0, 0]], 2.0);

        let other = parse(&be5_tsv(&[("z", [1.0; 5])]), EmotionFormat::be5())
            .unwrap()
            .lexicon;
        assert!(matches!(align(&vad, &other), Err(Error::EmptyAlignment { .. })));
        assert!(matches!(align(&vad, &vad), Err(Error::Config(_))));
    }

    #[test]
    fn project_and_concat() {
        let vad = parse(&vad_tsv(&[("a", [2.0, 3.0, 4.0])]), EmotionFormat::vad())
            .unwrap()
            .lexicon;
        let va = vad.project(&["valence", "arousal"]).unwrap();
        assert_eq!(va.format(), &EmotionFormat::va());
        assert_eq!(va.get("a"), Some(&[2.0, 3.0][..]));
        let be5 = parse(&be5_tsv(&[("a", [1.0; 5])]), EmotionFormat::be5())
            .unwrap()
            .lexicon;
        assert!(be5.project(&["surprise"]).is_err());

        let full = align(&vad, &be5).unwrap();
        let projected = full.project(&["valence", "arousal"]).unwrap();
        assert_eq!(projected.source_format().name(), "VA");
        let err = AlignedLexicon::concat(&[projected.clone(), full.clone()]);
        assert!(matches!(err, Err(Error::Config(_))));
        let both = AlignedLexicon::concat(&[projected.clone(), projected]).unwrap();
        assert_eq!(both.len(), 2);
    }
}
