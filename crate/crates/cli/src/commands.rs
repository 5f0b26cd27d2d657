use std::fs;
use std::path::{Path, PathBuf};

use emomap::experiments::{
    render, run_ablation, run_crosslingual, run_monolingual, without_dominance, AblationReport, CvOptions,
    Dataset, Direction,
};
use emomap::format::DOMINANCE;
use emomap::lexgen::{build_lexicon, render_lexicon, BuildMode, LexiconBuildJob};
use emomap::lexicon::{parse_lexicon, AlignedLexicon, ColumnMap, ParseOptions};
use emomap::regress::gradcheck::{gradient_check, random_problem};
use emomap::regress::serialize::{load_model, save_model};
use emomap::regress::{FfnnConfig, Learner, ModelSpec};
use emomap::stats::format_reliability_records;
use emomap::util::{derive_seed, format_fixed3, sha256_hex};
use indexmap::IndexMap;
use serde::Serialize;
use serde_json::json;

use crate::failure::Failure;
use crate::inputs::{load_lexicon, load_records, Digests, ErrorRecord, Inputs};
use crate::manifest::Loaded;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Collects output files so they can be listed with digests in the run
/// metadata.
struct Outputs {
    dir: PathBuf,
    written: IndexMap<String, String>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| Failure::io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: IndexMap::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), Failure> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Failure::io(format!("{}: {e}", parent.display())))?;
        }
        fs::write(&path, contents).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
        self.written.insert(name.to_string(), sha256_hex(contents.as_bytes()));
        eprintln!("wrote {}", path.display());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        self.write(name, &render::to_json(value)?)
    }
}

#[derive(Serialize)]
struct RunMetadata<'a> {
    tool: &'static str,
    version: &'static str,
    task: &'a str,
    manifest_digest: &'a str,
    overrides: &'a [String],
    seed: u64,
    input_digests: &'a Digests,
    output_digests: &'a IndexMap<String, String>,
}

fn finish(loaded: &Loaded, task: &str, digests: &Digests, mut out: Outputs) -> Result<(), Failure> {
    let written = out.written.clone();
    let meta = RunMetadata {
        tool: "emomap",
        version: TOOL_VERSION,
        task,
        manifest_digest: &loaded.digest,
        overrides: &loaded.overrides,
        seed: loaded.manifest.seed,
        input_digests: digests,
        output_digests: &written,
    };
    out.write_json(&format!("run_metadata_{task}.json"), &meta)
}

#[derive(Serialize)]
struct Diagnostics {
    ok: bool,
    errors: Vec<ErrorRecord>,
    warnings: Vec<serde_json::Value>,
    lexicons: Vec<serde_json::Value>,
    datasets: Vec<serde_json::Value>,
}

/// Parses every input and checks every invariant, collecting all problems
/// rather than stopping at the first. Returns the exit code.
pub fn validate(loaded: &Loaded) -> Result<u8, Failure> {
    let m = &loaded.manifest;
    let mut digests = Digests::new();
    let mut diag = Diagnostics {
        ok: true,
        errors: Vec::new(),
        warnings: Vec::new(),
        lexicons: Vec::new(),
        datasets: Vec::new(),
    };
    let mut lexicons = IndexMap::new();
    for entry in &m.lexicons {
        match load_lexicon(loaded, entry, &mut digests) {
            Ok(l) => {
                for w in &l.warnings {
                    diag.warnings.push(json!({
                        "source": format!("lexicon {}", entry.id),
                        "row": w.row,
                        "word": w.word,
                        "kind": w.kind,
                        "message": w.message,
                    }));
                }
                diag.lexicons.push(json!({
                    "id": entry.id,
                    "format": l.lexicon.format().name(),
                    "language": l.lexicon.language(),
                    "entries": l.lexicon.len(),
                }));
                lexicons.insert(entry.id.clone(), l.lexicon);
            }
            Err(f) => diag.errors.push(ErrorRecord::from_failure(format!("lexicon {}", entry.id), &f)),
        }
    }
    for d in &m.datasets {
        let source = format!("dataset {}", d.id);
        let (Some(a), Some(b)) = (lexicons.get(&d.source), lexicons.get(&d.target)) else {
            let missing: Vec<&str> = [&d.source, &d.target]
                .into_iter()
                .filter(|id| !m.lexicons.iter().any(|l| &l.id == *id))
                .map(String::as_str)
                .collect();
            if !missing.is_empty() {
                let f = Failure::validation(format!("unknown lexicon(s) {missing:?}"));
                diag.errors.push(ErrorRecord::from_failure(source, &f));
            }
            continue;
        };
        match emomap::lexicon::align_with(a, b, d.allow_language_mismatch) {
            Ok(al) => diag.datasets.push(json!({
                "id": d.id,
                "rows": al.len(),
                "language": al.language(),
                "source_format": al.source_format().name(),
                "target_format": al.target_format().name(),
            })),
            Err(e) => diag.errors.push(ErrorRecord::from_failure(source, &Failure::from(e))),
        }
    }
    if let Err(f) = load_records(loaded, &mut digests) {
        diag.errors.push(ErrorRecord::from_failure("reliability".into(), &f));
    }
    for b in &m.build {
        if let Err(f) = loaded.model(&b.model) {
            diag.errors.push(ErrorRecord::from_failure(format!("build {}", b.id), &f));
        }
    }
    diag.ok = diag.errors.is_empty();
    for e in &diag.errors {
        eprintln!("error: {}: {}", e.source, e.message);
    }
    let code = if diag.errors.iter().any(|e| e.code == Failure::IO) {
        Failure::IO
    } else if diag.ok {
        0
    } else {
        Failure::VALIDATION
    };
    let mut out = Outputs::new(&m.output_dir)?;
    out.write_json("diagnostics.json", &diag)?;
    Ok(code)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Task {
    Monolingual,
    Crosslingual,
    Ablation,
    ShrNormalize,
    BuildLexicon,
}

impl Task {
    fn name(self) -> &'static str {
        match self {
            Task::Monolingual => "monolingual",
            Task::Crosslingual => "crosslingual",
            Task::Ablation => "ablation",
            Task::ShrNormalize => "shr-normalize",
            Task::BuildLexicon => "build-lexicon",
        }
    }
}

fn default_models() -> Vec<ModelSpec> {
    vec![ModelSpec::linear(), ModelSpec::knn(), ModelSpec::ffnn()]
}

fn models(loaded: &Loaded) -> Vec<ModelSpec> {
    if loaded.manifest.models.is_empty() {
        default_models()
    } else {
        loaded.manifest.models.clone()
    }
}

fn find_model(loaded: &Loaded, name: &str) -> Result<ModelSpec, Failure> {
    models(loaded)
        .into_iter()
        .find(|m| m.name == name)
        .ok_or_else(|| Failure::validation(format!("unknown model {name:?}")))
}

pub fn run(loaded: &Loaded, task: Task) -> Result<(), Failure> {
    let m = &loaded.manifest;
    let mut out = Outputs::new(&m.output_dir)?;
    if task == Task::ShrNormalize {
        let mut digests = Digests::new();
        if m.reliability.is_none() {
            return Err(Failure::validation("manifest has no reliability file"));
        }
        let records = load_records(loaded, &mut digests)?;
        out.write("reliability_normalized.tsv", &format_reliability_records(&records))?;
        return finish(loaded, task.name(), &digests, out);
    }
    let inputs = Inputs::load(loaded)?;
    let mut digests = inputs.digests.clone();
    let opts = CvOptions {
        seed: m.seed,
        k_folds: m.k_folds,
    };
    match task {
        Task::Monolingual => {
            let records = load_records(loaded, &mut digests)?;
            let datasets = inputs.select(m.monolingual.datasets.as_deref())?;
            let specs = match &m.monolingual.models {
                Some(names) => names.iter().map(|n| find_model(loaded, n)).collect::<Result<Vec<_>, _>>()?,
                None => models(loaded),
            };
            let learners: Vec<&dyn Learner> = specs.iter().map(|s| s as &dyn Learner).collect();
            let reports = run_monolingual(&datasets, &learners, &records, &opts)?;
            out.write_json(
                "monolingual.json",
                &render::MonolingualDocument {
                    protocol: "monolingual",
                    seed: m.seed,
                    k_folds: m.k_folds,
                    t_test_series: render::T_TEST_SERIES,
                    headline_r: render::HEADLINE_R,
                    reports: &reports,
                },
            )?;
            out.write("monolingual.tsv", &render::monolingual_table(&reports))?;
        }
        Task::Crosslingual => {
            let records = load_records(loaded, &mut digests)?;
            let datasets = inputs.select(m.crosslingual.datasets.as_deref())?;
            let all = models(loaded);
            let spec = match &m.crosslingual.model {
                Some(name) => find_model(loaded, name)?,
                None => all
                    .iter()
                    .find(|s| s.name == "FFNN")
                    .unwrap_or(&all[0])
                    .clone(),
            };
            let reports = run_crosslingual(&datasets, &spec, &records, m.seed)?;
            out.write_json(
                "crosslingual.json",
                &render::CrosslingualDocument {
                    protocol: "crosslingual",
                    seed: m.seed,
                    reports: &reports,
                },
            )?;
            out.write("crosslingual.tsv", &render::variable_table(&reports))?;
        }
        Task::Ablation => {
            let datasets: Vec<Dataset> = match &m.ablation.datasets {
                Some(ids) => inputs.select(Some(ids))?,
                None => inputs
                    .datasets
                    .iter()
                    .filter(|d| {
                        d.data.source_format().position(DOMINANCE).is_some()
                            || d.data.target_format().position(DOMINANCE).is_some()
                    })
                    .cloned()
                    .collect(),
            };
            let directions = m.ablation.directions.clone().unwrap_or(Direction::BOTH.to_vec());
            let reports = directions
                .iter()
                .map(|&d| run_ablation(&datasets, d, &opts))
                .collect::<Result<Vec<AblationReport>, _>>()?;
            out.write_json(
                "ablation.json",
                &render::AblationDocument {
                    protocol: "ablation",
                    seed: m.seed,
                    k_folds: m.k_folds,
                    reports: &reports,
                },
            )?;
            out.write("ablation.tsv", &render::ablation_table(&reports))?;
        }
        Task::BuildLexicon => {
            if m.build.is_empty() {
                return Err(Failure::validation("manifest has no [[build]] jobs"));
            }
            for b in &m.build {
                let source = inputs.lexicon(&b.source)?.clone();
                let direction = Direction::from_source(source.format());
                let parts = b
                    .training
                    .iter()
                    .map(|id| {
                        let data = inputs.dataset(id)?.oriented(direction)?;
                        Ok(match b.mode {
                            BuildMode::Monolingual => data,
                            BuildMode::Crosslingual => without_dominance(&data)?,
                        })
                    })
                    .collect::<Result<Vec<_>, Failure>>()?;
                let job = LexiconBuildJob {
                    mode: b.mode,
                    source_lexicon: source,
                    training: AlignedLexicon::concat(&parts)?,
                    training_ids: b.training.clone(),
                    model: find_model(loaded, &b.model)?,
                    exclusion_sets: b
                        .exclude
                        .iter()
                        .map(|id| inputs.lexicon(id).cloned())
                        .collect::<Result<_, _>>()?,
                    seed: derive_seed(m.seed, &["build", &b.id]),
                };
                let (lexicon, manifest) = build_lexicon(&job).map_err(|e| Failure::from(e).context(&format!("build {}", b.id)))?;
                out.write(&b.output.display().to_string(), &render_lexicon(&lexicon))?;
                out.write_json(&format!("{}.build.json", b.id), &manifest)?;
            }
        }
        Task::ShrNormalize => unreachable!("handled above"),
    }
    finish(loaded, task.name(), &digests, out)
}

pub struct GradientCheckArgs {
    pub hidden: Vec<usize>,
    pub samples: usize,
    pub inputs: usize,
    pub outputs: usize,
    pub networks: usize,
    pub seed: u64,
    pub tolerance: f64,
}

pub fn gradient_check_cmd(a: &GradientCheckArgs) -> Result<(), Failure> {
    if a.samples == 0 || a.inputs == 0 || a.outputs == 0 {
        return Err(Failure::usage("samples, inputs and outputs must be positive"));
    }
    let mut worst: f64 = 0.0;
    for i in 0..a.networks {
        let seed = derive_seed(a.seed, &["gradient-check", &i.to_string()]);
        let (x, y) = random_problem(a.samples, a.inputs, a.outputs, seed);
        let cfg = FfnnConfig {
            hidden_sizes: a.hidden.clone(),
            dropout: 0.0,
            seed,
            ..FfnnConfig::default()
        };
        let err = gradient_check(&cfg, x.view(), y.view())?;
        println!("network {i}: max relative error {err:.3e}");
        worst = worst.max(err);
    }
    if worst < a.tolerance {
        println!("ok: {worst:.3e} < {:.1e}", a.tolerance);
        Ok(())
    } else {
        Err(Failure {
            code: Failure::NUMERIC,
            message: format!("gradient check failed: {worst:.3e} >= {:.1e}", a.tolerance),
            cause: None,
        })
    }
}

pub fn model_save(loaded: &Loaded, dataset: &str, direction: Direction, model: &str, output: &Path) -> Result<(), Failure> {
    let inputs = Inputs::load(loaded)?;
    let data = inputs.dataset(dataset)?.oriented(direction)?;
    let spec = find_model(loaded, model)?;
    let seed = derive_seed(loaded.manifest.seed, &["model", dataset, direction.as_str(), model]);
    let fitted = spec.fit(&data, seed)?;
    save_model(&fitted, output)?;
    eprintln!("wrote {}", output.display());
    Ok(())
}

pub fn model_load(path: &Path) -> Result<(), Failure> {
    let model = load_model(path)?;
    let kind = serde_json::to_value(&model)
        .ok()
        .and_then(|v| v.get("kind").and_then(|k| k.as_str().map(str::to_string)))
        .unwrap_or_default();
    let summary = json!({
        "kind": kind,
        "source_format": model.source_format().map(|f| f.to_string()),
        "target_format": model.target_format().to_string(),
    });
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    Ok(())
}

/// Predicts every word of a lexicon in the model's source format. Output is
/// not clamped.
pub fn model_predict(path: &Path, input: &Path, lowercase: bool, output: Option<&Path>) -> Result<(), Failure> {
    let model = load_model(path)?;
    let source = model
        .source_format()
        .ok_or_else(|| Failure::validation("model was trained on features, not ratings"))?
        .clone();
    let bytes = fs::read(input).map_err(|e| Failure::io(format!("{}: {e}", input.display())))?;
    let opts = ParseOptions {
        source_id: input.display().to_string(),
        lowercase,
        ..ParseOptions::default()
    };
    let lex = parse_lexicon(&bytes, &source, &ColumnMap::identity(&source), &opts)?.lexicon;
    let words: Vec<&str> = lex.words().collect();
    let x = ndarray::Array2::from_shape_fn((words.len(), source.dim()), |(i, j)| lex.get(words[i]).expect("word present")[j]);
    let pred = model.predict(x.view())?;
    let mut order: Vec<usize> = (0..words.len()).collect();
    order.sort_by(|&a, &b| words[a].cmp(words[b]));
    let mut text = format!("word\t{}\n", model.target_format().variables().join("\t"));
    for i in order {
        text.push_str(words[i]);
        for v in pred.row(i) {
            text.push('\t');
            text.push_str(&format_fixed3(*v));
        }
        text.push('\n');
    }
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Failure::io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
