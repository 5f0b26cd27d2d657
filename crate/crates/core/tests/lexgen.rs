use emomap::lexgen::*;
use emomap::lexicon::Lexicon;
use emomap::regress::ModelSpec;
use emomap::{synthetic, Error};
use indexmap::IndexMap;

fn vad_lexicon(words: &[&str]) -> Lexicon {
    let entries: IndexMap<String, Vec<f64>> = words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.to_string(), vec![1.0 + i as f64, 9.0 - i as f64, 5.0]))
        .collect();
    Lexicon::new(emomap::format::EmotionFormat::vad(), entries, "en", "vad-src").unwrap()
}

fn be5_lexicon(words: &[&str], id: &str) -> Lexicon {
    let entries = words.iter().map(|w| (w.to_string(), vec![3.0; 5])).collect();
    Lexicon::new(emomap::format::EmotionFormat::be5(), entries, "en", id).unwrap()
}

fn job(exclusions: Vec<Lexicon>) -> LexiconBuildJob {
    LexiconBuildJob {
        mode: BuildMode::Monolingual,
        source_lexicon: vad_lexicon(&["sun", "rain", "storm", "calm", "ice"]),
        training: synthetic::additive(200, [1.0, 0.5, 0.3], 0.3, 1, "en").unwrap(),
        training_ids: vec!["syn".into()],
        model: ModelSpec::linear(),
        exclusion_sets: exclusions,
        seed: 3,
    }
}

#[test]
fn excludes_known_words_and_clamps() {
    let (lex, manifest) = build_lexicon(&job(vec![be5_lexicon(&["rain", "ice", "other"], "known")])).unwrap();
    let words: Vec<&str> = lex.words().collect();
    assert_eq!(words, ["sun", "storm", "calm"]);
    assert_eq!(manifest.output_count, 3);
    assert_eq!(manifest.excluded_total, 2);
    assert_eq!(manifest.excluded_counts[0].count, 2);
    assert_eq!(manifest.training_size, 200);
    assert!(lex.entries().values().flatten().all(|v| (1.0..=5.0).contains(v)));
    assert_eq!(lex.format().name(), "BE5");
    assert_eq!(manifest.output_digest, emomap::util::sha256_hex(render_lexicon(&lex).as_bytes()));
}

#[test]
fn full_exclusion_is_an_error() {
    let all = be5_lexicon(&["sun", "rain", "storm", "calm", "ice"], "all");
    assert!(matches!(build_lexicon(&job(vec![all])), Err(Error::EmptyOutput)));
}

#[test]
fn rebuild_is_byte_identical() {
    let a = build_lexicon(&job(vec![])).unwrap();
    let b = build_lexicon(&job(vec![])).unwrap();
    assert_eq!(render_lexicon(&a.0), render_lexicon(&b.0));
    assert_eq!(a.1, b.1);
}

#[test]
fn crosslingual_source_is_projected_to_training_variables() {
    let mut j = job(vec![]);
    j.mode = BuildMode::Crosslingual;
    j.training = emomap::experiments::without_dominance(&j.training).unwrap();
    let (lex, manifest) = build_lexicon(&j).unwrap();
    assert_eq!(lex.len(), 5);
    assert_eq!(manifest.mode, BuildMode::Crosslingual);
}
