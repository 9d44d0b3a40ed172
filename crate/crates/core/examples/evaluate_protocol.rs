//! Five seeded 80/20 runs per feature mode, averaged, in a results table.
//!
//! `cargo run --example evaluate_protocol`

use std::path::Path;

use hypernym::classifiers::LogRegParams;
use hypernym::embeddings::{self, EmbeddingConfig};
use hypernym::evaluation::{run_protocol, summary_table, ClassifierSpec, FeatureExperiment, LabeledTermSet, RunProtocol};
use hypernym::representation::{FeatureMode, SentenceVectorStore, TermEncoder};

pub fn run() -> hypernym::Result<()> {
    let toy = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/toy");
    let sentences = SentenceVectorStore::load(toy.join("sentence_vectors.vec"))?;
    let prospectus = std::fs::read_to_string(toy.join("prospectus.txt")).unwrap();
    let config = EmbeddingConfig { dimension: 32, window: 3, min_count: 2, buckets: 20_000, ..EmbeddingConfig::fasttext() };
    let words = embeddings::train(prospectus.lines(), &config)?;
    let data = LabeledTermSet::read_tsv(toy.join("terms.tsv"))?;
    let protocol = RunProtocol { base_seed: 42, ..Default::default() };

    let mut rows = Vec::new();
    for (name, mode, classifier) in [
        ("cosine (sentence)", FeatureMode::SentenceOnly, ClassifierSpec::Cosine),
        ("logreg sentence_only", FeatureMode::SentenceOnly, ClassifierSpec::Logreg(LogRegParams::default())),
        ("logreg word_only", FeatureMode::WordOnly, ClassifierSpec::Logreg(LogRegParams::default())),
        ("logreg fused", FeatureMode::Fused, ClassifierSpec::Logreg(LogRegParams::default())),
    ] {
        let experiment = FeatureExperiment { encoder: TermEncoder::new(Some(&sentences), Some(&words)), mode, classifier };
        let r = run_protocol(&data, &experiment, &protocol)?;
        println!("{name}: accuracy {:.3} ± {:.3}", r.accuracy.mean, r.accuracy.stddev);
        rows.push((name.to_string(), r.accuracy.mean, r.mean_rank.mean));
    }
    print!("{}", summary_table(&rows));
    Ok(())
}

#[allow(dead_code)]
fn main() -> hypernym::Result<()> {
    run()
}
