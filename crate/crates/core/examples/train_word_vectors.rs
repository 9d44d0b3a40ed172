//! Train skip-gram vectors with and without character n-grams, inspect
//! neighbours, compose an unseen word and round-trip the text format.
//!
//! `cargo run --example train_word_vectors`

use std::path::Path;

use hypernym::embeddings::{self, cosine, nearest, word_vector, EmbeddingConfig, VectorSource};

pub fn run() -> hypernym::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/two_cluster.txt");
    let text = std::fs::read_to_string(&path).map_err(|e| hypernym::Error::Io { path, source: e })?;

    let config = EmbeddingConfig {
        dimension: 24,
        window: 3,
        min_count: 1,
        epochs: 5,
        buckets: 5000,
        ngram_min: 2,
        ngram_max: 3,
        ..EmbeddingConfig::fasttext()
    };
    let (table, report) = embeddings::train_with_report(text.lines(), &config)?;
    println!("{} words, {} subword rows, loss {:.3}", report.vocab_size, report.bucket_rows, report.final_loss);

    let a1 = table.get("a1").unwrap();
    for (word, sim) in nearest(&table, a1, 4) {
        println!("  a1 ~ {word}: {sim:.3}");
    }
    println!("cos(a1, a2) = {:.3}, cos(a1, b1) = {:.3}", cosine(a1, table.get("a2").unwrap()), cosine(a1, table.get("b1").unwrap()));

    let oov = word_vector(&table, "a12");
    match oov.source {
        VectorSource::Subwords { known, total } => println!("`a12` composed from {known}/{total} n-grams"),
        other => println!("`a12`: {other:?}"),
    }

    let plain = embeddings::train(text.lines(), &EmbeddingConfig { subwords_enabled: false, ..config.clone() })?;
    println!("without subwords `a12` is {:?}", word_vector(&plain, "a12").source);

    let dir = tempfile::tempdir().expect("temp dir");
    let file = dir.path().join("vectors.vec");
    embeddings::save_w2v(&table, &file, None)?;
    let back = embeddings::load_w2v(&file)?;
    assert_eq!(back.get("b3"), table.get("b3"));
    assert_eq!(back.compose("a12"), table.compose("a12"));
    Ok(())
}

#[allow(dead_code)]
fn main() -> hypernym::Result<()> {
    run()
}
