//! Build term features: sentence vector, padded word-vector sum, or both
//! added together.
//!
//! `cargo run --example phrase_fusion`

use std::path::Path;

use hypernym::embeddings::{self, EmbeddingConfig};
use hypernym::representation::{fuse, pad, FeatureMode, SentenceVectorStore, TermEncoder, SENTENCE_DIM};

pub fn run() -> hypernym::Result<()> {
    let toy = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/toy");
    let sentences = SentenceVectorStore::load(toy.join("sentence_vectors.vec"))?;
    let prospectus = std::fs::read_to_string(toy.join("prospectus.txt")).unwrap();
    let config = EmbeddingConfig {
        dimension: 32,
        window: 3,
        min_count: 2,
        epochs: 5,
        buckets: 20_000,
        ..EmbeddingConfig::fasttext()
    };
    let words = embeddings::train(prospectus.lines(), &config)?;

    let enc = TermEncoder::new(Some(&sentences), Some(&words));
    let term = "callable debenture";
    let s = enc.encode(term, FeatureMode::SentenceOnly)?;
    let w = enc.encode(term, FeatureMode::WordOnly)?;
    let f = enc.encode(term, FeatureMode::Fused)?;
    println!("{term}: {} sentence dims, {} word dims padded to {SENTENCE_DIM}", s.len(), words.dim());
    assert!(f.iter().zip(s.iter().zip(&w)).all(|(f, (s, w))| *f == s + w));
    assert!(w[words.dim()..].iter().all(|&x| x == 0.0));

    let direct = fuse(&s, &enc.word_part(term)?)?;
    assert_eq!(direct, f);
    println!("first components: sentence {:.4}, word {:.4}, fused {:.4}", s[0], w[0], f[0]);
    println!("pad([1, 2], 4) = {:?}", pad(&[1.0, 2.0], 4)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> hypernym::Result<()> {
    run()
}
