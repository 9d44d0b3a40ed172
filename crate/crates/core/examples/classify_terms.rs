//! Rank the 17 tags for toy terms with cosine similarity, logistic
//! regression and a random forest; save and reload a model.
//!
//! `cargo run --example classify_terms`

use std::path::Path;

use hypernym::classifiers::{
    cosine_rank, train_forest, train_logreg, Classifier, ForestParams, LogRegParams, ModelContainer, Ranker,
};
use hypernym::embeddings::{self, EmbeddingConfig};
use hypernym::evaluation::LabeledTermSet;
use hypernym::representation::{FeatureMode, SentenceVectorStore, TermEncoder};
use hypernym::Tag;

pub fn run() -> hypernym::Result<()> {
    let toy = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/toy");
    let sentences = SentenceVectorStore::load(toy.join("sentence_vectors.vec"))?;
    let prospectus = std::fs::read_to_string(toy.join("prospectus.txt")).unwrap();
    let config = EmbeddingConfig { dimension: 32, window: 3, min_count: 2, buckets: 20_000, ..EmbeddingConfig::fasttext() };
    let words = embeddings::train(prospectus.lines(), &config)?;
    let terms = LabeledTermSet::read_tsv(toy.join("terms.tsv"))?;

    let enc = TermEncoder::new(Some(&sentences), Some(&words));
    let x = terms
        .entries
        .iter()
        .map(|e| enc.encode(&e.term, FeatureMode::Fused))
        .collect::<hypernym::Result<Vec<_>>>()?;
    let y = terms.golds();

    let labels = enc.label_vectors(&Tag::all_vec())?;
    let cos = cosine_rank(&enc.encode("preferred share", FeatureMode::SentenceOnly)?, &labels)?;
    println!("cosine top-3 for `preferred share`: {:?}", &cos.ranking[..3]);
    assert_eq!(cos.ranking.len(), 17);

    let (logreg, r) = train_logreg(&x, &y, &LogRegParams::default())?;
    println!("logreg train accuracy {:.3}, loss {:.4}", r.train_accuracy, r.final_loss);
    let (forest, r) = train_forest(&x, &y, &ForestParams { num_trees: 25, ..Default::default() })?;
    println!("forest train accuracy {:.3}, out-of-bag {:?}", r.train_accuracy, r.oob_accuracy);

    // The last term has no sentence vector; fall back to zeros for it.
    let enc = TermEncoder { missing_fallback: true, ..enc };
    for term in ["floating leg", "voting share", "zero coupon debenture"] {
        let p = logreg.rank(&enc.encode(term, FeatureMode::Fused)?)?.with_term(term);
        let top: Vec<String> = p.ranking[..3].iter().map(|(t, s)| format!("{t} {s:.2}")).collect();
        println!("{term:<24} {}", top.join(", "));
    }

    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("model.json");
    ModelContainer::new(Classifier::Forest(forest.clone()), FeatureMode::Fused).save(&path)?;
    let loaded = ModelContainer::load(&path)?;
    assert_eq!(loaded.model, Classifier::Forest(forest));
    Ok(())
}

#[allow(dead_code)]
fn main() -> hypernym::Result<()> {
    run()
}
