//! Turn mined definitions into scored sentence/tag pairs for a sentence
//! encoder, split 70/10/20 by definition.
//!
//! `cargo run --example pair_dataset`

use std::path::Path;

use hypernym::ontology::{self, DefinitionCorpus, MineOptions};
use hypernym::text::{build_pairs, preprocess, split, SplitSpec, DEFAULT_NEGATIVE, DEFAULT_POSITIVE};
use hypernym::Tag;

pub fn run() -> hypernym::Result<()> {
    let dump = ontology::load_dump(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/toy/ontology.jsonl"))?;
    let seeds = ["Bonds", "Swap", "Stocks"].map(|s| Tag::from_name(s).unwrap());
    let corpus = ontology::mine(&dump.records, &seeds, MineOptions::default())?.corpus;

    let sentences: usize = corpus.entries.iter().map(|e| preprocess(&e.text).len()).sum();
    let pairs = build_pairs(&corpus, &Tag::all_vec(), DEFAULT_POSITIVE, DEFAULT_NEGATIVE)?;
    let positives = pairs.pairs.iter().filter(|p| p.score == DEFAULT_POSITIVE).count();
    println!("{sentences} sentences -> {} pairs ({positives} positive)", pairs.len());
    assert_eq!(pairs.len(), 17 * sentences);
    assert_eq!(positives, sentences);

    let parts = split(corpus.entries.clone(), &SplitSpec::encoder_default(7))?;
    for (name, entries) in [("train", parts.train), ("dev", parts.dev), ("test", parts.test)] {
        let set = build_pairs(&DefinitionCorpus { entries }, &Tag::all_vec(), DEFAULT_POSITIVE, DEFAULT_NEGATIVE)?;
        println!("{name:<5} {} pairs", set.len());
    }

    let mut out = Vec::new();
    pairs.write_tsv(&mut out).expect("write to memory");
    for line in String::from_utf8_lossy(&out).lines().take(4) {
        println!("{line}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> hypernym::Result<()> {
    run()
}
