//! Mine seed-concept definitions from the bundled toy ontology dump.
//!
//! `cargo run --example mine_ontology`

use std::path::Path;

use hypernym::ontology::{self, MineOptions};
use hypernym::Tag;

fn fixture(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/toy").join(name)
}

pub fn run() -> hypernym::Result<()> {
    let dump = ontology::load_dump(fixture("ontology.jsonl"))?;
    println!("{} records, {} dangling links", dump.records.len(), dump.dangling.len());

    let seeds: Vec<Tag> = ["Bonds", "Swap", "Stocks"].iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
    let mined = ontology::mine(&dump.records, &seeds, MineOptions::default())?;

    for (tag, n) in mined.corpus.per_tag_counts() {
        println!("{tag:<8} {n} definitions");
    }
    for c in &mined.conflicts {
        println!("{} reached from {:?}, kept {}", c.iri, c.candidates, c.chosen);
    }
    let deepest = mined.corpus.entries.iter().map(|e| e.depth).max().unwrap_or(0);
    assert!(deepest <= 2);
    assert!(!mined.corpus.entries.iter().any(|e| e.text.starts_with("DECOY")));

    let mut tsv = Vec::new();
    mined.corpus.write_tsv(&mut tsv).expect("write to memory");
    for line in String::from_utf8_lossy(&tsv).lines().take(4) {
        println!("{line}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> hypernym::Result<()> {
    run()
}
