//! Compare the label mix of the training terms with the tag mix of the
//! mined definitions.
//!
//! `cargo run --example imbalance_report`

use std::path::Path;

use hypernym::evaluation::{distribution_report, LabeledTermSet};
use hypernym::ontology::{self, MineOptions};
use hypernym::Tag;

pub fn run() -> hypernym::Result<()> {
    let toy = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/toy");
    let dump = ontology::load_dump(toy.join("ontology.jsonl"))?;
    let seeds = ["Bonds", "Swap", "Stocks"].map(|s| Tag::from_name(s).unwrap());
    let corpus = ontology::mine(&dump.records, &seeds, MineOptions::default())?.corpus;
    let train = LabeledTermSet::read_tsv(toy.join("terms.tsv"))?;

    let report = distribution_report(&train, &corpus);
    print!("{}", report.to_text());
    let train_total: f64 = report.labels.iter().map(|l| l.train_percent).sum();
    let corpus_total: f64 = report.labels.iter().map(|l| l.corpus_percent).sum();
    assert!((train_total - 100.0).abs() < 0.01 && (corpus_total - 100.0).abs() < 0.01);

    let widest = report
        .labels
        .iter()
        .max_by(|a, b| (a.corpus_percent - a.train_percent).abs().total_cmp(&(b.corpus_percent - b.train_percent).abs()))
        .unwrap();
    println!("largest gap: {} ({:.1}% of terms vs {:.1}% of definitions)", widest.tag, widest.train_percent, widest.corpus_percent);
    Ok(())
}

#[allow(dead_code)]
fn main() -> hypernym::Result<()> {
    run()
}
