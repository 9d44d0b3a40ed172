//! Drive every stage from the toy configuration file, as the `hypernym`
//! binary does, into a temporary output directory.
//!
//! `cargo run --example toy_pipeline`

use std::path::Path;

use hypernym::pipeline::{self, parse_override, PipelineConfig, WordModel};

pub fn run() -> hypernym::Result<()> {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/toy/toy.toml");
    let out = tempfile::tempdir().expect("temp dir");
    let overrides = [
        parse_override(&format!("paths.output_dir={:?}", out.path().display().to_string()))?,
        parse_override("predict.top_k=3")?,
    ];
    let cfg = PipelineConfig::load(Some(&config), &overrides)?;
    println!("config digest {}", cfg.digest());

    println!("{}", pipeline::extract(&cfg)?.display());
    println!("{}", pipeline::pairs(&cfg)?.all.display());
    println!("{}", pipeline::train_word(&cfg, Some(WordModel::FastText))?.display());
    println!("{}", pipeline::train_clf(&cfg)?.display());
    let preds = pipeline::predict(&cfg)?;
    for line in std::fs::read_to_string(&preds).unwrap().lines().take(3) {
        println!("  {line}");
    }
    let report = pipeline::evaluate(&cfg, None)?;
    print!("{}", report.report.to_text());
    Ok(())
}

#[allow(dead_code)]
fn main() -> hypernym::Result<()> {
    run()
}
