//! Crawl concept pages into the JSONL dump format from an in-memory site,
//! then mine it. Swap `MapSource` for `HttpSource` to crawl a live site.
//!
//! `cargo run --example offline_fetch`

use std::collections::HashMap;

use hypernym::ontology::{self, fetch_pages, FetchOptions, MineOptions, PageSource, SeedPage};
use hypernym::{Error, Tag};

struct MapSource(HashMap<String, String>);

impl PageSource for MapSource {
    fn get(&mut self, url: &str) -> hypernym::Result<String> {
        self.0.get(url).cloned().ok_or_else(|| Error::Fetch { url: url.into(), message: "not found".into() })
    }
}

fn page(label: &str, definition: &str, subclasses: &[&str]) -> String {
    let links: String = subclasses.iter().map(|s| format!("<li><a href=\"{s}\">{s}</a></li>")).collect();
    format!(
        "<html><body><h1>{label}</h1><dl>\
         <dt>Definition</dt><dd>{definition}</dd>\
         <dt>Synonyms</dt><dd><ul><li>{label} instrument</li></ul></dd>\
         <dt>Direct Subclasses</dt><dd><ul>{links}</ul></dd></dl></body></html>"
    )
}

pub fn run() -> hypernym::Result<()> {
    let base = "http://ontology.example/fin/";
    let site = [
        ("Option", page("option", "A contract giving the right but not the obligation to trade.", &["CallOption", "PutOption"])),
        ("CallOption", page("call option", "An option to buy the underlying.", &["BarrierCall"])),
        ("PutOption", page("put option", "An option to sell the underlying.", &[])),
        ("BarrierCall", page("barrier call", "A call that activates at a barrier level.", &["DeepBarrierCall"])),
        ("DeepBarrierCall", page("deep barrier call", "Never fetched: three levels down.", &[])),
    ];
    let mut source = MapSource(site.into_iter().map(|(k, v)| (format!("{base}{k}"), v)).collect());

    let dir = tempfile::tempdir().expect("temp dir");
    let dump = dir.path().join("dump.jsonl");
    let option = Tag::from_name("Option").unwrap();
    let seeds = [SeedPage { tag: option, url: format!("{base}Option") }];
    fetch_pages(&mut source, &seeds, &dump, FetchOptions::default())?;
    // A second crawl finds every page already in the dump.
    fetch_pages(&mut MapSource(HashMap::new()), &seeds, &dump, FetchOptions::default())?;

    let loaded = ontology::load_dump(&dump)?;
    println!("{} pages in the dump", loaded.records.len());
    let corpus = ontology::mine(&loaded.records, &[option], MineOptions::default())?.corpus;
    for e in &corpus.entries {
        println!("{} {:<12} {}", e.depth, e.property.as_str(), e.text);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> hypernym::Result<()> {
    run()
}
