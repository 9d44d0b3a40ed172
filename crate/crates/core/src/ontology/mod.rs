//! Ontology dumps and the definition corpus mined from them.
//!
//! A dump is UTF-8 JSONL, one concept page per line:
//!
//! ```text
//! {"iri":"fibo:Bond","label":"Bonds","definition":"a debt instrument ...",
//!  "explanatory_note":null,"generated_description":null,"synonyms":[],
//!  "subclasses":["fibo:CallableBond"],"instances":[]}
//! ```
//!
//! Absent keys mean empty.

mod fetch;
mod mine;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use fetch::{fetch_pages, parse_page, FetchOptions, HttpSource, PageSource, SeedPage};
pub use mine::{mine, Conflict, MineOptions, Mined};

use crate::error::{Error, Result};
use crate::tags::Tag;
use crate::tsv;

/// One concept page of the ontology.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OntologyRecord {
    pub iri: String,
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub definition: Option<String>,
    #[serde(default)]
    pub explanatory_note: Option<String>,
    #[serde(default)]
    pub generated_description: Option<String>,
    #[serde(default)]
    pub synonyms: Vec<String>,
    #[serde(default)]
    pub subclasses: Vec<String>,
    #[serde(default)]
    pub instances: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    Subclass,
    Instance,
}

/// A subclass or instance link whose target is not in the dump.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DanglingRef {
    pub from: String,
    pub to: String,
    pub kind: LinkKind,
}

#[derive(Clone, Debug, Default)]
pub struct LoadedDump {
    pub records: Vec<OntologyRecord>,
    pub dangling: Vec<DanglingRef>,
}

pub fn load_dump(path: impl AsRef<Path>) -> Result<LoadedDump> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dump(&text, path)
}

/// Parses dump text; `origin` is only used in error messages.
pub fn parse_dump(text: &str, origin: &Path) -> Result<LoadedDump> {
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: OntologyRecord =
            serde_json::from_str(line).map_err(|e| Error::parse(origin, i + 1, e.to_string()))?;
        if !seen.insert(record.iri.clone()) {
            return Err(Error::DuplicateIri(record.iri));
        }
        records.push(record);
    }

    let dangling = dangling_refs(&records);
    for d in &dangling {
        log::warn!("dangling {:?} link {} -> {}", d.kind, d.from, d.to);
    }
    Ok(LoadedDump { records, dangling })
}

fn dangling_refs(records: &[OntologyRecord]) -> Vec<DanglingRef> {
    let known: HashSet<&str> = records.iter().map(|r| r.iri.as_str()).collect();
    let mut out = Vec::new();
    for r in records {
        let links = r
            .subclasses
            .iter()
            .map(|t| (t, LinkKind::Subclass))
            .chain(r.instances.iter().map(|t| (t, LinkKind::Instance)));
        for (to, kind) in links {
            if !known.contains(to.as_str()) {
                out.push(DanglingRef {
                    from: r.iri.clone(),
                    to: to.clone(),
                    kind,
                });
            }
        }
    }
    out
}

/// Which textual property of a record a mined text came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Definition,
    ExplanatoryNote,
    GeneratedDescription,
    Synonym,
}

impl Property {
    pub fn as_str(self) -> &'static str {
        match self {
            Property::Definition => "definition",
            Property::ExplanatoryNote => "explanatory_note",
            Property::GeneratedDescription => "generated_description",
            Property::Synonym => "synonym",
        }
    }

    pub fn parse(s: &str) -> Option<Property> {
        Some(match s {
            "definition" => Property::Definition,
            "explanatory_note" => Property::ExplanatoryNote,
            "generated_description" => Property::GeneratedDescription,
            "synonym" => Property::Synonym,
            _ => return None,
        })
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinedDefinition {
    pub text: String,
    pub tag: Tag,
    pub depth: usize,
    pub source_iri: String,
    pub property: Property,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DefinitionCorpus {
    pub entries: Vec<MinedDefinition>,
}

pub const CORPUS_HEADER: &str = "text\ttag\tdepth\tsource_iri\tproperty";

impl DefinitionCorpus {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry count per tag; tags without entries are absent.
    pub fn per_tag_counts(&self) -> BTreeMap<Tag, usize> {
        let mut counts = BTreeMap::new();
        for e in &self.entries {
            *counts.entry(e.tag).or_insert(0) += 1;
        }
        counts
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{CORPUS_HEADER}")?;
        for e in &self.entries {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}",
                tsv::escape(&e.text),
                e.tag,
                e.depth,
                tsv::escape(&e.source_iri),
                e.property
            )?;
        }
        Ok(())
    }

    pub fn read_tsv(path: impl AsRef<Path>) -> Result<DefinitionCorpus> {
        let path = path.as_ref();
        let mut entries = Vec::new();
        let mut lines = tsv::read_lines(path)?.into_iter();
        match lines.next() {
            Some((_, h)) if h == CORPUS_HEADER => {}
            Some((n, _)) => return Err(Error::parse(path, n, "expected corpus header")),
            None => return Ok(DefinitionCorpus::default()),
        }
        for (n, line) in lines {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 5 {
                return Err(Error::parse(path, n, format!("expected 5 fields, got {}", fields.len())));
            }
            let tag = Tag::from_name(fields[1])
                .ok_or_else(|| Error::parse(path, n, format!("unknown tag `{}`", fields[1])))?;
            let depth = fields[2]
                .parse()
                .map_err(|_| Error::parse(path, n, format!("bad depth `{}`", fields[2])))?;
            let property = Property::parse(fields[4])
                .ok_or_else(|| Error::parse(path, n, format!("bad property `{}`", fields[4])))?;
            entries.push(MinedDefinition {
                text: tsv::unescape(fields[0]),
                tag,
                depth,
                source_iri: tsv::unescape(fields[3]),
                property,
            });
        }
        Ok(DefinitionCorpus { entries })
    }
}

pub(crate) fn index_records(records: &[OntologyRecord]) -> HashMap<&str, usize> {
    records
        .iter()
        .enumerate()
        .map(|(i, r)| (r.iri.as_str(), i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<LoadedDump> {
        parse_dump(text, Path::new("dump.jsonl"))
    }

    #[test]
    fn empty_dump() {
        let d = parse("").unwrap();
        assert!(d.records.is_empty());
        assert!(d.dangling.is_empty());
    }

    #[test]
    fn single_record() {
        let d = parse(
            r#"{"iri":"b1","label":"Bonds","definition":"a debt instrument","explanatory_note":null,"generated_description":null,"synonyms":[],"subclasses":[],"instances":[]}"#,
        )
        .unwrap();
        assert_eq!(d.records.len(), 1);
        assert_eq!(d.records[0].definition.as_deref(), Some("a debt instrument"));
        assert!(d.dangling.is_empty());
    }

    #[test]
    fn absent_keys_are_empty() {
        let d = parse(r#"{"iri":"x"}"#).unwrap();
        assert_eq!(d.records[0], OntologyRecord { iri: "x".into(), ..Default::default() });
    }

    #[test]
    fn dangling_reference_reported() {
        let d = parse(r#"{"iri":"b1","label":"Bonds","subclasses":["missing"]}"#).unwrap();
        assert_eq!(d.records.len(), 1);
        assert_eq!(
            d.dangling,
            vec![DanglingRef { from: "b1".into(), to: "missing".into(), kind: LinkKind::Subclass }]
        );
    }

    #[test]
    fn malformed_line_names_line_number() {
        let err = parse("{\"iri\":\"a\"}\n{not json\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_iri_rejected() {
        let err = parse("{\"iri\":\"a\"}\n{\"iri\":\"a\"}\n").unwrap_err();
        assert!(matches!(err, Error::DuplicateIri(ref i) if i == "a"));
    }

    #[test]
    fn corpus_tsv_round_trip() {
        let corpus = DefinitionCorpus {
            entries: vec![
                MinedDefinition {
                    text: "line one\nline\ttwo".into(),
                    tag: Tag::from_name("Swap").unwrap(),
                    depth: 1,
                    source_iri: "s:1".into(),
                    property: Property::ExplanatoryNote,
                },
                MinedDefinition {
                    text: "ibor".into(),
                    tag: Tag::from_name("Bonds").unwrap(),
                    depth: 0,
                    source_iri: "b".into(),
                    property: Property::Synonym,
                },
            ],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.tsv");
        let mut buf = Vec::new();
        corpus.write_tsv(&mut buf).unwrap();
        std::fs::write(&path, buf).unwrap();
        assert_eq!(DefinitionCorpus::read_tsv(&path).unwrap(), corpus);
        let counts = corpus.per_tag_counts();
        assert_eq!(counts.values().sum::<usize>(), corpus.len());
    }
}
