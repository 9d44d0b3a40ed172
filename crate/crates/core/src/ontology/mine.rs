//! Depth-limited breadth-first mining from seed concepts.
//!
//! A record's depth is its minimum link distance from any seed. When several
//! seeds reach a record within the depth limit, the seed with the smallest
//! distance wins and ties go to the smaller canonical index, so the result
//! depends only on graph structure and never on record order.

use std::collections::{BTreeMap, HashSet, VecDeque};

use super::{index_records, DefinitionCorpus, MinedDefinition, OntologyRecord, Property};
use crate::error::{Error, Result};
use crate::tags::Tag;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MineOptions {
    /// Deepest link distance collected; 2 keeps seeds, children and grandchildren.
    pub max_depth: usize,
    /// Follow instance links as well as subclass links.
    pub expand_instances: bool,
}

impl Default for MineOptions {
    fn default() -> Self {
        MineOptions {
            max_depth: 2,
            expand_instances: false,
        }
    }
}

/// A record reached from more than one seed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conflict {
    pub iri: String,
    /// Every seed that reached the record, with its distance, in canonical order.
    pub candidates: Vec<(Tag, usize)>,
    pub chosen: Tag,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Mined {
    pub corpus: DefinitionCorpus,
    pub conflicts: Vec<Conflict>,
}

pub fn mine(records: &[OntologyRecord], seeds: &[Tag], opts: MineOptions) -> Result<Mined> {
    let index = index_records(records);

    let mut seeds: Vec<Tag> = seeds.to_vec();
    seeds.sort();
    seeds.dedup();

    // distances[node] = every (seed, distance) that reached it
    let mut distances: BTreeMap<usize, Vec<(Tag, usize)>> = BTreeMap::new();
    for &seed in &seeds {
        let root = resolve_seed(records, seed)?;
        let mut visited = HashSet::from([root]);
        let mut queue = VecDeque::from([(root, 0usize)]);
        while let Some((node, depth)) = queue.pop_front() {
            distances.entry(node).or_default().push((seed, depth));
            if depth == opts.max_depth {
                continue;
            }
            let r = &records[node];
            let links = r.subclasses.iter().chain(
                opts.expand_instances
                    .then_some(r.instances.iter())
                    .into_iter()
                    .flatten(),
            );
            for target in links {
                if let Some(&next) = index.get(target.as_str()) {
                    if visited.insert(next) {
                        queue.push_back((next, depth + 1));
                    }
                }
            }
        }
    }

    let mut assigned: Vec<(Tag, usize, &OntologyRecord)> = Vec::with_capacity(distances.len());
    let mut conflicts = Vec::new();
    for (node, candidates) in distances {
        let &(tag, depth) = candidates
            .iter()
            .min_by_key(|&&(t, d)| (d, t.index()))
            .expect("reached nodes have a candidate");
        let record = &records[node];
        if candidates.len() > 1 {
            log::warn!(
                "{} reached from {} seeds ({}); assigned to {}",
                record.iri,
                candidates.len(),
                candidates
                    .iter()
                    .map(|(t, d)| format!("{t}@{d}"))
                    .collect::<Vec<_>>()
                    .join(", "),
                tag
            );
            conflicts.push(Conflict {
                iri: record.iri.clone(),
                candidates: candidates.clone(),
                chosen: tag,
            });
        }
        assigned.push((tag, depth, record));
    }
    assigned.sort_by(|a, b| (a.0, a.1, &a.2.iri).cmp(&(b.0, b.1, &b.2.iri)));
    conflicts.sort_by(|a, b| a.iri.cmp(&b.iri));

    let mut entries = Vec::new();
    for (tag, depth, record) in assigned {
        emit_record(record, tag, depth, &mut entries);
    }
    Ok(Mined {
        corpus: DefinitionCorpus { entries },
        conflicts,
    })
}

fn resolve_seed(records: &[OntologyRecord], seed: Tag) -> Result<usize> {
    let wanted = seed.name().to_lowercase();
    let mut hits = records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.label.trim().to_lowercase() == wanted)
        .map(|(i, _)| i);
    match (hits.next(), hits.next()) {
        (Some(i), None) => Ok(i),
        _ => Err(Error::UnresolvedSeed(seed.name().to_string())),
    }
}

fn emit_record(record: &OntologyRecord, tag: Tag, depth: usize, out: &mut Vec<MinedDefinition>) {
    let mut push = |text: &str, property| {
        let text = text.trim();
        if !text.is_empty() {
            out.push(MinedDefinition {
                text: text.to_string(),
                tag,
                depth,
                source_iri: record.iri.clone(),
                property,
            });
        }
    };
    let singles = [
        (&record.definition, Property::Definition),
        (&record.explanatory_note, Property::ExplanatoryNote),
        (&record.generated_description, Property::GeneratedDescription),
    ];
    for (text, property) in singles {
        if let Some(text) = text {
            push(text, property);
        }
    }
    let mut seen = HashSet::new();
    for synonym in &record.synonyms {
        if seen.insert(synonym.trim()) {
            push(synonym, Property::Synonym);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(iri: &str, label: &str, def: &str, subs: &[&str]) -> OntologyRecord {
        OntologyRecord {
            iri: iri.into(),
            label: label.into(),
            definition: Some(def.into()),
            subclasses: subs.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        }
    }

    fn tag(name: &str) -> Tag {
        Tag::from_name(name).unwrap()
    }

    fn texts(m: &Mined) -> Vec<(String, Tag, usize)> {
        m.corpus
            .entries
            .iter()
            .map(|e| (e.text.clone(), e.tag, e.depth))
            .collect()
    }

    #[test]
    fn stops_at_grandchildren() {
        let records = vec![
            rec("b1", "Bonds", "D1", &["c1"]),
            rec("c1", "child", "D2", &["g1"]),
            rec("g1", "grandchild", "D3", &["x1"]),
            rec("x1", "great", "D4", &[]),
        ];
        let m = mine(&records, &[tag("Bonds")], MineOptions::default()).unwrap();
        let bonds = tag("Bonds");
        assert_eq!(
            texts(&m),
            vec![
                ("D1".into(), bonds, 0),
                ("D2".into(), bonds, 1),
                ("D3".into(), bonds, 2)
            ]
        );
    }

    #[test]
    fn minimal_depth_wins() {
        let records = vec![
            rec("b", "Bonds", "B", &["r"]),
            rec("f", "Funds", "F", &["m"]),
            rec("m", "mid", "M", &["r"]),
            rec("r", "shared", "R", &[]),
        ];
        let m = mine(&records, &[tag("Bonds"), tag("Funds")], MineOptions::default()).unwrap();
        let r = m.corpus.entries.iter().find(|e| e.source_iri == "r").unwrap();
        assert_eq!((r.tag, r.depth), (tag("Bonds"), 1));
        assert_eq!(m.conflicts.len(), 1);
        assert_eq!(m.conflicts[0].candidates, vec![(tag("Bonds"), 1), (tag("Funds"), 2)]);
    }

    #[test]
    fn canonical_index_breaks_ties() {
        let records = vec![
            rec("s", "Swap", "S", &["s1"]),
            rec("s1", "s1", "S1", &["r"]),
            rec("fw", "Forward", "FW", &["f1"]),
            rec("f1", "f1", "F1", &["r"]),
            rec("r", "shared", "R", &[]),
        ];
        let m = mine(&records, &[tag("Swap"), tag("Forward")], MineOptions::default()).unwrap();
        let r = m.corpus.entries.iter().find(|e| e.source_iri == "r").unwrap();
        assert_eq!((r.tag, r.depth), (tag("Forward"), 2));
    }

    #[test]
    fn instances_only_followed_when_enabled() {
        let mut seed = rec("b", "Bonds", "B", &[]);
        seed.instances = vec!["i".into()];
        let records = vec![seed, rec("i", "inst", "I", &[])];
        let off = mine(&records, &[tag("Bonds")], MineOptions::default()).unwrap();
        assert_eq!(off.corpus.len(), 1);
        let on = mine(
            &records,
            &[tag("Bonds")],
            MineOptions { expand_instances: true, ..Default::default() },
        )
        .unwrap();
        assert_eq!(on.corpus.len(), 2);
        assert_eq!(on.corpus.entries[1].depth, 1);
    }

    #[test]
    fn cycles_terminate() {
        let records = vec![rec("b", "Bonds", "B", &["c"]), rec("c", "c", "C", &["b"])];
        let m = mine(&records, &[tag("Bonds")], MineOptions { max_depth: 10, ..Default::default() })
            .unwrap();
        assert_eq!(m.corpus.len(), 2);
    }

    #[test]
    fn unresolved_seed_is_fatal() {
        let records = vec![rec("b", "Bonds", "B", &[])];
        let err = mine(&records, &[tag("Swap")], MineOptions::default()).unwrap_err();
        assert!(matches!(err, Error::UnresolvedSeed(ref s) if s == "Swap"));
    }

    #[test]
    fn all_properties_and_synonyms_emitted() {
        let records = vec![OntologyRecord {
            iri: "b".into(),
            label: "bonds".into(),
            definition: Some("def".into()),
            explanatory_note: Some("  ".into()),
            generated_description: Some("gen".into()),
            synonyms: vec!["debt security".into(), "obligation".into(), "obligation".into()],
            ..Default::default()
        }];
        let m = mine(&records, &[tag("Bonds")], MineOptions::default()).unwrap();
        let props: Vec<_> = m.corpus.entries.iter().map(|e| (e.property, e.text.as_str())).collect();
        assert_eq!(
            props,
            vec![
                (Property::Definition, "def"),
                (Property::GeneratedDescription, "gen"),
                (Property::Synonym, "debt security"),
                (Property::Synonym, "obligation"),
            ]
        );
    }

    #[test]
    fn depth_zero_keeps_only_seeds() {
        let records = vec![rec("b", "Bonds", "B", &["c"]), rec("c", "c", "C", &[])];
        let m = mine(&records, &[tag("Bonds")], MineOptions { max_depth: 0, ..Default::default() })
            .unwrap();
        assert_eq!(m.corpus.len(), 1);
    }
}
