//! Sentence segmentation, STS-style pair construction and seeded splits.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ontology::DefinitionCorpus;
use crate::tags::Tag;
use crate::tsv;

/// A lowercased, trimmed, non-empty segment with single-space separators.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Sentence(String);

impl Sentence {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        tokens(&self.0)
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Splits text on newlines and a configurable set of terminal punctuation.
#[derive(Clone, Debug)]
pub struct Segmenter {
    delimiters: Vec<char>,
}

impl Default for Segmenter {
    fn default() -> Self {
        Segmenter {
            delimiters: vec!['.', '!', '?', ';'],
        }
    }
}

impl Segmenter {
    pub fn with_delimiters(delimiters: impl IntoIterator<Item = char>) -> Self {
        Segmenter {
            delimiters: delimiters.into_iter().collect(),
        }
    }

    pub fn segment(&self, raw: &str) -> Vec<Sentence> {
        raw.to_lowercase()
            .split(|c: char| c == '\n' || c == '\r' || self.delimiters.contains(&c))
            .filter_map(|seg| {
                let joined = seg.split_whitespace().collect::<Vec<_>>().join(" ");
                (!joined.is_empty()).then_some(Sentence(joined))
            })
            .collect()
    }
}

/// Lowercases and segments with the default delimiters `. ! ? ;` plus newline.
///
/// Abbreviations are not special-cased: `"U.S. index"` yields `u`, `s`, `index`.
pub fn preprocess(raw: &str) -> Vec<Sentence> {
    Segmenter::default().segment(raw)
}

/// Whitespace tokens with surrounding ASCII punctuation removed. Input is
/// expected to be lowercased already.
pub fn tokens(text: &str) -> impl Iterator<Item = &str> {
    text.split_whitespace()
        .map(|t| t.trim_matches(|c: char| c.is_ascii_punctuation()))
        .filter(|t| !t.is_empty())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pair {
    pub sentence: Sentence,
    pub tag: Tag,
    pub score: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PairSet {
    pub pairs: Vec<Pair>,
    /// Recommended settings for the external sentence-encoder trainer.
    pub metadata: BTreeMap<String, String>,
}

pub const PAIR_HEADER: &str = "sentence\ttag\tscore";

impl PairSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let meta: Vec<String> = self.metadata.iter().map(|(k, v)| format!("{k}={v}")).collect();
        writeln!(w, "#metadata {}", meta.join(" "))?;
        writeln!(w, "{PAIR_HEADER}")?;
        for p in &self.pairs {
            writeln!(w, "{}\t{}\t{}", tsv::escape(p.sentence.as_str()), p.tag, p.score)?;
        }
        Ok(())
    }

    pub fn read_tsv(path: impl AsRef<Path>) -> Result<PairSet> {
        let path = path.as_ref();
        let mut set = PairSet::default();
        for (n, line) in tsv::read_lines(path)? {
            if let Some(meta) = line.strip_prefix("#metadata") {
                for kv in meta.split_whitespace() {
                    let (k, v) = kv
                        .split_once('=')
                        .ok_or_else(|| Error::parse(path, n, format!("bad metadata `{kv}`")))?;
                    set.metadata.insert(k.to_string(), v.to_string());
                }
                continue;
            }
            if line == PAIR_HEADER || line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 3 {
                return Err(Error::parse(path, n, format!("expected 3 fields, got {}", f.len())));
            }
            let tag = Tag::from_name(f[1])
                .ok_or_else(|| Error::parse(path, n, format!("unknown tag `{}`", f[1])))?;
            let score = f[2]
                .parse()
                .map_err(|_| Error::parse(path, n, format!("bad score `{}`", f[2])))?;
            set.pairs.push(Pair {
                sentence: Sentence(tsv::unescape(f[0])),
                tag,
                score,
            });
        }
        Ok(set)
    }
}

pub const DEFAULT_POSITIVE: f64 = 0.8;
pub const DEFAULT_NEGATIVE: f64 = 0.3;

/// Pairs every sentence of every corpus entry with each tag: `pos` for the
/// entry's own tag, `neg` for the rest. Order is corpus order, then
/// canonical tag order.
pub fn build_pairs(corpus: &DefinitionCorpus, tags: &[Tag], pos: f64, neg: f64) -> Result<PairSet> {
    if !(pos > neg) {
        return Err(Error::InvalidArgument(format!(
            "positive score {pos} must exceed negative score {neg}"
        )));
    }
    if !(0.0..=1.0).contains(&pos) || !(0.0..=1.0).contains(&neg) {
        return Err(Error::InvalidArgument("scores must lie in [0, 1]".into()));
    }
    let mut tags = tags.to_vec();
    tags.sort();
    tags.dedup();
    if tags.is_empty() {
        return Err(Error::InvalidArgument("tag list is empty".into()));
    }

    let mut pairs = Vec::new();
    for entry in &corpus.entries {
        if tags.binary_search(&entry.tag).is_err() {
            return Err(Error::InvalidArgument(format!(
                "corpus tag `{}` not in the pair tag list",
                entry.tag
            )));
        }
        for sentence in preprocess(&entry.text) {
            for &tag in &tags {
                pairs.push(Pair {
                    sentence: sentence.clone(),
                    tag,
                    score: if tag == entry.tag { pos } else { neg },
                });
            }
        }
    }

    let metadata = [
        ("train_batch_size", "8".to_string()),
        ("epochs", "4".to_string()),
        ("split", "70/10/20".to_string()),
        ("positive", pos.to_string()),
        ("negative", neg.to_string()),
        ("tags", tags.len().to_string()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    Ok(PairSet { pairs, metadata })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: f64,
    pub dev: f64,
    pub test: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train: f64, dev: f64, test: f64, seed: u64) -> Result<SplitSpec> {
        let spec = SplitSpec { train, dev, test, seed };
        spec.validate()?;
        Ok(spec)
    }

    /// The 70/10/20 split used for encoder training data.
    pub fn encoder_default(seed: u64) -> SplitSpec {
        SplitSpec { train: 0.7, dev: 0.1, test: 0.2, seed }
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.dev, self.test];
        if parts.iter().any(|f| !(*f >= 0.0)) || ((parts.iter().sum::<f64>()) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "split fractions {parts:?} must be non-negative and sum to 1"
            )));
        }
        Ok(())
    }

    /// Part sizes for `n` items: rounded train and dev sizes, test takes the rest.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let mut train = ((n as f64) * self.train).round() as usize;
        let mut dev = ((n as f64) * self.dev).round() as usize;
        train = train.min(n);
        dev = dev.min(n - train);
        if self.test == 0.0 {
            dev = n - train;
        }
        (train, dev, n - train - dev)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split<T> {
    pub train: Vec<T>,
    pub dev: Vec<T>,
    pub test: Vec<T>,
}

/// Seeded shuffle followed by a contiguous partition.
pub fn split<T>(mut items: Vec<T>, spec: &SplitSpec) -> Result<Split<T>> {
    spec.validate()?;
    let (n_train, n_dev, _) = spec.sizes(items.len());
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    items.shuffle(&mut rng);
    let test = items.split_off(n_train + n_dev);
    let dev = items.split_off(n_train);
    Ok(Split { train: items, dev, test })
}
