//! Word vectors trained on the custom corpus.
//!
//! Two interchangeable models share one trainer: plain skip-gram with
//! negative sampling, and the subword variant where a word's input vector
//! is its own vector plus the vectors of its hashed character n-grams.

mod io;
pub mod objective;
pub mod subword;
mod train;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use io::{load_w2v, read_w2v, save_w2v, subword_sidecar_path, write_w2v};
pub use train::{train, train_with_report, TrainReport};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingConfig {
    pub dimension: usize,
    pub window: usize,
    pub negatives: usize,
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub buckets: u32,
    pub min_count: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub subwords_enabled: bool,
    /// Worker threads. 1 is bit-reproducible; more workers update shared
    /// parameters without locks and are only statistically reproducible.
    pub threads: usize,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            dimension: 300,
            window: 5,
            negatives: 5,
            ngram_min: 3,
            ngram_max: 6,
            buckets: 2_000_000,
            min_count: 5,
            epochs: 5,
            learning_rate: 0.05,
            seed: 1,
            subwords_enabled: true,
            threads: 1,
        }
    }
}

impl EmbeddingConfig {
    /// Plain skip-gram, no subwords.
    pub fn word2vec() -> Self {
        EmbeddingConfig {
            subwords_enabled: false,
            ..Default::default()
        }
    }

    pub fn fasttext() -> Self {
        EmbeddingConfig::default()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.dimension == 0 {
            return bad("dimension must be positive");
        }
        if self.window == 0 {
            return bad("window must be at least 1");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if self.subwords_enabled && (self.ngram_min == 0 || self.ngram_min > self.ngram_max) {
            return bad("need 1 <= ngram_min <= ngram_max");
        }
        if self.subwords_enabled && self.buckets == 0 {
            return bad("buckets must be positive");
        }
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        Ok(())
    }
}

/// Hashed n-gram vectors of a subword model.
///
/// Only buckets hit by some vocabulary word during training are stored;
/// other buckets count as unknown.
#[derive(Clone, Debug, PartialEq)]
pub struct SubwordTable {
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub buckets: u32,
    /// Each vocabulary word's own vector, in vocabulary order.
    own: Vec<f32>,
    bucket_index: HashMap<u32, usize>,
    bucket_ids: Vec<u32>,
    bucket_vectors: Vec<f32>,
}

impl SubwordTable {
    pub(crate) fn new(
        ngram_min: usize,
        ngram_max: usize,
        buckets: u32,
        own: Vec<f32>,
        bucket_ids: Vec<u32>,
        bucket_vectors: Vec<f32>,
    ) -> Self {
        let bucket_index = bucket_ids.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        SubwordTable {
            ngram_min,
            ngram_max,
            buckets,
            own,
            bucket_index,
            bucket_ids,
            bucket_vectors,
        }
    }

    pub fn bucket_ids(&self) -> &[u32] {
        &self.bucket_ids
    }

    /// Stored vector of one hash bucket, if any vocabulary word used it.
    pub fn bucket_vector(&self, bucket: u32, dim: usize) -> Option<&[f32]> {
        self.bucket_index
            .get(&bucket)
            .map(|&i| &self.bucket_vectors[i * dim..(i + 1) * dim])
    }

    pub(crate) fn own_rows(&self) -> &[f32] {
        &self.own
    }

    pub(crate) fn bucket_rows(&self) -> &[f32] {
        &self.bucket_vectors
    }
}

/// Token → fixed-dimension vector map.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorTable {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Vec<f32>,
    subwords: Option<SubwordTable>,
}

impl VectorTable {
    pub fn new(dim: usize) -> Self {
        VectorTable {
            dim,
            words: Vec::new(),
            index: HashMap::new(),
            vectors: Vec::new(),
            subwords: None,
        }
    }

    /// Appends `key`; replaces the vector if the key already exists.
    pub fn insert(&mut self, key: impl Into<String>, vector: &[f32]) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                actual: vector.len(),
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite vector component".into()));
        }
        let key = key.into();
        match self.index.get(&key) {
            Some(&i) => self.vectors[i * self.dim..(i + 1) * self.dim].copy_from_slice(vector),
            None => {
                self.index.insert(key.clone(), self.words.len());
                self.words.push(key);
                self.vectors.extend_from_slice(vector);
            }
        }
        Ok(())
    }

    pub(crate) fn with_subwords(mut self, subwords: SubwordTable) -> Self {
        self.subwords = Some(subwords);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn contains(&self, key: &str) -> bool {
        self.index.contains_key(key)
    }

    pub fn get(&self, key: &str) -> Option<&[f32]> {
        self.index.get(key).map(|&i| self.row(i))
    }

    pub fn subwords(&self) -> Option<&SubwordTable> {
        self.subwords.as_ref()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f32])> {
        self.words
            .iter()
            .enumerate()
            .map(move |(i, w)| (w.as_str(), self.row(i)))
    }

    fn row(&self, i: usize) -> &[f32] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    /// Own (pre-composition) vector of a vocabulary word in a subword model.
    pub fn own_vector(&self, word: &str) -> Option<&[f32]> {
        let sw = self.subwords.as_ref()?;
        let i = *self.index.get(word)?;
        Some(&sw.own[i * self.dim..(i + 1) * self.dim])
    }

    /// Composes `own + Σ n-gram vectors` for a vocabulary word of a subword
    /// model, in n-gram order.
    pub fn compose(&self, word: &str) -> Option<Vec<f32>> {
        let sw = self.subwords.as_ref()?;
        let mut v = self.own_vector(word)?.to_vec();
        for b in subword::bucket_ids(word, sw.ngram_min, sw.ngram_max, sw.buckets) {
            let row = sw.bucket_vector(b, self.dim)?;
            v.iter_mut().zip(row).for_each(|(a, &x)| *a += x);
        }
        Some(v)
    }
}

/// Where a [`word_vector`] result came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VectorSource {
    InVocabulary,
    /// Composed from the `known` of `total` n-grams with a stored bucket.
    Subwords { known: usize, total: usize },
    /// Unknown word with nothing to compose from.
    Zero,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WordVector {
    pub values: Vec<f32>,
    pub source: VectorSource,
}

impl WordVector {
    pub fn is_zero_fallback(&self) -> bool {
        self.source == VectorSource::Zero
    }
}

/// Vector for any word. Unknown words of a subword model get the sum of
/// their known n-gram vectors (n-gram order); everything else unknown gets
/// the zero vector.
pub fn word_vector(table: &VectorTable, word: &str) -> WordVector {
    if let Some(v) = table.get(word) {
        return WordVector {
            values: v.to_vec(),
            source: VectorSource::InVocabulary,
        };
    }
    let zero = || WordVector {
        values: vec![0.0; table.dim],
        source: VectorSource::Zero,
    };
    let Some(sw) = &table.subwords else {
        return zero();
    };
    let ids = subword::bucket_ids(word, sw.ngram_min, sw.ngram_max, sw.buckets);
    let mut values = vec![0.0f32; table.dim];
    let mut known = 0;
    for &b in &ids {
        if let Some(row) = sw.bucket_vector(b, table.dim) {
            known += 1;
            values.iter_mut().zip(row).for_each(|(a, &x)| *a += x);
        }
    }
    if known == 0 {
        return zero();
    }
    WordVector {
        values,
        source: VectorSource::Subwords {
            known,
            total: ids.len(),
        },
    }
}

pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let (mut ab, mut aa, mut bb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (x as f64, y as f64);
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa == 0.0 || bb == 0.0 {
        0.0
    } else {
        ab / (aa.sqrt() * bb.sqrt())
    }
}

/// The `k` vocabulary words closest to `query` by cosine, best first.
pub fn nearest(table: &VectorTable, query: &[f32], k: usize) -> Vec<(String, f64)> {
    let mut scored: Vec<(String, f64)> = table
        .iter()
        .map(|(w, v)| (w.to_string(), cosine(query, v)))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_and_zero_fallback() {
        let mut t = VectorTable::new(2);
        t.insert("bond", &[1.0, 2.0]).unwrap();
        assert_eq!(word_vector(&t, "bond").values, [1.0, 2.0]);
        assert_eq!(word_vector(&t, "bond").source, VectorSource::InVocabulary);
        let oov = word_vector(&t, "swap");
        assert_eq!(oov.values, [0.0, 0.0]);
        assert!(oov.is_zero_fallback());
    }

    #[test]
    fn insert_checks_dimension() {
        let mut t = VectorTable::new(3);
        assert!(matches!(t.insert("x", &[1.0]), Err(Error::Dimension { expected: 3, actual: 1 })));
        assert!(t.insert("x", &[f32::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn nearest_orders_by_cosine() {
        let mut t = VectorTable::new(2);
        t.insert("a", &[1.0, 0.0]).unwrap();
        t.insert("b", &[0.0, 1.0]).unwrap();
        t.insert("c", &[1.0, 1.0]).unwrap();
        let n = nearest(&t, &[1.0, 0.1], 2);
        assert_eq!(n[0].0, "a");
        assert_eq!(n[1].0, "c");
    }

    #[test]
    fn config_validation() {
        assert!(EmbeddingConfig::default().validate().is_ok());
        let c = EmbeddingConfig { ngram_min: 5, ngram_max: 3, ..Default::default() };
        assert!(c.validate().is_err());
        let c = EmbeddingConfig { window: 0, ..Default::default() };
        assert!(c.validate().is_err());
    }
}
