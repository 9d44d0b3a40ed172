//! Phrase representations: word vectors zero-padded to the sentence
//! dimension and added element-wise to sentence vectors.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embeddings::{self, word_vector, VectorTable};
use crate::error::{Error, Result};
use crate::tags::Tag;
use crate::text;

pub const SENTENCE_DIM: usize = 768;

/// Stand-in for spaces inside sentence-store keys on disk.
pub const SPACE_MARKER: char = '\u{2581}';

pub fn normalize_key(key: &str) -> String {
    key.trim().to_lowercase()
}

/// Externally produced sentence vectors keyed by normalized surface text.
#[derive(Clone, Debug, PartialEq)]
pub struct SentenceVectorStore {
    dim: usize,
    vectors: HashMap<String, Vec<f32>>,
}

impl Default for SentenceVectorStore {
    fn default() -> Self {
        SentenceVectorStore::new()
    }
}

impl SentenceVectorStore {
    pub fn new() -> Self {
        SentenceVectorStore {
            dim: SENTENCE_DIM,
            vectors: HashMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn insert(&mut self, key: &str, vector: Vec<f32>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                actual: vector.len(),
            });
        }
        self.vectors.insert(normalize_key(key), vector);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&[f32]> {
        self.vectors.get(&normalize_key(key)).map(Vec::as_slice)
    }

    /// Loads a word2vec-format file whose tokens use U+2581 for spaces.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let table = embeddings::read_w2v(path)?;
        if table.dim() != SENTENCE_DIM {
            return Err(Error::Dimension {
                expected: SENTENCE_DIM,
                actual: table.dim(),
            });
        }
        let mut store = SentenceVectorStore::new();
        for (key, v) in table.iter() {
            store.insert(&key.replace(SPACE_MARKER, " "), v.to_vec())?;
        }
        Ok(store)
    }

    pub fn save(&self, path: impl AsRef<Path>, header: Option<&str>) -> Result<()> {
        let mut keys: Vec<&String> = self.vectors.keys().collect();
        keys.sort();
        let mut table = VectorTable::new(self.dim);
        for k in keys {
            let token: String = k
                .chars()
                .map(|c| if c.is_whitespace() { SPACE_MARKER } else { c })
                .collect();
            table.insert(token, &self.vectors[k])?;
        }
        embeddings::save_w2v(&table, path.as_ref(), header)
    }
}

/// Zero-pads `v` to `target` components.
pub fn pad(v: &[f64], target: usize) -> Result<Vec<f64>> {
    if v.len() > target {
        return Err(Error::Dimension {
            expected: target,
            actual: v.len(),
        });
    }
    let mut out = v.to_vec();
    out.resize(target, 0.0);
    Ok(out)
}

/// `sent + pad(word, 768)`.
pub fn fuse(sent: &[f64], word: &[f64]) -> Result<Vec<f64>> {
    if sent.len() != SENTENCE_DIM {
        return Err(Error::Dimension {
            expected: SENTENCE_DIM,
            actual: sent.len(),
        });
    }
    let mut out = pad(word, SENTENCE_DIM)?;
    out.iter_mut().zip(sent).for_each(|(o, &s)| *o += s);
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    /// Sentence vector only.
    SentenceOnly,
    /// Padded sum of word vectors only.
    WordOnly,
    /// Sentence vector plus padded word sum.
    #[default]
    Fused,
}

impl std::str::FromStr for FeatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "sentence_only" => Ok(FeatureMode::SentenceOnly),
            "word_only" => Ok(FeatureMode::WordOnly),
            "fused" => Ok(FeatureMode::Fused),
            _ => Err(Error::InvalidArgument(format!("unknown feature mode `{s}`"))),
        }
    }
}

/// Builds term feature vectors from loaded stores.
#[derive(Clone, Copy, Debug)]
pub struct TermEncoder<'a> {
    pub sentences: Option<&'a SentenceVectorStore>,
    pub words: Option<&'a VectorTable>,
    /// Use a zero sentence vector (and log it) when a term has none.
    pub missing_fallback: bool,
    /// Count the sentence vector once per token instead of once per term.
    pub sentence_per_word: bool,
}

impl<'a> TermEncoder<'a> {
    pub fn new(sentences: Option<&'a SentenceVectorStore>, words: Option<&'a VectorTable>) -> Self {
        TermEncoder {
            sentences,
            words,
            missing_fallback: false,
            sentence_per_word: false,
        }
    }

    /// Σ of word vectors over the lowercased tokens of `term`.
    pub fn word_part(&self, term: &str) -> Result<Vec<f64>> {
        let words = self
            .words
            .ok_or_else(|| Error::InvalidArgument("word vectors not loaded".into()))?;
        let mut sum = vec![0.0f64; words.dim()];
        for token in text::tokens(&term.to_lowercase()) {
            let v = word_vector(words, token);
            sum.iter_mut().zip(&v.values).for_each(|(s, &x)| *s += x as f64);
        }
        Ok(sum)
    }

    pub fn sentence_part(&self, term: &str) -> Result<Vec<f64>> {
        let store = self
            .sentences
            .ok_or_else(|| Error::InvalidArgument("sentence vectors not loaded".into()))?;
        match store.get(term) {
            Some(v) => Ok(v.iter().map(|&x| x as f64).collect()),
            None if self.missing_fallback => {
                log::warn!("no sentence vector for `{term}`; using zeros");
                Ok(vec![0.0; store.dim()])
            }
            None => Err(Error::MissingSentenceVector(term.to_string())),
        }
    }

    pub fn encode(&self, term: &str, mode: FeatureMode) -> Result<Vec<f64>> {
        match mode {
            FeatureMode::SentenceOnly => self.sentence_part(term),
            FeatureMode::WordOnly => pad(&self.word_part(term)?, SENTENCE_DIM),
            FeatureMode::Fused => {
                let mut sent = self.sentence_part(term)?;
                if self.sentence_per_word {
                    let n = text::tokens(&term.to_lowercase()).count().max(1) as f64;
                    sent.iter_mut().for_each(|x| *x *= n);
                }
                fuse(&sent, &self.word_part(term)?)
            }
        }
    }

    /// Sentence vectors of the tag surface names, for cosine ranking.
    pub fn label_vectors(&self, tags: &[Tag]) -> Result<Vec<(Tag, Vec<f64>)>> {
        tags.iter()
            .map(|&t| Ok((t, self.sentence_part(t.name())?)))
            .collect()
    }
}

/// Feature vector for one term under `mode`.
pub fn term_embedding(
    term: &str,
    mode: FeatureMode,
    sentences: &SentenceVectorStore,
    words: &VectorTable,
) -> Result<Vec<f64>> {
    TermEncoder::new(Some(sentences), Some(words)).encode(term, mode)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stores() -> (SentenceVectorStore, VectorTable) {
        let mut s = SentenceVectorStore::new();
        let v: Vec<f32> = (0..SENTENCE_DIM).map(|i| (i as f32 * 0.37).sin()).collect();
        s.insert("Interest Rate Swap", v.clone()).unwrap();
        s.insert("swap", v.iter().map(|x| x * 2.0).collect()).unwrap();
        let mut w = VectorTable::new(300);
        for (k, word) in ["interest", "rate", "swap"].iter().enumerate() {
            let v: Vec<f32> = (0..300).map(|i| ((i + 7 * k) as f32).cos() * 0.1).collect();
            w.insert(*word, &v).unwrap();
        }
        (s, w)
    }

    #[test]
    fn pad_examples() {
        assert_eq!(pad(&[0.0; 300], 768).unwrap(), vec![0.0; 768]);
        assert_eq!(pad(&[1.0, 2.0, 3.0], 5).unwrap(), [1.0, 2.0, 3.0, 0.0, 0.0]);
        assert!(pad(&[0.0; 769], 768).is_err());
    }

    #[test]
    fn fuse_identities() {
        let s: Vec<f64> = (0..768).map(|i| i as f64).collect();
        assert_eq!(fuse(&s, &[0.0; 300]).unwrap(), s);
        let w: Vec<f64> = (0..300).map(|i| -(i as f64)).collect();
        assert_eq!(fuse(&[0.0; 768], &w).unwrap(), pad(&w, 768).unwrap());
        assert!(fuse(&[0.0; 767], &w).is_err());
    }

    #[test]
    fn sentence_only_is_stored_vector() {
        let (s, w) = stores();
        let e = term_embedding("interest rate swap", FeatureMode::SentenceOnly, &s, &w).unwrap();
        let expect: Vec<f64> = s.get("interest rate swap").unwrap().iter().map(|&x| x as f64).collect();
        assert_eq!(e, expect);
    }

    #[test]
    fn word_only_sums_tokens() {
        let (s, w) = stores();
        let e = term_embedding("Interest rate SWAP", FeatureMode::WordOnly, &s, &w).unwrap();
        let mut expect = vec![0.0f64; 768];
        for word in ["interest", "rate", "swap"] {
            for (i, &x) in w.get(word).unwrap().iter().enumerate() {
                expect[i] += x as f64;
            }
        }
        assert_eq!(e, expect);
    }

    #[test]
    fn fused_with_oov_word_is_sentence() {
        let (mut s, w) = stores();
        s.insert("zzz", vec![0.5; 768]).unwrap();
        let e = term_embedding("zzz", FeatureMode::Fused, &s, &w).unwrap();
        assert_eq!(e, vec![0.5; 768]);
    }

    #[test]
    fn missing_sentence_vector() {
        let (s, w) = stores();
        let err = term_embedding("bond", FeatureMode::Fused, &s, &w).unwrap_err();
        assert!(matches!(err, Error::MissingSentenceVector(ref t) if t == "bond"));
        let enc = TermEncoder { missing_fallback: true, ..TermEncoder::new(Some(&s), Some(&w)) };
        let e = enc.encode("swap", FeatureMode::Fused).unwrap();
        assert_eq!(e.len(), 768);
        let z = enc.encode("bond", FeatureMode::SentenceOnly).unwrap();
        assert!(z.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn per_word_sentence_alternative_scales_sentence() {
        let (s, w) = stores();
        let once = TermEncoder::new(Some(&s), Some(&w));
        let per = TermEncoder { sentence_per_word: true, ..once };
        let a = once.encode("interest rate swap", FeatureMode::Fused).unwrap();
        let b = per.encode("interest rate swap", FeatureMode::Fused).unwrap();
        let sent = once.sentence_part("interest rate swap").unwrap();
        for i in 0..768 {
            assert!((b[i] - a[i] - 2.0 * sent[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn store_round_trip_with_spaces() {
        let (s, _) = stores();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sent.vec");
        s.save(&p, None).unwrap();
        let raw = std::fs::read_to_string(&p).unwrap();
        assert!(raw.contains("interest\u{2581}rate\u{2581}swap "));
        assert_eq!(SentenceVectorStore::load(&p).unwrap(), s);
    }

    #[test]
    fn store_rejects_wrong_dimension() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.vec");
        std::fs::write(&p, "1 3\nbond 1 2 3\n").unwrap();
        assert!(matches!(SentenceVectorStore::load(&p), Err(Error::Dimension { expected: 768, actual: 3 })));
    }
}
