//! Tag rankers: cosine similarity against label vectors, multinomial
//! logistic regression and random forests.

mod forest;
mod logreg;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use forest::{train_forest, ForestModel, ForestParams, ForestReport, MaxFeatures, Node, Tree};
pub use logreg::{loss_and_gradient, softmax, train_logreg, LogRegModel, LogRegParams, LogRegReport};

use crate::error::{Error, Result};
use crate::representation::FeatureMode;
use crate::tags::Tag;

/// Tags ordered best first. Equal scores keep canonical order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedPrediction {
    pub term: String,
    pub ranking: Vec<(Tag, f64)>,
}

impl RankedPrediction {
    pub fn from_scores(scores: impl IntoIterator<Item = (Tag, f64)>) -> Self {
        let mut ranking: Vec<(Tag, f64)> = scores.into_iter().collect();
        ranking.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        RankedPrediction {
            term: String::new(),
            ranking,
        }
    }

    pub fn with_term(mut self, term: impl Into<String>) -> Self {
        self.term = term.into();
        self
    }

    pub fn top(&self) -> Tag {
        self.ranking[0].0
    }

    /// 1-based position of `tag`.
    pub fn rank_of(&self, tag: Tag) -> Option<usize> {
        self.ranking.iter().position(|&(t, _)| t == tag).map(|p| p + 1)
    }
}

pub trait Ranker {
    fn rank(&self, feature: &[f64]) -> Result<RankedPrediction>;
}

/// Probability ranking of any trained model.
pub fn predict_proba(model: &dyn Ranker, feature: &[f64]) -> Result<RankedPrediction> {
    model.rank(feature)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn l2_normalized(v: &[f64]) -> Vec<f64> {
    let n = norm(v);
    if n == 0.0 {
        v.to_vec()
    } else {
        v.iter().map(|x| x / n).collect()
    }
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na * nb)
}

/// Ranks the labels by cosine similarity to `term_vec`.
pub fn cosine_rank(term_vec: &[f64], labels: &[(Tag, Vec<f64>)]) -> Result<RankedPrediction> {
    for (_, v) in labels {
        if v.len() != term_vec.len() {
            return Err(Error::Dimension {
                expected: term_vec.len(),
                actual: v.len(),
            });
        }
    }
    Ok(RankedPrediction::from_scores(
        labels.iter().map(|(t, v)| (*t, cosine_similarity(term_vec, v))),
    ))
}

/// Label vectors as a ranker, for running cosine ranking through the same
/// evaluation paths as trained models.
#[derive(Clone, Debug)]
pub struct CosineRanker {
    pub labels: Vec<(Tag, Vec<f64>)>,
}

impl Ranker for CosineRanker {
    fn rank(&self, feature: &[f64]) -> Result<RankedPrediction> {
        cosine_rank(feature, &self.labels)
    }
}

/// Returns the shared feature dimension.
pub(crate) fn check_training_data(features: &[Vec<f64>], labels: &[Tag]) -> Result<usize> {
    if features.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} feature vectors but {} labels",
            features.len(),
            labels.len()
        )));
    }
    let Some(first) = features.first() else {
        return Err(Error::InvalidArgument("no training data".into()));
    };
    let dim = first.len();
    if dim == 0 {
        return Err(Error::InvalidArgument("zero-dimensional features".into()));
    }
    if let Some(bad) = features.iter().find(|f| f.len() != dim) {
        return Err(Error::Dimension {
            expected: dim,
            actual: bad.len(),
        });
    }
    if labels.iter().all(|&t| t == labels[0]) {
        return Err(Error::SingleClass);
    }
    Ok(dim)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classifier {
    Logreg(LogRegModel),
    Forest(ForestModel),
}

impl Classifier {
    pub fn dim(&self) -> usize {
        match self {
            Classifier::Logreg(m) => m.dim,
            Classifier::Forest(m) => m.dim,
        }
    }
}

impl Ranker for Classifier {
    fn rank(&self, feature: &[f64]) -> Result<RankedPrediction> {
        match self {
            Classifier::Logreg(m) => m.rank(feature),
            Classifier::Forest(m) => m.rank(feature),
        }
    }
}

pub const MODEL_FORMAT: &str = "hypernym-classifier";
pub const MODEL_VERSION: u32 = 1;

/// Self-describing JSON container for a trained classifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelContainer {
    pub format: String,
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
    pub feature_mode: FeatureMode,
    pub dimension: usize,
    pub tags: Vec<Tag>,
    pub model: Classifier,
}

impl ModelContainer {
    pub fn new(model: Classifier, feature_mode: FeatureMode) -> Self {
        ModelContainer {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            provenance: None,
            feature_mode,
            dimension: model.dim(),
            tags: Tag::all_vec(),
            model,
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string(self)?;
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let c: ModelContainer = serde_json::from_str(&text)?;
        c.verify()?;
        Ok(c)
    }

    pub fn verify(&self) -> Result<()> {
        if self.format != MODEL_FORMAT {
            return Err(Error::Model(format!("unexpected format `{}`", self.format)));
        }
        if self.version != MODEL_VERSION {
            return Err(Error::Model(format!("unsupported version {}", self.version)));
        }
        if self.tags != Tag::all_vec() {
            return Err(Error::Model("tag list differs from the canonical 17 tags".into()));
        }
        if self.dimension != self.model.dim() {
            return Err(Error::Model(format!(
                "declared dimension {} but model has {}",
                self.dimension,
                self.model.dim()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tag(i: usize) -> Tag {
        Tag::from_index(i).unwrap()
    }

    #[test]
    fn identical_vector_ranks_first() {
        let labels = vec![
            (tag(0), vec![0.0, 1.0, 0.0]),
            (tag(1), vec![2.0, 0.0, 0.0]),
            (tag(2), vec![0.0, 0.0, -1.0]),
        ];
        let r = cosine_rank(&[2.0, 0.0, 0.0], &labels).unwrap();
        assert_eq!(r.top(), tag(1));
        assert!((r.ranking[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_vector_keeps_canonical_order() {
        let labels: Vec<_> = (0..17).rev().map(|i| (tag(i), vec![1.0, i as f64])).collect();
        let r = cosine_rank(&[0.0, 0.0], &labels).unwrap();
        let order: Vec<usize> = r.ranking.iter().map(|(t, _)| t.index()).collect();
        assert_eq!(order, (0..17).collect::<Vec<_>>());
        assert!(r.ranking.iter().all(|&(_, s)| s == 0.0));
    }

    #[test]
    fn hand_computed_cosines() {
        // term (1, 0); labels at angles with cosines 0.9, 0.1, -0.2
        let at = |c: f64| vec![c, (1.0 - c * c).sqrt()];
        let labels = vec![(tag(5), at(-0.2)), (tag(3), at(0.1)), (tag(9), at(0.9))];
        let r = cosine_rank(&[3.0, 0.0], &labels).unwrap();
        let got: Vec<(usize, f64)> = r.ranking.iter().map(|(t, s)| (t.index(), *s)).collect();
        let want = [(9, 0.9), (3, 0.1), (5, -0.2)];
        for (g, w) in got.iter().zip(want) {
            assert_eq!(g.0, w.0);
            assert!((g.1 - w.1).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch() {
        assert!(cosine_rank(&[1.0], &[(tag(0), vec![1.0, 2.0])]).is_err());
    }

    #[test]
    fn container_round_trip_and_tag_check() {
        let c = ModelContainer::new(Classifier::Logreg(LogRegModel::zeros(4)), FeatureMode::Fused);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        c.save(&p).unwrap();
        assert_eq!(ModelContainer::load(&p).unwrap(), c);

        let mut bad = c.clone();
        bad.tags.pop();
        bad.save(&p).unwrap();
        assert!(matches!(ModelContainer::load(&p), Err(Error::Model(_))));
    }
}
