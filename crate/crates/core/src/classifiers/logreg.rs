//! Multinomial logistic regression trained by mini-batch gradient descent on
//! mean softmax cross-entropy plus `(l2 / 2)·‖W‖²`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_training_data, l2_normalized, RankedPrediction, Ranker};
use crate::error::{Error, Result};
use crate::tags::{Tag, NUM_TAGS};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogRegParams {
    pub learning_rate: f64,
    pub epochs: usize,
    /// `None` trains on the full data set each step.
    pub batch_size: Option<usize>,
    pub l2: f64,
    pub seed: u64,
    pub normalize: bool,
}

impl Default for LogRegParams {
    fn default() -> Self {
        LogRegParams {
            learning_rate: 0.1,
            epochs: 200,
            batch_size: Some(32),
            l2: 1e-4,
            seed: 0,
            normalize: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    pub dim: usize,
    /// Row-major `NUM_TAGS × dim`; row `k` belongs to the tag with canonical index `k`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub params: LogRegParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRegReport {
    pub final_loss: f64,
    pub train_accuracy: f64,
}

fn scores(weights: &[f64], biases: &[f64], x: &[f64]) -> Vec<f64> {
    let dim = x.len();
    biases
        .iter()
        .enumerate()
        .map(|(k, &b)| {
            let row = &weights[k * dim..(k + 1) * dim];
            b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
        })
        .collect()
}

/// Softmax with max subtraction.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let z: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / z).collect()
}

/// Mean cross-entropy over `batch` plus the L2 term, and its gradients
/// with respect to the weights and biases.
pub fn loss_and_gradient(
    weights: &[f64],
    biases: &[f64],
    batch: &[(&[f64], usize)],
    l2: f64,
) -> (f64, Vec<f64>, Vec<f64>) {
    let classes = biases.len();
    let dim = weights.len() / classes;
    let mut gw = vec![0.0; weights.len()];
    let mut gb = vec![0.0; classes];
    let mut loss = 0.0;
    let inv = 1.0 / batch.len() as f64;
    for &(x, y) in batch {
        let s = scores(weights, biases, x);
        let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + s.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        loss += (lse - s[y]) * inv;
        for k in 0..classes {
            let d = ((s[k] - lse).exp() - if k == y { 1.0 } else { 0.0 }) * inv;
            gb[k] += d;
            let row = &mut gw[k * dim..(k + 1) * dim];
            row.iter_mut().zip(x).for_each(|(g, &v)| *g += d * v);
        }
    }
    loss += 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>();
    gw.iter_mut().zip(weights).for_each(|(g, &w)| *g += l2 * w);
    (loss, gw, gb)
}

pub fn train_logreg(
    features: &[Vec<f64>],
    labels: &[Tag],
    params: &LogRegParams,
) -> Result<(LogRegModel, LogRegReport)> {
    let dim = check_training_data(features, labels)?;
    if !(params.learning_rate > 0.0) || params.epochs == 0 || params.batch_size == Some(0) {
        return Err(Error::InvalidArgument("learning_rate, epochs and batch_size must be positive".into()));
    }
    let xs: Vec<Vec<f64>> = if params.normalize {
        features.iter().map(|x| l2_normalized(x)).collect()
    } else {
        features.to_vec()
    };
    let data: Vec<(&[f64], usize)> = xs.iter().map(Vec::as_slice).zip(labels.iter().map(|t| t.index())).collect();

    let mut weights = vec![0.0; NUM_TAGS * dim];
    let mut biases = vec![0.0; NUM_TAGS];
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let lr = params.learning_rate;

    for epoch in 0..params.epochs {
        let batch_size = match params.batch_size {
            Some(b) => {
                order.shuffle(&mut rng);
                b
            }
            None => data.len(),
        };
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(batch_size) {
            let batch: Vec<(&[f64], usize)> = chunk.iter().map(|&i| data[i]).collect();
            let (loss, gw, gb) = loss_and_gradient(&weights, &biases, &batch, params.l2);
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss(format!("epoch {epoch}")));
            }
            epoch_loss += loss * batch.len() as f64;
            weights.iter_mut().zip(&gw).for_each(|(w, g)| *w -= lr * g);
            biases.iter_mut().zip(&gb).for_each(|(b, g)| *b -= lr * g);
        }
        log::debug!("epoch {epoch}: loss {:.6}", epoch_loss / data.len() as f64);
    }

    let (final_loss, _, _) = loss_and_gradient(&weights, &biases, &data, params.l2);
    if !final_loss.is_finite() {
        return Err(Error::NonFiniteLoss(format!("epoch {}", params.epochs)));
    }
    let model = LogRegModel {
        dim,
        weights,
        biases,
        params: params.clone(),
    };
    let correct = data
        .iter()
        .filter(|(x, y)| model.rank_normalized(x).top().index() == *y)
        .count();
    let report = LogRegReport {
        final_loss,
        train_accuracy: correct as f64 / data.len() as f64,
    };
    Ok((model, report))
}

impl LogRegModel {
    /// All-zero model; every tag gets probability 1/17.
    pub fn zeros(dim: usize) -> Self {
        LogRegModel {
            dim,
            weights: vec![0.0; NUM_TAGS * dim],
            biases: vec![0.0; NUM_TAGS],
            params: LogRegParams::default(),
        }
    }

    pub fn probabilities(&self, feature: &[f64]) -> Result<Vec<f64>> {
        if feature.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                actual: feature.len(),
            });
        }
        let x = if self.params.normalize {
            l2_normalized(feature)
        } else {
            feature.to_vec()
        };
        Ok(softmax(&scores(&self.weights, &self.biases, &x)))
    }

    fn rank_normalized(&self, x: &[f64]) -> RankedPrediction {
        let p = softmax(&scores(&self.weights, &self.biases, x));
        RankedPrediction::from_scores(Tag::all().zip(p))
    }
}

impl Ranker for LogRegModel {
    fn rank(&self, feature: &[f64]) -> Result<RankedPrediction> {
        let p = self.probabilities(feature)?;
        Ok(RankedPrediction::from_scores(Tag::all().zip(p)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_model_is_uniform() {
        let m = LogRegModel::zeros(4);
        let r = m.rank(&[1.0, -2.0, 3.0, 0.5]).unwrap();
        assert_eq!(r.ranking.len(), 17);
        for (i, &(tag, p)) in r.ranking.iter().enumerate() {
            assert_eq!(tag.index(), i);
            assert!((p - 1.0 / 17.0).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_shift_invariant() {
        let s = [0.3, -1.2, 2.5, 0.0];
        let a = softmax(&s);
        let b = softmax(&s.map(|x| x + 123.0));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_single_class_and_bad_dims() {
        let bonds = Tag::from_index(0).unwrap();
        let err = train_logreg(&[vec![1.0], vec![2.0]], &[bonds, bonds], &LogRegParams::default());
        assert!(matches!(err, Err(Error::SingleClass)));
        let m = LogRegModel::zeros(3);
        assert!(m.rank(&[1.0]).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let a = Tag::from_index(0).unwrap();
        let b = Tag::from_index(1).unwrap();
        let params = LogRegParams { learning_rate: 1e300, epochs: 5, ..Default::default() };
        let err = train_logreg(&[vec![1e10], vec![-1e10]], &[a, b], &params).unwrap_err();
        assert!(matches!(err, Error::NonFiniteLoss(ref s) if s.starts_with("epoch")));
    }
}
