//! Random forest of axis-aligned CART trees split by Gini impurity.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_training_data, l2_normalized, RankedPrediction, Ranker};
use crate::error::{Error, Result};
use crate::tags::{Tag, NUM_TAGS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    /// ⌈√d⌉ candidate features per node.
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    fn resolve(self, dim: usize) -> usize {
        let k = match self {
            MaxFeatures::Sqrt => (dim as f64).sqrt().ceil() as usize,
            MaxFeatures::All => dim,
            MaxFeatures::Count(k) => k,
        };
        k.clamp(1, dim)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub num_trees: usize,
    pub max_features: MaxFeatures,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
    /// Trees are grown in parallel on this many threads; every tree has
    /// its own seed so the result does not depend on it.
    pub threads: usize,
    pub normalize: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            num_trees: 100,
            max_features: MaxFeatures::Sqrt,
            min_samples_leaf: 1,
            max_depth: None,
            bootstrap: true,
            seed: 0,
            threads: 1,
            normalize: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Training-sample count per canonical tag.
    Leaf { histogram: Vec<u32> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    fn leaf(&self, x: &[f64]) -> &[u32] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
                Node::Leaf { histogram } => return histogram,
            }
        }
    }

    /// Class distribution of the leaf `x` lands in.
    pub fn distribution(&self, x: &[f64]) -> Vec<f64> {
        let h = self.leaf(x);
        let total: u32 = h.iter().sum();
        h.iter().map(|&c| c as f64 / total as f64).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub dim: usize,
    pub trees: Vec<Tree>,
    pub params: ForestParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestReport {
    pub train_accuracy: f64,
    /// Accuracy on samples left out of at least one bootstrap draw.
    pub oob_accuracy: Option<f64>,
}

fn gini(counts: &[u32], n: u32) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

struct Grower<'a> {
    xs: &'a [Vec<f64>],
    ys: &'a [usize],
    params: &'a ForestParams,
    k: usize,
    nodes: Vec<Node>,
}

impl Grower<'_> {
    fn histogram(&self, idx: &[usize]) -> Vec<u32> {
        let mut h = vec![0u32; NUM_TAGS];
        for &i in idx {
            h[self.ys[i]] += 1;
        }
        h
    }

    fn grow(&mut self, idx: &mut [usize], depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let hist = self.histogram(idx);
        let pure = hist.iter().filter(|&&c| c > 0).count() <= 1;
        let too_small = idx.len() < 2 * self.params.min_samples_leaf;
        let too_deep = self.params.max_depth.is_some_and(|d| depth >= d);
        let split = if pure || too_small || too_deep {
            None
        } else {
            self.best_split(idx, &hist, rng)
        };

        let Some((feature, threshold)) = split else {
            self.nodes.push(Node::Leaf { histogram: hist });
            return self.nodes.len() - 1;
        };

        // partition: left = x <= threshold
        let mut mid = 0;
        for j in 0..idx.len() {
            if self.xs[idx[j]][feature] <= threshold {
                idx.swap(mid, j);
                mid += 1;
            }
        }
        let me = self.nodes.len();
        self.nodes.push(Node::Leaf { histogram: Vec::new() });
        let (l, r) = idx.split_at_mut(mid);
        let left = self.grow(l, depth + 1, rng);
        let right = self.grow(r, depth + 1, rng);
        self.nodes[me] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        me
    }

    fn best_split(&self, idx: &[usize], hist: &[u32], rng: &mut ChaCha8Rng) -> Option<(usize, f64)> {
        let n = idx.len() as u32;
        let parent = gini(hist, n);
        let min_leaf = self.params.min_samples_leaf.max(1);
        let dim = self.xs[0].len();
        let mut best: Option<(f64, usize, f64)> = None;
        let mut column: Vec<(f64, usize)> = Vec::with_capacity(idx.len());

        for feature in index::sample(rng, dim, self.k) {
            column.clear();
            column.extend(idx.iter().map(|&i| (self.xs[i][feature], self.ys[i])));
            column.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left = vec![0u32; NUM_TAGS];
            let mut right = hist.to_vec();
            for j in 0..column.len() - 1 {
                let (v, y) = column[j];
                left[y] += 1;
                right[y] -= 1;
                let nl = j + 1;
                let nr = column.len() - nl;
                let next = column[j + 1].0;
                if v == next || nl < min_leaf || nr < min_leaf {
                    continue;
                }
                let impurity = (nl as f64 * gini(&left, nl as u32) + nr as f64 * gini(&right, nr as u32))
                    / n as f64;
                if parent - impurity > 1e-12 && best.is_none_or(|(b, _, _)| impurity < b) {
                    let mut threshold = v + (next - v) / 2.0;
                    if threshold >= next {
                        threshold = v;
                    }
                    best = Some((impurity, feature, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

fn tree_rng(seed: u64, tree: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tree as u64);
    rng
}

pub fn train_forest(
    features: &[Vec<f64>],
    labels: &[Tag],
    params: &ForestParams,
) -> Result<(ForestModel, ForestReport)> {
    let dim = check_training_data(features, labels)?;
    if params.num_trees == 0 {
        return Err(Error::InvalidArgument("num_trees must be positive".into()));
    }
    let xs: Vec<Vec<f64>> = if params.normalize {
        features.iter().map(|x| l2_normalized(x)).collect()
    } else {
        features.to_vec()
    };
    let ys: Vec<usize> = labels.iter().map(|t| t.index()).collect();
    let n = xs.len();
    let k = params.max_features.resolve(dim);

    let grow_one = |t: usize| -> (Tree, Vec<bool>) {
        let mut rng = tree_rng(params.seed, t);
        let mut idx: Vec<usize> = if params.bootstrap {
            (0..n).map(|_| rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        let mut in_bag = vec![false; n];
        idx.iter().for_each(|&i| in_bag[i] = true);
        let mut g = Grower {
            xs: &xs,
            ys: &ys,
            params,
            k,
            nodes: Vec::new(),
        };
        g.grow(&mut idx, 0, &mut rng);
        (Tree { nodes: g.nodes }, in_bag)
    };

    let grown: Vec<(Tree, Vec<bool>)> = if params.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(params.threads)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        pool.install(|| (0..params.num_trees).into_par_iter().map(grow_one).collect())
    } else {
        (0..params.num_trees).map(grow_one).collect()
    };

    let mut oob_hits = 0;
    let mut oob_seen = 0;
    for i in 0..n {
        let mut acc = vec![0.0; NUM_TAGS];
        let mut votes = 0;
        for (tree, in_bag) in &grown {
            if !in_bag[i] {
                votes += 1;
                acc.iter_mut().zip(tree.distribution(&xs[i])).for_each(|(a, d)| *a += d);
            }
        }
        if votes > 0 {
            oob_seen += 1;
            if RankedPrediction::from_scores(Tag::all().zip(acc)).top().index() == ys[i] {
                oob_hits += 1;
            }
        }
    }

    let model = ForestModel {
        dim,
        trees: grown.into_iter().map(|(t, _)| t).collect(),
        params: params.clone(),
    };
    let train_hits = (0..n)
        .filter(|&i| model.rank_prepared(&xs[i]).top().index() == ys[i])
        .count();
    let report = ForestReport {
        train_accuracy: train_hits as f64 / n as f64,
        oob_accuracy: (oob_seen > 0).then(|| oob_hits as f64 / oob_seen as f64),
    };
    Ok((model, report))
}

impl ForestModel {
    fn rank_prepared(&self, x: &[f64]) -> RankedPrediction {
        let mut acc = vec![0.0; NUM_TAGS];
        for tree in &self.trees {
            acc.iter_mut().zip(tree.distribution(x)).for_each(|(a, d)| *a += d);
        }
        let m = self.trees.len() as f64;
        RankedPrediction::from_scores(Tag::all().zip(acc.into_iter().map(|a| a / m)))
    }
}

impl Ranker for ForestModel {
    fn rank(&self, feature: &[f64]) -> Result<RankedPrediction> {
        if feature.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                actual: feature.len(),
            });
        }
        if self.params.normalize {
            Ok(self.rank_prepared(&l2_normalized(feature)))
        } else {
            Ok(self.rank_prepared(feature))
        }
    }
}
