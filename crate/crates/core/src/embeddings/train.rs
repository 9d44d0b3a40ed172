//! Skip-gram trainer with negative sampling and optional subword input rows.

use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::objective::logistic_step;
use super::{subword, EmbeddingConfig, SubwordTable, VectorTable};
use crate::error::{Error, Result};
use crate::text;

/// Row-major f32 matrix whose cells can be updated from several workers
/// without locks. Relaxed loads and stores only: concurrent updates to the
/// same cell may be lost, which skip-gram training tolerates.
struct SharedMatrix {
    cols: usize,
    data: Vec<AtomicU32>,
}

impl SharedMatrix {
    fn from_vec(cols: usize, values: Vec<f32>) -> Self {
        SharedMatrix {
            cols,
            data: values.into_iter().map(|v| AtomicU32::new(v.to_bits())).collect(),
        }
    }

    fn read(&self, row: usize, out: &mut [f32]) {
        let cells = &self.data[row * self.cols..(row + 1) * self.cols];
        for (o, c) in out.iter_mut().zip(cells) {
            *o = f32::from_bits(c.load(Ordering::Relaxed));
        }
    }

    fn accumulate(&self, row: usize, out: &mut [f32]) {
        let cells = &self.data[row * self.cols..(row + 1) * self.cols];
        for (o, c) in out.iter_mut().zip(cells) {
            *o += f32::from_bits(c.load(Ordering::Relaxed));
        }
    }

    fn write(&self, row: usize, values: &[f32]) {
        let cells = &self.data[row * self.cols..(row + 1) * self.cols];
        for (&v, c) in values.iter().zip(cells) {
            c.store(v.to_bits(), Ordering::Relaxed);
        }
    }

    fn add_scaled(&self, row: usize, delta: &[f32], scale: f32) {
        let cells = &self.data[row * self.cols..(row + 1) * self.cols];
        for (&d, c) in delta.iter().zip(cells) {
            let v = f32::from_bits(c.load(Ordering::Relaxed)) + d * scale;
            c.store(v.to_bits(), Ordering::Relaxed);
        }
    }

    fn into_vec(self) -> Vec<f32> {
        self.data.into_iter().map(|c| f32::from_bits(c.into_inner())).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub vocab_size: usize,
    pub bucket_rows: usize,
    pub tokens: usize,
    /// Mean per-pair loss over the final epoch.
    pub final_loss: f64,
}

pub fn train<I, S>(lines: I, config: &EmbeddingConfig) -> Result<VectorTable>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    train_with_report(lines, config).map(|(t, _)| t)
}

struct Setup<'a> {
    config: &'a EmbeddingConfig,
    corpus: Vec<Vec<u32>>,
    /// input rows summed to form each word's hidden vector
    input_rows: Vec<Vec<usize>>,
    noise: Option<WeightedIndex<f64>>,
    input: SharedMatrix,
    output: SharedMatrix,
    processed: AtomicU64,
    total: u64,
}

pub fn train_with_report<I, S>(lines: I, config: &EmbeddingConfig) -> Result<(VectorTable, TrainReport)>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    config.validate()?;
    let dim = config.dimension;

    // Sentences bound the context windows.
    let sentences: Vec<Vec<String>> = lines
        .into_iter()
        .flat_map(|line| text::preprocess(line.as_ref()))
        .map(|s| s.tokens().map(str::to_string).collect::<Vec<_>>())
        .filter(|t| !t.is_empty())
        .collect();

    let mut counts: HashMap<&str, usize> = HashMap::new();
    for t in sentences.iter().flatten() {
        *counts.entry(t.as_str()).or_insert(0) += 1;
    }
    let mut vocab: Vec<(&str, usize)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= config.min_count)
        .collect();
    vocab.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary {
            min_count: config.min_count,
        });
    }
    let ids: HashMap<&str, u32> = vocab.iter().enumerate().map(|(i, &(w, _))| (w, i as u32)).collect();
    let corpus: Vec<Vec<u32>> = sentences
        .iter()
        .map(|s| s.iter().filter_map(|t| ids.get(t.as_str()).copied()).collect::<Vec<_>>())
        .filter(|s| !s.is_empty())
        .collect();
    let tokens: usize = corpus.iter().map(Vec::len).sum();

    let n_words = vocab.len();
    let word_buckets: Vec<Vec<u32>> = if config.subwords_enabled {
        vocab
            .iter()
            .map(|(w, _)| subword::bucket_ids(w, config.ngram_min, config.ngram_max, config.buckets))
            .collect()
    } else {
        vec![Vec::new(); n_words]
    };
    let bucket_ids: Vec<u32> = word_buckets
        .iter()
        .flatten()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let bucket_row: HashMap<u32, usize> =
        bucket_ids.iter().enumerate().map(|(i, &b)| (b, n_words + i)).collect();
    let input_rows: Vec<Vec<usize>> = word_buckets
        .iter()
        .enumerate()
        .map(|(w, bs)| std::iter::once(w).chain(bs.iter().map(|b| bucket_row[b])).collect())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let bound = 1.0 / dim as f32;
    let n_rows = n_words + bucket_ids.len();
    let init: Vec<f32> = (0..n_rows * dim).map(|_| rng.random_range(-bound..bound)).collect();

    let noise = if n_words > 1 && config.negatives > 0 {
        let weights = vocab.iter().map(|&(_, c)| (c as f64).powf(0.75));
        Some(WeightedIndex::new(weights).expect("positive counts"))
    } else {
        None
    };

    let setup = Setup {
        config,
        corpus,
        input_rows,
        noise,
        input: SharedMatrix::from_vec(dim, init),
        output: SharedMatrix::from_vec(dim, vec![0.0; n_words * dim]),
        processed: AtomicU64::new(0),
        total: (tokens * config.epochs).max(1) as u64,
    };

    let threads = config.threads.max(1).min(setup.corpus.len().max(1));
    let (loss_sum, pairs) = if threads == 1 {
        let all: Vec<usize> = (0..setup.corpus.len()).collect();
        run_worker(&setup, &all, 0)?
    } else {
        let chunk = setup.corpus.len().div_ceil(threads);
        let shards: Vec<Vec<usize>> = (0..threads)
            .map(|t| (t * chunk..((t + 1) * chunk).min(setup.corpus.len())).collect())
            .collect();
        let results: Vec<Result<(f64, u64)>> = std::thread::scope(|scope| {
            let handles: Vec<_> = shards
                .iter()
                .enumerate()
                .map(|(t, shard)| {
                    let setup = &setup;
                    scope.spawn(move || run_worker(setup, shard, t as u64))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        let mut acc = (0.0, 0);
        for r in results {
            let (l, n) = r?;
            acc.0 += l;
            acc.1 += n;
        }
        acc
    };

    let input = setup.input.into_vec();
    let mut table = VectorTable::new(dim);
    let mut composed = vec![0.0f32; dim];
    for (w, (word, _)) in vocab.iter().enumerate() {
        composed.copy_from_slice(&input[w * dim..(w + 1) * dim]);
        for &row in &setup.input_rows[w][1..] {
            composed
                .iter_mut()
                .zip(&input[row * dim..(row + 1) * dim])
                .for_each(|(a, &x)| *a += x);
        }
        table.insert(word.to_string(), &composed)?;
    }
    if config.subwords_enabled {
        let own = input[..n_words * dim].to_vec();
        let buckets = input[n_words * dim..].to_vec();
        table = table.with_subwords(SubwordTable::new(
            config.ngram_min,
            config.ngram_max,
            config.buckets,
            own,
            bucket_ids.clone(),
            buckets,
        ));
    }

    let report = TrainReport {
        vocab_size: n_words,
        bucket_rows: bucket_ids.len(),
        tokens,
        final_loss: if pairs == 0 { 0.0 } else { loss_sum / pairs as f64 },
    };
    log::info!(
        "trained {} words, {} bucket rows, {} tokens, final loss {:.4}",
        report.vocab_size,
        report.bucket_rows,
        report.tokens,
        report.final_loss
    );
    Ok((table, report))
}

/// Returns (loss sum, pair count) over the final epoch.
fn run_worker(s: &Setup, shard: &[usize], worker: u64) -> Result<(f64, u64)> {
    let cfg = s.config;
    let dim = cfg.dimension;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1 + worker);

    let mut hidden = vec![0.0f32; dim];
    let mut hidden_step = vec![0.0f32; dim];
    let mut out_row = vec![0.0f32; dim];
    let lr0 = cfg.learning_rate as f32;

    let mut last = (0.0f64, 0u64);
    for epoch in 0..cfg.epochs {
        let mut epoch_loss = 0.0f64;
        let mut epoch_pairs = 0u64;
        for &si in shard {
            let sentence = &s.corpus[si];
            for i in 0..sentence.len() {
                let done = s.processed.fetch_add(1, Ordering::Relaxed);
                let progress = done as f32 / s.total as f32;
                let lr = lr0 * (1.0 - progress).max(1e-4);
                let reach = rng.random_range(1..=cfg.window);
                let lo = i.saturating_sub(reach);
                let hi = (i + reach).min(sentence.len() - 1);
                let rows = &s.input_rows[sentence[i] as usize];
                for c in lo..=hi {
                    if c == i {
                        continue;
                    }
                    let target = sentence[c] as usize;

                    hidden.iter_mut().for_each(|h| *h = 0.0);
                    for &r in rows {
                        s.input.accumulate(r, &mut hidden);
                    }
                    hidden_step.iter_mut().for_each(|h| *h = 0.0);

                    s.output.read(target, &mut out_row);
                    let mut loss = logistic_step(&hidden, &mut out_row, true, lr, &mut hidden_step);
                    s.output.write(target, &out_row);

                    if let Some(noise) = &s.noise {
                        for _ in 0..cfg.negatives {
                            let mut neg = noise.sample(&mut rng);
                            for _ in 0..10 {
                                if neg != target {
                                    break;
                                }
                                neg = noise.sample(&mut rng);
                            }
                            if neg == target {
                                continue;
                            }
                            s.output.read(neg, &mut out_row);
                            loss += logistic_step(&hidden, &mut out_row, false, lr, &mut hidden_step);
                            s.output.write(neg, &out_row);
                        }
                    }
                    if !loss.is_finite() {
                        return Err(Error::NonFiniteLoss(format!(
                            "epoch {epoch}, sentence {si}, position {i}"
                        )));
                    }

                    // The step on the summed input is spread evenly over its rows.
                    let scale = 1.0 / rows.len() as f32;
                    for &r in rows {
                        s.input.add_scaled(r, &hidden_step, scale);
                    }
                    epoch_loss += loss as f64;
                    epoch_pairs += 1;
                }
            }
        }
        last = (epoch_loss, epoch_pairs);
    }
    Ok(last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::word_vector;

    fn small(subwords: bool) -> EmbeddingConfig {
        EmbeddingConfig {
            dimension: 16,
            min_count: 1,
            epochs: 3,
            buckets: 1000,
            subwords_enabled: subwords,
            ..Default::default()
        }
    }

    #[test]
    fn single_token_corpus() {
        let t = train(["bond bond bond", "bond"], &small(true)).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.get("bond").unwrap().len(), 16);
    }

    #[test]
    fn empty_vocabulary_reports_min_count() {
        let cfg = EmbeddingConfig { min_count: 5, ..small(false) };
        let err = train(["a b c"], &cfg).unwrap_err();
        assert!(matches!(err, Error::EmptyVocabulary { min_count: 5 }));
    }

    #[test]
    fn seeded_training_is_bit_reproducible() {
        let lines = ["the swap pays a fixed leg", "the bond pays a coupon", "a swap has two legs"];
        let a = train(lines, &small(true)).unwrap();
        let b = train(lines, &small(true)).unwrap();
        assert_eq!(a, b);
        let c = train(lines, &EmbeddingConfig { seed: 2, ..small(true) }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn vocabulary_vectors_finite_and_nonzero() {
        let lines = ["the swap pays a fixed leg", "the bond pays a coupon"];
        for sub in [false, true] {
            let t = train(lines, &small(sub)).unwrap();
            for (_, v) in t.iter() {
                assert!(v.iter().all(|x| x.is_finite()));
                assert!(v.iter().any(|&x| x != 0.0));
            }
        }
    }

    #[test]
    fn stored_vector_is_own_plus_ngrams() {
        let t = train(["interest rate swap", "interest rate future"], &small(true)).unwrap();
        for w in t.words() {
            assert_eq!(t.compose(w).unwrap(), t.get(w).unwrap());
        }
    }

    #[test]
    fn oov_composed_from_shared_ngrams() {
        let t = train(["swaption swap swaps"], &small(true)).unwrap();
        let v = word_vector(&t, "swapped");
        assert!(matches!(v.source, crate::embeddings::VectorSource::Subwords { .. }));
        let none = word_vector(&t, "qqqq");
        assert!(none.is_zero_fallback());
    }

    #[test]
    fn multi_worker_mode_trains() {
        let lines: Vec<String> = (0..40).map(|i| format!("bond coupon maturity {}", i % 3)).collect();
        let cfg = EmbeddingConfig { threads: 4, ..small(true) };
        let t = train(&lines, &cfg).unwrap();
        assert!(t.iter().all(|(_, v)| v.iter().all(|x| x.is_finite())));
    }
}
