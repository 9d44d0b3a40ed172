use hypernym::classifiers::{train_forest, train_logreg, ForestParams, LogRegParams, RankedPrediction};
use hypernym::embeddings::subword::{bucket_ids, ngrams};
use hypernym::evaluation::{accuracy, mean_rank};
use hypernym::representation::{fuse, pad, SENTENCE_DIM};
use hypernym::Tag;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tag(i: usize) -> Tag {
    Tag::from_index(i).unwrap()
}

fn scores() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5i32..5, 17).prop_map(|v| v.into_iter().map(|x| x as f64 / 4.0).collect())
}

proptest! {
    #[test]
    fn ranking_is_a_sorted_permutation(s in scores()) {
        let p = RankedPrediction::from_scores(Tag::all().zip(s.iter().copied()));
        let mut seen: Vec<usize> = p.ranking.iter().map(|(t, _)| t.index()).collect();
        seen.sort();
        prop_assert_eq!(seen, (0..17).collect::<Vec<_>>());
        for w in p.ranking.windows(2) {
            prop_assert!(w[0].1 > w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0));
        }
        for (i, (t, _)) in p.ranking.iter().enumerate() {
            prop_assert_eq!(p.rank_of(*t), Some(i + 1));
        }
    }

    #[test]
    fn raising_gold_score_never_worsens_rank(s in scores(), gold in 0..17usize, bump in 0.0f64..3.0) {
        let before = RankedPrediction::from_scores(Tag::all().zip(s.iter().copied()));
        let mut raised = s.clone();
        raised[gold] += bump;
        let after = RankedPrediction::from_scores(Tag::all().zip(raised));
        let g = [tag(gold)];
        let (mr0, mr1) = (mean_rank(&[before], &g, None).unwrap(), mean_rank(&[after.clone()], &g, None).unwrap());
        prop_assert!(mr1 <= mr0);
        prop_assert!((1.0..=17.0).contains(&mr1));
        prop_assert_eq!(accuracy(&[after], &g).unwrap() == 1.0, mr1 == 1.0);
    }

    #[test]
    fn cap_only_lowers_mean_rank(rows in prop::collection::vec((scores(), 0..17usize), 1..8), k in 1..17usize) {
        let preds: Vec<_> = rows.iter().map(|(s, _)| RankedPrediction::from_scores(Tag::all().zip(s.iter().copied()))).collect();
        let gold: Vec<Tag> = rows.iter().map(|(_, g)| tag(*g)).collect();
        let full = mean_rank(&preds, &gold, None).unwrap();
        let capped = mean_rank(&preds, &gold, Some(k)).unwrap();
        prop_assert!(capped <= full);
        prop_assert!(capped <= (k + 1) as f64);
    }

    #[test]
    fn fuse_adds_padded_word_part(seed in any::<u64>(), word_dim in 0..=SENTENCE_DIM) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sent: Vec<f64> = (0..SENTENCE_DIM).map(|_| rng.random_range(-1e3..1e3)).collect();
        let word: Vec<f64> = (0..word_dim).map(|_| rng.random_range(-1e3..1e3)).collect();
        let f = fuse(&sent, &word).unwrap();
        let pw = pad(&word, SENTENCE_DIM).unwrap();
        for i in 0..SENTENCE_DIM {
            prop_assert_eq!(f[i], sent[i] + pw[i]);
        }
        prop_assert!(fuse(&sent, &vec![0.0; SENTENCE_DIM + 1]).is_err());
        prop_assert!(fuse(&sent[1..], &word).is_err());
    }

    #[test]
    fn ngram_count_matches_formula(word in "[a-zé]{0,12}", min in 1..4usize, extra in 0..4usize) {
        let max = min + extra;
        let len = word.chars().count() + 2;
        let expected: usize = (min..=max).filter(|&n| n <= len).map(|n| len - n + 1).sum();
        let grams = ngrams(&word, min, max);
        prop_assert_eq!(grams.len(), expected);
        let ids = bucket_ids(&word, min, max, 1000);
        prop_assert_eq!(ids.len(), expected);
        prop_assert!(ids.iter().all(|&b| b < 1000));
    }
}

#[test]
fn full_batch_logreg_ignores_duplication() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x: Vec<Vec<f64>> = (0..30).map(|_| (0..5).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let y: Vec<Tag> = (0..30).map(|i| tag(i % 3)).collect();
    let params = LogRegParams { batch_size: None, epochs: 50, ..Default::default() };
    let (once, _) = train_logreg(&x, &y, &params).unwrap();
    let x2: Vec<Vec<f64>> = x.iter().chain(&x).cloned().collect();
    let y2: Vec<Tag> = y.iter().chain(&y).copied().collect();
    let (twice, _) = train_logreg(&x2, &y2, &params).unwrap();
    for (a, b) in once.weights.iter().chain(&once.biases).zip(twice.weights.iter().chain(&twice.biases)) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn forest_out_of_bag_on_noise_is_chance() {
    let n = 400;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x: Vec<Vec<f64>> = (0..n).map(|_| (0..4).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
    let y: Vec<Tag> = (0..n).map(|_| tag(rng.random_range(0..2) * 5)).collect();
    let params = ForestParams { num_trees: 50, seed: 2, ..Default::default() };
    let (_, report) = train_forest(&x, &y, &params).unwrap();
    let oob = report.oob_accuracy.expect("every sample is out of bag somewhere");
    let sigma = (0.25 / n as f64).sqrt();
    assert!((oob - 0.5).abs() <= 3.0 * sigma, "oob {oob} is not chance");
}
