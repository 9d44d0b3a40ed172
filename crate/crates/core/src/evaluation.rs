//! Accuracy and Mean Rank, the repeated-split protocol and label
//! distribution reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifiers::{
    train_forest, train_logreg, CosineRanker, ForestParams, LogRegParams, RankedPrediction, Ranker,
};
use crate::error::{Error, Result};
use crate::ontology::DefinitionCorpus;
use crate::representation::{FeatureMode, TermEncoder};
use crate::tags::{Tag, NUM_TAGS};
use crate::text::{split, SplitSpec};
use crate::tsv;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledTerm {
    pub term: String,
    pub gold: Tag,
}

/// `(term, gold tag)` records in the task's `term<TAB>label` format.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabeledTermSet {
    pub entries: Vec<LabeledTerm>,
}

impl LabeledTermSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn golds(&self) -> Vec<Tag> {
        self.entries.iter().map(|e| e.gold).collect()
    }

    /// Reads `term<TAB>label` rows. A `term<TAB>label` header line is
    /// skipped; unknown labels fail with their line number.
    pub fn read_tsv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut entries = Vec::new();
        for (n, line) in tsv::read_lines(path)? {
            if line.trim().is_empty() || (entries.is_empty() && line.eq_ignore_ascii_case("term\tlabel")) {
                continue;
            }
            let Some((term, label)) = line.split_once('\t') else {
                return Err(Error::parse(path, n, "expected `term<TAB>label`"));
            };
            let term = tsv::unescape(term.trim());
            if term.is_empty() {
                return Err(Error::parse(path, n, "empty term"));
            }
            let gold = Tag::from_name(label)
                .ok_or_else(|| Error::parse(path, n, format!("unknown tag `{}`", label.trim())))?;
            entries.push(LabeledTerm { term, gold });
        }
        Ok(LabeledTermSet { entries })
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "term\tlabel")?;
        for e in &self.entries {
            writeln!(w, "{}\t{}", tsv::escape(&e.term), e.gold)?;
        }
        Ok(())
    }
}

/// Writes rankings as `term<TAB>tag<TAB>score…`, keeping the `top_k` best.
pub fn write_predictions<W: Write>(preds: &[RankedPrediction], top_k: Option<usize>, mut w: W) -> std::io::Result<()> {
    for p in preds {
        write!(w, "{}", tsv::escape(&p.term))?;
        let k = top_k.unwrap_or(p.ranking.len()).min(p.ranking.len());
        for (tag, score) in &p.ranking[..k] {
            write!(w, "\t{tag}\t{score}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_predictions(path: impl AsRef<Path>) -> Result<Vec<RankedPrediction>> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for (n, line) in tsv::read_lines(path)? {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 3 || fields.len() % 2 == 0 {
            return Err(Error::parse(path, n, "expected `term` followed by tag/score pairs"));
        }
        let mut ranking = Vec::new();
        for pair in fields[1..].chunks(2) {
            let tag = Tag::from_name(pair[0])
                .ok_or_else(|| Error::parse(path, n, format!("unknown tag `{}`", pair[0])))?;
            let score: f64 = pair[1]
                .parse()
                .map_err(|_| Error::parse(path, n, format!("bad score `{}`", pair[1])))?;
            ranking.push((tag, score));
        }
        out.push(RankedPrediction {
            term: tsv::unescape(fields[0]),
            ranking,
        });
    }
    Ok(out)
}

fn check_lengths(preds: &[RankedPrediction], gold: &[Tag]) -> Result<()> {
    if preds.len() != gold.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions but {} gold labels",
            preds.len(),
            gold.len()
        )));
    }
    Ok(())
}

/// Fraction of samples whose top-ranked tag is the gold tag.
pub fn accuracy(preds: &[RankedPrediction], gold: &[Tag]) -> Result<f64> {
    check_lengths(preds, gold)?;
    if preds.is_empty() {
        return Err(Error::InvalidArgument("accuracy of an empty set".into()));
    }
    let hits = preds
        .iter()
        .zip(gold)
        .filter(|(p, &g)| p.ranking.first().is_some_and(|&(t, _)| t == g))
        .count();
    Ok(hits as f64 / preds.len() as f64)
}

/// Mean 1-based position of the gold tag.
///
/// With `cap = Some(k)` each rank becomes `min(rank, k + 1)` and a gold tag
/// missing from a truncated ranking counts as `k + 1`. Without a cap a
/// missing gold tag is an error.
pub fn mean_rank(preds: &[RankedPrediction], gold: &[Tag], cap: Option<usize>) -> Result<f64> {
    check_lengths(preds, gold)?;
    if preds.is_empty() {
        return Err(Error::InvalidArgument("mean rank of an empty set".into()));
    }
    let mut total = 0usize;
    for (i, (p, &g)) in preds.iter().zip(gold).enumerate() {
        let rank = match (p.rank_of(g), cap) {
            (Some(r), Some(k)) => r.min(k + 1),
            (Some(r), None) => r,
            (None, Some(k)) => k + 1,
            (None, None) => {
                return Err(Error::GoldNotRanked {
                    index: i,
                    gold: g.to_string(),
                })
            }
        };
        total += rank;
    }
    Ok(total as f64 / preds.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelStat {
    pub support: usize,
    /// Recall at rank 1 among samples with this gold tag.
    pub matched_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub accuracy: f64,
    pub mean_rank: f64,
    pub n: usize,
    pub per_label: BTreeMap<Tag, LabelStat>,
}

pub fn evaluate(preds: &[RankedPrediction], gold: &[Tag], cap: Option<usize>) -> Result<EvalResult> {
    let acc = accuracy(preds, gold)?;
    let mr = mean_rank(preds, gold, cap)?;
    let mut per_label: BTreeMap<Tag, (usize, usize)> = BTreeMap::new();
    for (p, &g) in preds.iter().zip(gold) {
        let e = per_label.entry(g).or_default();
        e.0 += 1;
        if p.top() == g {
            e.1 += 1;
        }
    }
    Ok(EvalResult {
        accuracy: acc,
        mean_rank: mr,
        n: preds.len(),
        per_label: per_label
            .into_iter()
            .map(|(t, (s, h))| {
                (
                    t,
                    LabelStat {
                        support: s,
                        matched_accuracy: h as f64 / s as f64,
                    },
                )
            })
            .collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunProtocol {
    pub runs: usize,
    pub train_fraction: f64,
    pub base_seed: u64,
    /// Evaluate on the training split itself (smoke tests only).
    pub evaluate_on_train: bool,
    pub mean_rank_cap: Option<usize>,
}

impl Default for RunProtocol {
    fn default() -> Self {
        RunProtocol {
            runs: 5,
            train_fraction: 0.8,
            base_seed: 0,
            evaluate_on_train: false,
            mean_rank_cap: None,
        }
    }
}

/// Something that can be trained on one split and rank the terms of another.
pub trait Experiment {
    fn fit_predict(&self, train: &[LabeledTerm], test: &[LabeledTerm], seed: u64) -> Result<Vec<RankedPrediction>>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierSpec {
    Logreg(LogRegParams),
    Forest(ForestParams),
    /// No training: cosine similarity to the tag names' sentence vectors.
    Cosine,
}

/// Term features from a [`TermEncoder`] fed to a classifier.
pub struct FeatureExperiment<'a> {
    pub encoder: TermEncoder<'a>,
    pub mode: FeatureMode,
    pub classifier: ClassifierSpec,
}

impl FeatureExperiment<'_> {
    fn features(&self, items: &[LabeledTerm]) -> Result<Vec<Vec<f64>>> {
        items.iter().map(|e| self.encoder.encode(&e.term, self.mode)).collect()
    }
}

impl Experiment for FeatureExperiment<'_> {
    fn fit_predict(&self, train: &[LabeledTerm], test: &[LabeledTerm], seed: u64) -> Result<Vec<RankedPrediction>> {
        let labels: Vec<Tag> = train.iter().map(|e| e.gold).collect();
        let ranker: Box<dyn Ranker> = match &self.classifier {
            ClassifierSpec::Logreg(p) => {
                let p = LogRegParams { seed, ..p.clone() };
                Box::new(train_logreg(&self.features(train)?, &labels, &p)?.0)
            }
            ClassifierSpec::Forest(p) => {
                let p = ForestParams { seed, ..p.clone() };
                Box::new(train_forest(&self.features(train)?, &labels, &p)?.0)
            }
            ClassifierSpec::Cosine => Box::new(CosineRanker {
                labels: self.encoder.label_vectors(&Tag::all_vec())?,
            }),
        };
        test.iter()
            .map(|e| Ok(ranker.rank(&self.encoder.encode(&e.term, self.mode)?)?.with_term(&e.term)))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single run.
    pub stddev: f64,
}

impl Summary {
    fn of(xs: &[f64]) -> Summary {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Summary { mean, stddev: var.sqrt() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelSummary {
    /// Matched accuracy averaged over the runs where the label was tested.
    pub matched_accuracy: f64,
    pub runs_tested: usize,
    pub total_support: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub accuracy: Summary,
    pub mean_rank: Summary,
    pub per_run: Vec<EvalResult>,
    pub per_label: BTreeMap<Tag, LabelSummary>,
    /// Labels in the data but never in a training split, with a note.
    pub excluded_labels: BTreeMap<Tag, String>,
}

pub fn run_protocol(data: &LabeledTermSet, experiment: &dyn Experiment, protocol: &RunProtocol) -> Result<ProtocolReport> {
    if data.len() < 10 {
        return Err(Error::InvalidArgument(format!("need at least 10 labelled terms, got {}", data.len())));
    }
    if protocol.runs == 0 || !(protocol.train_fraction > 0.0 && protocol.train_fraction < 1.0) {
        return Err(Error::InvalidArgument("runs >= 1 and 0 < train_fraction < 1 required".into()));
    }

    let mut per_run = Vec::with_capacity(protocol.runs);
    let mut trained_labels = [false; NUM_TAGS];
    for r in 0..protocol.runs {
        let seed = protocol.base_seed + r as u64;
        let spec = SplitSpec {
            train: protocol.train_fraction,
            dev: 0.0,
            test: 1.0 - protocol.train_fraction,
            seed,
        };
        let parts = split(data.entries.clone(), &spec)?;
        let test = if protocol.evaluate_on_train { &parts.train } else { &parts.test };
        parts.train.iter().for_each(|e| trained_labels[e.gold.index()] = true);
        let preds = experiment.fit_predict(&parts.train, test, seed)?;
        let gold: Vec<Tag> = test.iter().map(|e| e.gold).collect();
        let result = evaluate(&preds, &gold, protocol.mean_rank_cap)?;
        log::info!("run {r}: accuracy {:.4}, mean rank {:.4}", result.accuracy, result.mean_rank);
        per_run.push(result);
    }

    let mut excluded = BTreeMap::new();
    let mut per_label = BTreeMap::new();
    for tag in Tag::all() {
        let present = data.entries.iter().any(|e| e.gold == tag);
        if !present {
            continue;
        }
        if !trained_labels[tag.index()] {
            log::warn!("label {tag} never appears in a training split; excluded from per-label report");
            excluded.insert(tag, "absent from every training split".to_string());
            continue;
        }
        let stats: Vec<&LabelStat> = per_run.iter().filter_map(|r| r.per_label.get(&tag)).collect();
        if stats.is_empty() {
            continue;
        }
        per_label.insert(
            tag,
            LabelSummary {
                matched_accuracy: stats.iter().map(|s| s.matched_accuracy).sum::<f64>() / stats.len() as f64,
                runs_tested: stats.len(),
                total_support: stats.iter().map(|s| s.support).sum(),
            },
        );
    }

    let accs: Vec<f64> = per_run.iter().map(|r| r.accuracy).collect();
    let mrs: Vec<f64> = per_run.iter().map(|r| r.mean_rank).collect();
    Ok(ProtocolReport {
        accuracy: Summary::of(&accs),
        mean_rank: Summary::of(&mrs),
        per_run,
        per_label,
        excluded_labels: excluded,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelDistribution {
    pub tag: Tag,
    pub train_count: usize,
    pub train_percent: f64,
    pub corpus_count: usize,
    pub corpus_percent: f64,
}

/// Label shares in the training set and in the definition corpus, side by side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub train_total: usize,
    pub corpus_total: usize,
    pub labels: Vec<LabelDistribution>,
}

fn percent(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * count as f64 / total as f64
    }
}

pub fn distribution_report(train: &LabeledTermSet, corpus: &DefinitionCorpus) -> DistributionReport {
    let mut train_counts = [0usize; NUM_TAGS];
    train.entries.iter().for_each(|e| train_counts[e.gold.index()] += 1);
    let corpus_counts = corpus.per_tag_counts();
    let labels = Tag::all()
        .map(|tag| {
            let tc = train_counts[tag.index()];
            let cc = corpus_counts.get(&tag).copied().unwrap_or(0);
            LabelDistribution {
                tag,
                train_count: tc,
                train_percent: percent(tc, train.len()),
                corpus_count: cc,
                corpus_percent: percent(cc, corpus.len()),
            }
        })
        .collect();
    DistributionReport {
        train_total: train.len(),
        corpus_total: corpus.len(),
        labels,
    }
}

impl DistributionReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<32} {:>10} {:>10}", "Label", "Train %", "Corpus %");
        for l in &self.labels {
            let _ = writeln!(s, "{:<32} {:>10.2} {:>10.2}", l.tag.name(), l.train_percent, l.corpus_percent);
        }
        let _ = writeln!(s, "{:<32} {:>10} {:>10}", "(count)", self.train_total, self.corpus_total);
        s
    }
}

/// Plain-text `Model | Accuracy | Mean Rank` table.
pub fn summary_table(rows: &[(String, f64, f64)]) -> String {
    let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(5).max(5);
    let mut s = String::new();
    let rule = format!("+{}+{}+{}+\n", "-".repeat(width + 2), "-".repeat(10), "-".repeat(11));
    s.push_str(&rule);
    let _ = writeln!(s, "| {:<width$} | {:>8} | {:>9} |", "Model", "Accuracy", "Mean Rank");
    s.push_str(&rule);
    for (name, acc, mr) in rows {
        let _ = writeln!(s, "| {name:<width$} | {acc:>8.3} | {mr:>9.3} |");
    }
    s.push_str(&rule);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tag(i: usize) -> Tag {
        Tag::from_index(i).unwrap()
    }

    fn pred(order: &[usize]) -> RankedPrediction {
        RankedPrediction {
            term: String::new(),
            ranking: order.iter().enumerate().map(|(i, &t)| (tag(t), 1.0 - i as f64 * 0.1)).collect(),
        }
    }

    #[test]
    fn perfect_predictions() {
        let preds = vec![pred(&[0, 1, 2]), pred(&[2, 1, 0])];
        let gold = [tag(0), tag(2)];
        assert_eq!(accuracy(&preds, &gold).unwrap(), 1.0);
        assert_eq!(mean_rank(&preds, &gold, None).unwrap(), 1.0);
    }

    #[test]
    fn ranks_one_and_two() {
        let preds = vec![pred(&[0, 1]), pred(&[0, 1])];
        assert_eq!(mean_rank(&preds, &[tag(0), tag(1)], None).unwrap(), 1.5);
    }

    #[test]
    fn one_of_four() {
        let preds = vec![pred(&[0, 1]); 4];
        let gold = [tag(0), tag(1), tag(1), tag(1)];
        assert_eq!(accuracy(&preds, &gold).unwrap(), 0.25);
    }

    #[test]
    fn cap_and_missing_gold() {
        let preds = vec![pred(&[0, 1, 2, 3, 4])];
        assert_eq!(mean_rank(&preds, &[tag(4)], Some(3)).unwrap(), 4.0);
        let truncated = vec![pred(&[0, 1, 2])];
        assert_eq!(mean_rank(&truncated, &[tag(9)], Some(3)).unwrap(), 4.0);
        assert!(matches!(mean_rank(&truncated, &[tag(9)], None), Err(Error::GoldNotRanked { index: 0, .. })));
    }

    #[test]
    fn errors_on_bad_input() {
        assert!(accuracy(&[], &[]).is_err());
        assert!(accuracy(&[pred(&[0])], &[]).is_err());
        assert!(mean_rank(&[pred(&[0])], &[tag(0), tag(1)], None).is_err());
    }

    #[test]
    fn per_label_matched_accuracy() {
        let preds = vec![pred(&[0, 1]), pred(&[1, 0]), pred(&[0, 1])];
        let r = evaluate(&preds, &[tag(0), tag(0), tag(1)], None).unwrap();
        assert_eq!(r.per_label[&tag(0)], LabelStat { support: 2, matched_accuracy: 0.5 });
        assert_eq!(r.per_label[&tag(1)], LabelStat { support: 1, matched_accuracy: 0.0 });
        assert_eq!(r.per_label.values().map(|s| s.support).sum::<usize>(), r.n);
    }

    #[test]
    fn single_label_train_distribution() {
        let train = LabeledTermSet {
            entries: (0..4).map(|i| LabeledTerm { term: format!("t{i}"), gold: tag(8) }).collect(),
        };
        let r = distribution_report(&train, &DefinitionCorpus::default());
        for l in &r.labels {
            let want = if l.tag == tag(8) { 100.0 } else { 0.0 };
            assert_eq!(l.train_percent, want);
        }
    }

    #[test]
    fn tsv_rejects_unknown_tag_with_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.tsv");
        std::fs::write(&p, "term\tlabel\nS&P 500\tEquity Index\nfoo\tBananas\n").unwrap();
        let err = LabeledTermSet::read_tsv(&p).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn predictions_round_trip() {
        let preds = vec![pred(&[3, 1, 2]).with_term("interest rate swap"), pred(&[0, 2, 1]).with_term("bond")];
        let mut buf = Vec::new();
        write_predictions(&preds, None, &mut buf).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.tsv");
        std::fs::write(&p, buf).unwrap();
        assert_eq!(read_predictions(&p).unwrap(), preds);
    }

    struct Memorize;

    impl Experiment for Memorize {
        fn fit_predict(&self, train: &[LabeledTerm], test: &[LabeledTerm], _: u64) -> Result<Vec<RankedPrediction>> {
            test.iter()
                .map(|e| {
                    let gold = train.iter().find(|t| t.term == e.term).map(|t| t.gold).unwrap_or(tag(0));
                    Ok(RankedPrediction::from_scores(Tag::all().map(|t| (t, if t == gold { 1.0 } else { 0.0 }))))
                })
                .collect()
        }
    }

    fn ten() -> LabeledTermSet {
        LabeledTermSet {
            entries: (0..10).map(|i| LabeledTerm { term: format!("t{i}"), gold: tag(i % 3) }).collect(),
        }
    }

    #[test]
    fn memorizing_smoke_run() {
        let proto = RunProtocol { runs: 1, evaluate_on_train: true, ..Default::default() };
        let r = run_protocol(&ten(), &Memorize, &proto).unwrap();
        assert_eq!(r.accuracy.mean, 1.0);
        assert_eq!(r.mean_rank.mean, 1.0);
        assert_eq!(r.accuracy.stddev, 0.0);
    }

    #[test]
    fn protocol_reproducible() {
        let proto = RunProtocol { runs: 3, base_seed: 11, ..Default::default() };
        let a = run_protocol(&ten(), &Memorize, &proto).unwrap();
        let b = run_protocol(&ten(), &Memorize, &proto).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.per_run.len(), 3);
    }

    #[test]
    fn too_small_data_rejected() {
        let mut d = ten();
        d.entries.pop();
        assert!(run_protocol(&d, &Memorize, &RunProtocol::default()).is_err());
    }

    #[test]
    fn table_layout() {
        let t = summary_table(&[("yseop_2".into(), 0.917, 1.141)]);
        assert!(t.contains("| yseop_2 |    0.917 |     1.141 |"), "{t}");
    }
}
