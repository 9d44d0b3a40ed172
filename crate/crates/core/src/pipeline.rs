//! File-to-file pipeline stages driven by one TOML configuration.
//!
//! Every stage reads its inputs from disk and writes its artifacts to the
//! output directory. Text artifacts start with a `#!hypernym` provenance
//! line, JSON artifacts carry a `provenance` object.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifiers::{train_forest, train_logreg, Classifier, CosineRanker, ModelContainer, RankedPrediction, Ranker};
use crate::embeddings::{self, EmbeddingConfig, VectorTable};
use crate::error::{Error, Result};
use crate::evaluation::{
    self, distribution_report, run_protocol, ClassifierSpec, DistributionReport, EvalResult, FeatureExperiment,
    LabelSummary, LabeledTermSet, RunProtocol,
};
use crate::ontology::{self, DefinitionCorpus, FetchOptions, MineOptions, PageSource, SeedPage};
use crate::representation::{FeatureMode, SentenceVectorStore, TermEncoder};
use crate::tags::Tag;
use crate::text::{self, build_pairs, split, PairSet, SplitSpec};
use crate::tsv::{self, PROVENANCE_PREFIX};

pub const OUTPUT_DIR_ENV: &str = "HYPERNYM_OUTPUT_DIR";
pub const THREADS_ENV: &str = "HYPERNYM_THREADS";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// JSONL ontology dump.
    pub ontology: Option<PathBuf>,
    /// Plain-text prospectus corpus for word vectors.
    pub prospectus: Option<PathBuf>,
    /// 768-d sentence vectors in word2vec text format.
    pub sentence_vectors: Option<PathBuf>,
    /// Labelled training terms, `term<TAB>label`.
    pub terms: Option<PathBuf>,
    /// Terms to predict; a label column, if present, is the gold standard.
    pub test_terms: Option<PathBuf>,
    pub definitions: Option<PathBuf>,
    pub word_vectors: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub predictions: Option<PathBuf>,
    pub output_dir: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            ontology: None,
            prospectus: None,
            sentence_vectors: None,
            terms: None,
            test_terms: None,
            definitions: None,
            word_vectors: None,
            model: None,
            predictions: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MiningConfig {
    pub max_depth: usize,
    pub expand_instances: bool,
    /// Seed tag names; empty means all 17.
    pub seeds: Vec<String>,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            max_depth: 2,
            expand_instances: false,
            seeds: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PairsConfig {
    pub positive: f64,
    pub negative: f64,
    pub train: f64,
    pub dev: f64,
    pub test: f64,
}

impl Default for PairsConfig {
    fn default() -> Self {
        PairsConfig {
            positive: text::DEFAULT_POSITIVE,
            negative: text::DEFAULT_NEGATIVE,
            train: 0.7,
            dev: 0.1,
            test: 0.2,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictConfig {
    /// Tags written per term; all 17 when unset.
    pub top_k: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Propagated to mining order, splits, embeddings, classifiers and the
    /// run protocol.
    pub seed: u64,
    pub threads: usize,
    pub feature_mode: FeatureMode,
    /// Zero sentence vector instead of an error for terms the store lacks.
    pub missing_sentence_fallback: bool,
    pub paths: Paths,
    pub mining: MiningConfig,
    pub pairs: PairsConfig,
    pub embedding: EmbeddingConfig,
    pub classifier: ClassifierSpec,
    pub protocol: RunProtocol,
    pub predict: PredictConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            threads: 1,
            feature_mode: FeatureMode::Fused,
            missing_sentence_fallback: false,
            paths: Paths::default(),
            mining: MiningConfig::default(),
            pairs: PairsConfig::default(),
            embedding: EmbeddingConfig::default(),
            classifier: ClassifierSpec::Logreg(Default::default()),
            protocol: RunProtocol::default(),
            predict: PredictConfig::default(),
        }
    }
}

/// Parses `key=value`; the value is read as a TOML value, or as a bare
/// string when that fails.
pub fn parse_override(s: &str) -> Result<(String, toml::Value)> {
    let (key, raw) = s
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{s}` is not key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(Error::Config(format!("override `{s}` has an empty key")));
    }
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    Ok((key.to_string(), value))
}

fn set_dotted(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().unwrap_or_default();
    let mut cur = table;
    for p in parts {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("`{p}` in `{key}` is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

fn resolve_paths(table: &mut toml::Table, base: &Path) {
    let Some(paths) = table.get_mut("paths").and_then(|v| v.as_table_mut()) else {
        return;
    };
    for (_, value) in paths.iter_mut() {
        if let toml::Value::String(s) = value {
            if Path::new(s.as_str()).is_relative() {
                let joined = base.join(s.as_str()).to_string_lossy().into_owned();
                *s = joined;
            }
        }
    }
}

impl PipelineConfig {
    /// Loads `config` (if any), then applies environment overrides, then
    /// `overrides` in order. Relative paths in the file resolve against
    /// the file's directory; relative paths in overrides stay as given.
    pub fn load(config: Option<&Path>, overrides: &[(String, toml::Value)]) -> Result<Self> {
        let mut table = match config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                let mut t: toml::Table = toml::from_str(&text)
                    .map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))?;
                resolve_paths(&mut t, path.parent().unwrap_or(Path::new(".")));
                t
            }
            None => toml::Table::new(),
        };
        if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
            set_dotted(&mut table, "paths.output_dir", toml::Value::String(dir))?;
        }
        if let Ok(n) = std::env::var(THREADS_ENV) {
            let n: i64 = n
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{THREADS_ENV}=`{n}` is not an integer")))?;
            set_dotted(&mut table, "threads", toml::Value::Integer(n))?;
        }
        for (k, v) in overrides {
            set_dotted(&mut table, k, v.clone())?;
        }
        let cfg: PipelineConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_str(text: &str, base: &Path) -> Result<Self> {
        let mut t: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        resolve_paths(&mut t, base);
        let cfg: PipelineConfig = t
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.threads == 0 {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        if self.mining.max_depth > 10 {
            return Err(Error::Config("mining.max_depth above 10 is not supported".into()));
        }
        self.seed_tags()?;
        self.embedding().validate().map_err(|e| Error::Config(format!("embedding: {e}")))?;
        SplitSpec::new(self.pairs.train, self.pairs.dev, self.pairs.test, self.seed)
            .map_err(|e| Error::Config(format!("pairs: {e}")))?;
        if !(self.protocol.train_fraction > 0.0 && self.protocol.train_fraction < 1.0) || self.protocol.runs == 0 {
            return Err(Error::Config("protocol needs runs >= 1 and 0 < train_fraction < 1".into()));
        }
        if self.predict.top_k == Some(0) {
            return Err(Error::Config("predict.top_k must be at least 1".into()));
        }
        Ok(())
    }

    pub fn seed_tags(&self) -> Result<Vec<Tag>> {
        if self.mining.seeds.is_empty() {
            return Ok(Tag::all_vec());
        }
        self.mining
            .seeds
            .iter()
            .map(|s| Tag::from_name(s).ok_or_else(|| Error::Config(format!("mining.seeds: unknown tag `{s}`"))))
            .collect()
    }

    /// Embedding settings with the global seed and thread count applied.
    pub fn embedding(&self) -> EmbeddingConfig {
        EmbeddingConfig {
            seed: self.seed,
            threads: self.threads,
            ..self.embedding.clone()
        }
    }

    /// Classifier settings with the global seed and thread count applied.
    pub fn classifier(&self) -> ClassifierSpec {
        match &self.classifier {
            ClassifierSpec::Logreg(p) => ClassifierSpec::Logreg(crate::classifiers::LogRegParams {
                seed: self.seed,
                ..p.clone()
            }),
            ClassifierSpec::Forest(p) => ClassifierSpec::Forest(crate::classifiers::ForestParams {
                seed: self.seed,
                threads: self.threads,
                ..p.clone()
            }),
            ClassifierSpec::Cosine => ClassifierSpec::Cosine,
        }
    }

    pub fn protocol(&self) -> RunProtocol {
        RunProtocol {
            base_seed: self.seed,
            ..self.protocol
        }
    }

    /// First 16 hex digits of the SHA-256 of the settings, output
    /// directory excluded so reruns elsewhere share a digest.
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.paths.output_dir = PathBuf::new();
        let json = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))[..16].to_string()
    }

    pub fn provenance(&self, stage: &str) -> Provenance {
        Provenance {
            tool: "hypernym".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            stage: stage.into(),
            config_digest: self.digest(),
            seed: self.seed,
        }
    }

    fn out(&self, explicit: &Option<PathBuf>, default: &str) -> PathBuf {
        explicit.clone().unwrap_or_else(|| self.paths.output_dir.join(default))
    }

    pub fn definitions_path(&self) -> PathBuf {
        self.out(&self.paths.definitions, "definitions.tsv")
    }

    pub fn pairs_path(&self) -> PathBuf {
        self.paths.output_dir.join("pairs.tsv")
    }

    pub fn word_vectors_path(&self) -> PathBuf {
        self.out(&self.paths.word_vectors, "word_vectors.vec")
    }

    pub fn model_path(&self) -> PathBuf {
        self.out(&self.paths.model, "model.json")
    }

    pub fn predictions_path(&self) -> PathBuf {
        self.out(&self.paths.predictions, "predictions.tsv")
    }
}

fn require<'a>(path: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
    let p = path
        .as_deref()
        .ok_or_else(|| Error::Config(format!("missing input: `{key}` is not set")))?;
    check_exists(p, key)?;
    Ok(p)
}

fn check_exists(p: &Path, key: &str) -> Result<()> {
    if !p.exists() {
        return Err(Error::Config(format!("missing input: `{key}` ({}) does not exist", p.display())));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub stage: String,
    pub config_digest: String,
    pub seed: u64,
}

impl Provenance {
    /// The `#!hypernym …` first line of text artifacts.
    pub fn header(&self) -> String {
        format!(
            "{PROVENANCE_PREFIX} version={} stage={} config={} seed={}",
            self.version, self.stage, self.config_digest, self.seed
        )
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(BufWriter::new(f))
}

fn write_text(path: &Path, prov: &Provenance, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let mut w = create(path)?;
    (|| {
        writeln!(w, "{}", prov.header())?;
        body(&mut w)?;
        w.flush()
    })()
    .map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    (|| {
        writeln!(w)?;
        w.flush()
    })()
    .map_err(|e| Error::io(path, e))
}

/// Downloads seed pages and their descendants into `paths.ontology`.
pub fn fetch(cfg: &PipelineConfig, source: &mut dyn PageSource, seeds: &[SeedPage]) -> Result<PathBuf> {
    let out = cfg
        .paths
        .ontology
        .clone()
        .ok_or_else(|| Error::Config("`paths.ontology` names the fetch output and is not set".into()))?;
    let opts = FetchOptions {
        max_depth: cfg.mining.max_depth,
        expand_instances: cfg.mining.expand_instances,
    };
    ontology::fetch_pages(source, seeds, &out, opts)
}

/// Ontology dump to definition corpus TSV.
pub fn extract(cfg: &PipelineConfig) -> Result<PathBuf> {
    let dump_path = require(&cfg.paths.ontology, "paths.ontology")?;
    let dump = ontology::load_dump(dump_path)?;
    let opts = MineOptions {
        max_depth: cfg.mining.max_depth,
        expand_instances: cfg.mining.expand_instances,
    };
    let mined = ontology::mine(&dump.records, &cfg.seed_tags()?, opts)?;
    for c in &mined.conflicts {
        log::info!("{} reachable from {} seeds; kept {}", c.iri, c.candidates.len(), c.chosen);
    }
    let out = cfg.definitions_path();
    write_text(&out, &cfg.provenance("extract"), |w| mined.corpus.write_tsv(w))?;
    log::info!("{} definitions written to {}", mined.corpus.len(), out.display());
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairOutputs {
    pub all: PathBuf,
    pub train: PathBuf,
    pub dev: PathBuf,
    pub test: PathBuf,
}

fn with_suffix(path: &Path, part: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{part}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{part}"),
    };
    path.with_file_name(name)
}

/// Definition corpus to sentence/tag pairs. Corpus entries are split before
/// pairing so every pair of a sentence lands in the same part.
pub fn pairs(cfg: &PipelineConfig) -> Result<PairOutputs> {
    let defs = cfg.definitions_path();
    check_exists(&defs, "paths.definitions")?;
    let corpus = DefinitionCorpus::read_tsv(&defs)?;
    let tags = Tag::all_vec();
    let (pos, neg) = (cfg.pairs.positive, cfg.pairs.negative);
    let prov = cfg.provenance("pairs");
    let write = |set: PairSet, path: PathBuf| -> Result<PathBuf> {
        let mut set = set;
        set.metadata.insert("seed".into(), cfg.seed.to_string());
        write_text(&path, &prov, |w| set.write_tsv(w))?;
        Ok(path)
    };

    let all_path = cfg.pairs_path();
    let spec = SplitSpec::new(cfg.pairs.train, cfg.pairs.dev, cfg.pairs.test, cfg.seed)?;
    let parts = split(corpus.entries.clone(), &spec)?;
    let as_corpus = |entries| DefinitionCorpus { entries };
    Ok(PairOutputs {
        train: write(build_pairs(&as_corpus(parts.train), &tags, pos, neg)?, with_suffix(&all_path, "train"))?,
        dev: write(build_pairs(&as_corpus(parts.dev), &tags, pos, neg)?, with_suffix(&all_path, "dev"))?,
        test: write(build_pairs(&as_corpus(parts.test), &tags, pos, neg)?, with_suffix(&all_path, "test"))?,
        all: write(build_pairs(&corpus, &tags, pos, neg)?, all_path.clone())?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WordModel {
    Word2Vec,
    FastText,
}

/// Prospectus text to word vectors.
pub fn train_word(cfg: &PipelineConfig, model: Option<WordModel>) -> Result<PathBuf> {
    let corpus_path = require(&cfg.paths.prospectus, "paths.prospectus")?;
    let raw = std::fs::read_to_string(corpus_path).map_err(|e| Error::io(corpus_path, e))?;
    let mut config = cfg.embedding();
    match model {
        Some(WordModel::Word2Vec) => config.subwords_enabled = false,
        Some(WordModel::FastText) => config.subwords_enabled = true,
        None => {}
    }
    let lines: Vec<&str> = raw.lines().filter(|l| !l.starts_with(PROVENANCE_PREFIX)).collect();
    let (table, report) = embeddings::train_with_report(lines, &config)?;
    log::info!(
        "trained {} words ({} subword rows) on {} tokens, final loss {:.4}",
        report.vocab_size,
        report.bucket_rows,
        report.tokens,
        report.final_loss
    );
    let out = cfg.word_vectors_path();
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    embeddings::save_w2v(&table, &out, Some(&cfg.provenance("train-word").header()))?;
    Ok(out)
}

/// Stores a feature mode needs, loaded from the configured paths.
pub struct Features {
    pub sentences: Option<SentenceVectorStore>,
    pub words: Option<VectorTable>,
    pub missing_fallback: bool,
}

impl Features {
    pub fn load(cfg: &PipelineConfig, mode: FeatureMode, cosine: bool) -> Result<Self> {
        let needs_sentences = cosine || mode != FeatureMode::WordOnly;
        let needs_words = mode != FeatureMode::SentenceOnly;
        let sentences = if needs_sentences {
            Some(SentenceVectorStore::load(require(&cfg.paths.sentence_vectors, "paths.sentence_vectors")?)?)
        } else {
            None
        };
        let words = if needs_words {
            let p = cfg.word_vectors_path();
            check_exists(&p, "paths.word_vectors")?;
            Some(embeddings::load_w2v(&p)?)
        } else {
            None
        };
        Ok(Features {
            sentences,
            words,
            missing_fallback: cfg.missing_sentence_fallback,
        })
    }

    pub fn encoder(&self) -> TermEncoder<'_> {
        TermEncoder {
            missing_fallback: self.missing_fallback,
            ..TermEncoder::new(self.sentences.as_ref(), self.words.as_ref())
        }
    }
}

/// Labelled terms to a persisted classifier.
pub fn train_clf(cfg: &PipelineConfig) -> Result<PathBuf> {
    let spec = cfg.classifier();
    if spec == ClassifierSpec::Cosine {
        return Err(Error::Config(
            "classifier.kind = \"cosine\" has no training stage; run predict directly".into(),
        ));
    }
    let terms = LabeledTermSet::read_tsv(require(&cfg.paths.terms, "paths.terms")?)?;
    let features = Features::load(cfg, cfg.feature_mode, false)?;
    let enc = features.encoder();
    let x = terms
        .entries
        .iter()
        .map(|e| enc.encode(&e.term, cfg.feature_mode))
        .collect::<Result<Vec<_>>>()?;
    let y = terms.golds();
    let model = match spec {
        ClassifierSpec::Logreg(p) => {
            let (m, r) = train_logreg(&x, &y, &p)?;
            log::info!("logreg: loss {:.4}, train accuracy {:.4}", r.final_loss, r.train_accuracy);
            Classifier::Logreg(m)
        }
        ClassifierSpec::Forest(p) => {
            let (m, r) = train_forest(&x, &y, &p)?;
            log::info!("forest: train accuracy {:.4}, oob {:?}", r.train_accuracy, r.oob_accuracy);
            Classifier::Forest(m)
        }
        ClassifierSpec::Cosine => unreachable!(),
    };
    let mut container = ModelContainer::new(model, cfg.feature_mode);
    container.provenance = Some(cfg.provenance("train-clf").header());
    let out = cfg.model_path();
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    container.save(&out)?;
    Ok(out)
}

/// Reads the first column of a term file; a `term` header is skipped.
pub fn read_terms(path: &Path) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for (_, line) in tsv::read_lines(path)? {
        let term = line.split('\t').next().unwrap_or_default().trim();
        if term.is_empty() || (out.is_empty() && line.eq_ignore_ascii_case("term\tlabel")) || (out.is_empty() && term == "term") {
            continue;
        }
        out.push(tsv::unescape(term));
    }
    Ok(out)
}

/// Ranks `paths.test_terms` with the trained model (or cosine similarity)
/// and writes the top-K tags per term.
pub fn predict(cfg: &PipelineConfig) -> Result<PathBuf> {
    let input = require(&cfg.paths.test_terms, "paths.test_terms")?;
    let terms = read_terms(input)?;
    let (ranker, mode, features): (Box<dyn Ranker>, FeatureMode, Features) = match cfg.classifier() {
        ClassifierSpec::Cosine => {
            let f = Features::load(cfg, cfg.feature_mode, true)?;
            let labels = f.encoder().label_vectors(&Tag::all_vec())?;
            (Box::new(CosineRanker { labels }), cfg.feature_mode, f)
        }
        _ => {
            let model_path = cfg.model_path();
            check_exists(&model_path, "paths.model")?;
            let c = ModelContainer::load(&model_path)?;
            if c.feature_mode != cfg.feature_mode {
                log::warn!("model was trained on {:?} features; using them instead of {:?}", c.feature_mode, cfg.feature_mode);
            }
            let f = Features::load(cfg, c.feature_mode, false)?;
            (Box::new(c.model), c.feature_mode, f)
        }
    };
    let enc = features.encoder();
    let preds = terms
        .iter()
        .map(|t| Ok(ranker.rank(&enc.encode(t, mode)?)?.with_term(t)))
        .collect::<Result<Vec<RankedPrediction>>>()?;
    let out = cfg.predictions_path();
    write_text(&out, &cfg.provenance("predict"), |w| {
        evaluation::write_predictions(&preds, cfg.predict.top_k, w)
    })?;
    Ok(out)
}

/// The `evaluate` artifact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub provenance: Provenance,
    pub model: String,
    pub accuracy: f64,
    pub accuracy_stddev: f64,
    pub mean_rank: f64,
    pub mean_rank_stddev: f64,
    pub per_run: Vec<EvalResult>,
    pub per_label: BTreeMap<Tag, LabelSummary>,
    #[serde(default)]
    pub excluded_labels: BTreeMap<Tag, String>,
    pub distributions: Option<DistributionReport>,
}

impl Report {
    pub fn to_text(&self) -> String {
        let mut s = evaluation::summary_table(&[(self.model.clone(), self.accuracy, self.mean_rank)]);
        if self.per_run.len() > 1 {
            s.push_str(&format!(
                "{} runs: accuracy stddev {:.4}, mean rank stddev {:.4}\n",
                self.per_run.len(),
                self.accuracy_stddev,
                self.mean_rank_stddev
            ));
        }
        s.push_str("\nMatched accuracy per label\n");
        for (tag, l) in &self.per_label {
            s.push_str(&format!("  {:<32} {:>7.2}%  (n={})\n", tag.name(), 100.0 * l.matched_accuracy, l.total_support));
        }
        for (tag, note) in &self.excluded_labels {
            s.push_str(&format!("  {:<32} excluded: {note}\n", tag.name()));
        }
        s
    }

    pub fn load(path: &Path) -> Result<Report> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportOutputs {
    pub json: PathBuf,
    pub text: PathBuf,
    pub report: Report,
}

fn model_name(cfg: &PipelineConfig) -> String {
    let kind = match cfg.classifier {
        ClassifierSpec::Logreg(_) => "logreg",
        ClassifierSpec::Forest(_) => "forest",
        ClassifierSpec::Cosine => "cosine",
    };
    let mode = serde_json::to_value(cfg.feature_mode)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    format!("{kind}/{mode}")
}

fn train_distribution(cfg: &PipelineConfig, train: &LabeledTermSet) -> Result<Option<DistributionReport>> {
    let defs = cfg.definitions_path();
    if !defs.exists() {
        return Ok(None);
    }
    Ok(Some(distribution_report(train, &DefinitionCorpus::read_tsv(&defs)?)))
}

/// Scores `predictions` against the labels of `paths.test_terms`, or, with
/// no predictions file, runs the repeated-split protocol on `paths.terms`.
pub fn evaluate(cfg: &PipelineConfig, predictions: Option<&Path>) -> Result<ReportOutputs> {
    let prov = cfg.provenance("evaluate");
    let report = match predictions {
        Some(pred_path) => {
            check_exists(pred_path, "--predictions")?;
            let preds = evaluation::read_predictions(pred_path)?;
            let gold_set = LabeledTermSet::read_tsv(require(&cfg.paths.test_terms, "paths.test_terms")?)?;
            for (i, (p, g)) in preds.iter().zip(&gold_set.entries).enumerate() {
                if p.term != g.term {
                    return Err(Error::InvalidArgument(format!(
                        "prediction {} is for `{}` but gold row {} is `{}`",
                        i + 1,
                        p.term,
                        i + 1,
                        g.term
                    )));
                }
            }
            let r = evaluation::evaluate(&preds, &gold_set.golds(), cfg.protocol.mean_rank_cap)?;
            let per_label = r
                .per_label
                .iter()
                .map(|(&t, s)| {
                    (
                        t,
                        LabelSummary {
                            matched_accuracy: s.matched_accuracy,
                            runs_tested: 1,
                            total_support: s.support,
                        },
                    )
                })
                .collect();
            let distributions = match &cfg.paths.terms {
                Some(p) if p.exists() => train_distribution(cfg, &LabeledTermSet::read_tsv(p)?)?,
                _ => None,
            };
            Report {
                provenance: prov,
                model: "predictions".into(),
                accuracy: r.accuracy,
                accuracy_stddev: 0.0,
                mean_rank: r.mean_rank,
                mean_rank_stddev: 0.0,
                per_run: vec![r],
                per_label,
                excluded_labels: BTreeMap::new(),
                distributions,
            }
        }
        None => {
            let data = LabeledTermSet::read_tsv(require(&cfg.paths.terms, "paths.terms")?)?;
            let spec = cfg.classifier();
            let features = Features::load(cfg, cfg.feature_mode, spec == ClassifierSpec::Cosine)?;
            let experiment = FeatureExperiment {
                encoder: features.encoder(),
                mode: cfg.feature_mode,
                classifier: spec,
            };
            let r = run_protocol(&data, &experiment, &cfg.protocol())?;
            Report {
                provenance: prov,
                model: model_name(cfg),
                accuracy: r.accuracy.mean,
                accuracy_stddev: r.accuracy.stddev,
                mean_rank: r.mean_rank.mean,
                mean_rank_stddev: r.mean_rank.stddev,
                per_run: r.per_run,
                per_label: r.per_label,
                excluded_labels: r.excluded_labels,
                distributions: train_distribution(cfg, &data)?,
            }
        }
    };
    let json = cfg.paths.output_dir.join("report.json");
    let text = cfg.paths.output_dir.join("report.txt");
    write_json(&json, &report)?;
    let body = report.to_text();
    write_text(&text, &report.provenance, |w| w.write_all(body.as_bytes()))?;
    Ok(ReportOutputs { json, text, report })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionArtifact {
    pub provenance: Provenance,
    #[serde(flatten)]
    pub report: DistributionReport,
}

/// Training-label and corpus-tag distributions side by side.
pub fn report(cfg: &PipelineConfig) -> Result<(PathBuf, DistributionReport)> {
    let train = LabeledTermSet::read_tsv(require(&cfg.paths.terms, "paths.terms")?)?;
    let defs = cfg.definitions_path();
    check_exists(&defs, "paths.definitions")?;
    let corpus = DefinitionCorpus::read_tsv(&defs)?;
    let r = distribution_report(&train, &corpus);
    let prov = cfg.provenance("report");
    let json = cfg.paths.output_dir.join("distributions.json");
    write_json(
        &json,
        &DistributionArtifact {
            provenance: prov.clone(),
            report: r.clone(),
        },
    )?;
    let body = r.to_text();
    write_text(&cfg.paths.output_dir.join("distributions.txt"), &prov, |w| w.write_all(body.as_bytes()))?;
    Ok((json, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_parse_typed_values() {
        assert_eq!(parse_override("seed=7").unwrap().1, toml::Value::Integer(7));
        assert_eq!(parse_override("feature_mode=fused").unwrap().1, toml::Value::String("fused".into()));
        assert_eq!(parse_override("a.b = true").unwrap(), ("a.b".into(), toml::Value::Boolean(true)));
        assert!(parse_override("novalue").is_err());
    }

    #[test]
    fn file_then_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "seed = 3\n[paths]\nterms = \"terms.tsv\"\n[classifier]\nkind = \"forest\"\nnum_trees = 5\n").unwrap();
        let cfg = PipelineConfig::load(Some(&p), &[parse_override("classifier.num_trees=9").unwrap()]).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.paths.terms.as_deref(), Some(dir.path().join("terms.tsv").as_path()));
        match cfg.classifier() {
            ClassifierSpec::Forest(f) => {
                assert_eq!(f.num_trees, 9);
                assert_eq!(f.seed, 3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = PipelineConfig::load(None, &[parse_override("bogus=1").unwrap()]).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(PipelineConfig::load(None, &[parse_override("threads=0").unwrap()]).is_err());
    }

    #[test]
    fn digest_ignores_output_dir() {
        let a = PipelineConfig::default();
        let mut b = a.clone();
        b.paths.output_dir = "elsewhere".into();
        assert_eq!(a.digest(), b.digest());
        b.seed = 1;
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 16);
    }

    #[test]
    fn missing_input_is_named() {
        let err = extract(&PipelineConfig::default()).unwrap_err();
        assert!(err.to_string().contains("paths.ontology"), "{err}");
    }

    #[test]
    fn split_suffix() {
        assert_eq!(with_suffix(Path::new("o/pairs.tsv"), "dev"), PathBuf::from("o/pairs.dev.tsv"));
    }
}
