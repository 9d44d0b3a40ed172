use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hypernym::pipeline::{self, parse_override, PipelineConfig, WordModel};
use hypernym::Result;

/// Financial hypernym classification pipeline.
///
/// Each subcommand is one stage. Stages exchange files only; settings come
/// from `--config`, then HYPERNYM_OUTPUT_DIR / HYPERNYM_THREADS, then flags.
#[derive(Parser, Debug)]
#[command(name = "hypernym", version)]
struct Cli {
    /// TOML pipeline configuration; relative paths in it resolve against its directory.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,

    /// Override any configuration key, e.g. `--set classifier.epochs=50`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,

    /// Worker threads (default 1, which keeps every stage bit-reproducible).
    #[arg(long, global = true, env = "HYPERNYM_THREADS")]
    threads: Option<usize>,

    /// Directory for stage outputs.
    #[arg(long, global = true, env = "HYPERNYM_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,

    /// Global seed, propagated to every stage.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mine seed-concept definitions from an ontology dump into a TSV corpus.
    Extract {
        /// JSONL ontology dump.
        #[arg(long)]
        ontology: Option<PathBuf>,
        /// Deepest subclass level collected below each seed.
        #[arg(long)]
        max_depth: Option<usize>,
        /// Also follow instance links.
        #[arg(long)]
        expand_instances: bool,
        /// Output TSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build scored sentence/tag pairs plus train/dev/test parts.
    Pairs {
        /// Definition corpus TSV.
        #[arg(long)]
        definitions: Option<PathBuf>,
    },
    /// Train word vectors on the prospectus corpus.
    TrainWord {
        /// Plain-text corpus.
        #[arg(long)]
        prospectus: Option<PathBuf>,
        /// word2vec (no subwords) or fasttext (character n-grams).
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
        /// Output vectors in word2vec text format.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a classifier on labelled terms.
    TrainClf {
        /// `term<TAB>label` training file.
        #[arg(long)]
        terms: Option<PathBuf>,
        /// Classifier kind.
        #[arg(long, value_enum)]
        classifier: Option<ClassifierArg>,
        /// Feature mode.
        #[arg(long, value_enum)]
        feature_mode: Option<ModeArg>,
        /// Output model file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank the 17 tags for each term.
    Predict {
        /// Terms to rank, one per line (a label column is ignored).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Tags written per term.
        #[arg(long)]
        top_k: Option<usize>,
        /// Classifier kind; `cosine` needs no trained model.
        #[arg(long, value_enum)]
        classifier: Option<ClassifierArg>,
        /// Feature mode (cosine only; trained models keep their own).
        #[arg(long, value_enum)]
        feature_mode: Option<ModeArg>,
        /// Output TSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute accuracy and mean rank, from a predictions file or by the repeated-split protocol.
    Evaluate {
        /// Ranked predictions to score against `--gold`.
        #[arg(long)]
        predictions: Option<PathBuf>,
        /// Gold `term<TAB>label` file for `--predictions`.
        #[arg(long)]
        gold: Option<PathBuf>,
        /// Labelled terms for the protocol.
        #[arg(long)]
        terms: Option<PathBuf>,
        /// Classifier kind for the protocol.
        #[arg(long, value_enum)]
        classifier: Option<ClassifierArg>,
        /// Feature mode for the protocol.
        #[arg(long, value_enum)]
        feature_mode: Option<ModeArg>,
        /// Number of runs.
        #[arg(long)]
        runs: Option<usize>,
        /// Cap ranks at K+1 (top-K scoring).
        #[arg(long)]
        mean_rank_cap: Option<usize>,
    },
    /// Label distributions of the training terms and the definition corpus.
    Report {
        /// `term<TAB>label` training file.
        #[arg(long)]
        terms: Option<PathBuf>,
        /// Definition corpus TSV.
        #[arg(long)]
        definitions: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModelArg {
    Word2vec,
    Fasttext,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ClassifierArg {
    Logreg,
    Forest,
    Cosine,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    SentenceOnly,
    WordOnly,
    Fused,
}

impl Command {
    fn stage(&self) -> &'static str {
        match self {
            Command::Extract { .. } => "extract",
            Command::Pairs { .. } => "pairs",
            Command::TrainWord { .. } => "train-word",
            Command::TrainClf { .. } => "train-clf",
            Command::Predict { .. } => "predict",
            Command::Evaluate { .. } => "evaluate",
            Command::Report { .. } => "report",
        }
    }
}

#[derive(Default)]
struct Overrides(Vec<(String, toml::Value)>);

impl Overrides {
    fn path(&mut self, key: &str, p: &Option<PathBuf>) {
        if let Some(p) = p {
            self.0.push((key.into(), toml::Value::String(p.to_string_lossy().into_owned())));
        }
    }

    fn int(&mut self, key: &str, v: Option<u64>) {
        if let Some(v) = v {
            self.0.push((key.into(), toml::Value::Integer(v as i64)));
        }
    }

    fn string(&mut self, key: &str, v: Option<&str>) {
        if let Some(v) = v {
            self.0.push((key.into(), toml::Value::String(v.into())));
        }
    }

    fn classifier(&mut self, c: Option<ClassifierArg>) {
        self.string(
            "classifier.kind",
            c.map(|c| match c {
                ClassifierArg::Logreg => "logreg",
                ClassifierArg::Forest => "forest",
                ClassifierArg::Cosine => "cosine",
            }),
        );
    }

    fn mode(&mut self, m: Option<ModeArg>) {
        self.string(
            "feature_mode",
            m.map(|m| match m {
                ModeArg::SentenceOnly => "sentence_only",
                ModeArg::WordOnly => "word_only",
                ModeArg::Fused => "fused",
            }),
        );
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut o = Overrides::default();
    for s in &cli.set {
        o.0.push(parse_override(s)?);
    }
    o.int("threads", cli.threads.map(|t| t as u64));
    o.path("paths.output_dir", &cli.output_dir);
    o.int("seed", cli.seed);
    match &cli.command {
        Command::Extract { ontology, max_depth, expand_instances, out } => {
            o.path("paths.ontology", ontology);
            o.int("mining.max_depth", max_depth.map(|d| d as u64));
            if *expand_instances {
                o.0.push(("mining.expand_instances".into(), toml::Value::Boolean(true)));
            }
            o.path("paths.definitions", out);
        }
        Command::Pairs { definitions } => o.path("paths.definitions", definitions),
        Command::TrainWord { prospectus, out, .. } => {
            o.path("paths.prospectus", prospectus);
            o.path("paths.word_vectors", out);
        }
        Command::TrainClf { terms, classifier, feature_mode, out } => {
            o.path("paths.terms", terms);
            o.classifier(*classifier);
            o.mode(*feature_mode);
            o.path("paths.model", out);
        }
        Command::Predict { input, top_k, classifier, feature_mode, out } => {
            o.path("paths.test_terms", input);
            o.int("predict.top_k", top_k.map(|k| k as u64));
            o.classifier(*classifier);
            o.mode(*feature_mode);
            o.path("paths.predictions", out);
        }
        Command::Evaluate { gold, terms, classifier, feature_mode, runs, mean_rank_cap, .. } => {
            o.path("paths.test_terms", gold);
            o.path("paths.terms", terms);
            o.classifier(*classifier);
            o.mode(*feature_mode);
            o.int("protocol.runs", runs.map(|r| r as u64));
            o.int("protocol.mean_rank_cap", mean_rank_cap.map(|k| k as u64));
        }
        Command::Report { terms, definitions } => {
            o.path("paths.terms", terms);
            o.path("paths.definitions", definitions);
        }
    }
    let cfg = PipelineConfig::load(cli.config.as_deref(), &o.0)?;
    log::debug!("config digest {}", cfg.digest());

    match &cli.command {
        Command::Extract { .. } => println!("{}", pipeline::extract(&cfg)?.display()),
        Command::Pairs { .. } => {
            let out = pipeline::pairs(&cfg)?;
            for p in [out.all, out.train, out.dev, out.test] {
                println!("{}", p.display());
            }
        }
        Command::TrainWord { model, .. } => {
            let model = model.map(|m| match m {
                ModelArg::Word2vec => WordModel::Word2Vec,
                ModelArg::Fasttext => WordModel::FastText,
            });
            println!("{}", pipeline::train_word(&cfg, model)?.display());
        }
        Command::TrainClf { .. } => println!("{}", pipeline::train_clf(&cfg)?.display()),
        Command::Predict { .. } => println!("{}", pipeline::predict(&cfg)?.display()),
        Command::Evaluate { predictions, .. } => {
            let out = pipeline::evaluate(&cfg, predictions.as_deref())?;
            print!("{}", out.report.to_text());
            println!("{}", out.json.display());
        }
        Command::Report { .. } => {
            let (path, r) = pipeline::report(&cfg)?;
            print!("{}", r.to_text());
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let stage = cli.command.stage();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = serde_json::json!({
                "error": { "stage": stage, "kind": e.kind(), "message": e.to_string() }
            });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}

