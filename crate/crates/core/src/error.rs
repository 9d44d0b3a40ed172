use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate iri `{0}` in ontology dump")]
    DuplicateIri(String),

    #[error("seed tag `{0}` does not resolve to exactly one ontology record")]
    UnresolvedSeed(String),

    #[error("unknown tag `{0}`")]
    UnknownTag(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty vocabulary after applying min_count = {min_count}")]
    EmptyVocabulary { min_count: usize },

    #[error("non-finite loss at {0}")]
    NonFiniteLoss(String),

    #[error("training data contains a single class")]
    SingleClass,

    #[error("no sentence vector for term `{0}`")]
    MissingSentenceVector(String),

    #[error("gold tag {gold} absent from ranking of sample {index}")]
    GoldNotRanked { index: usize, gold: String },

    #[error("fetch failed for {url}: {message}")]
    Fetch { url: String, message: String },

    #[error("model container: {0}")]
    Model(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Short stable identifier used in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::DuplicateIri(_) => "duplicate_iri",
            Error::UnresolvedSeed(_) => "unresolved_seed",
            Error::UnknownTag(_) => "unknown_tag",
            Error::Dimension { .. } => "dimension",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::EmptyVocabulary { .. } => "empty_vocabulary",
            Error::NonFiniteLoss(_) => "non_finite_loss",
            Error::SingleClass => "single_class",
            Error::MissingSentenceVector(_) => "missing_sentence_vector",
            Error::GoldNotRanked { .. } => "gold_not_ranked",
            Error::Fetch { .. } => "fetch",
            Error::Model(_) => "model",
            Error::Config(_) => "config",
            Error::Json(_) => "json",
        }
    }
}
