use std::path::PathBuf;

use thiserror::Error;

/// A configuration bound that does not hold.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{field} must be positive (got {value})")]
    NotPositive { field: &'static str, value: f64 },
    #[error("{field} must lie in [{min}, {max}] (got {value})")]
    OutOfRange {
        field: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("ordering violated: {lower} ({lower_value}) must not exceed {upper} ({upper_value})")]
    Ordering {
        lower: &'static str,
        lower_value: f64,
        upper: &'static str,
        upper_value: f64,
    },
    #[error("invalid config file: {0}")]
    Parse(String),
}

/// Errors raised while reading and validating the engine's input files.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed record: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: field `{field}`: {message}")]
    Schema {
        line: usize,
        field: &'static str,
        message: String,
    },
    #[error("line {line}: expected {expected} values, found {found}")]
    Dimension {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("rp_text {rp_text:?} has conflicting heads {first:?} and {second:?}")]
    Conflict {
        rp_text: String,
        first: String,
        second: String,
    },
}

/// Numeric failures in vector and similarity computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimilarityError {
    #[error("cosine of a zero vector is undefined")]
    ZeroVector,
    #[error("vector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("representative phrase {0:?} has no token in the embedding store")]
    Unembeddable(String),
    #[error("cluster {0} has no lemma in the embedding store")]
    UnembeddableCluster(usize),
}

/// Failures of the hierarchical baseline and of partition comparison.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BaselineError {
    #[error("no input vectors")]
    Empty,
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error("partitions cover different RP sets ({left} vs {right} ids)")]
    UniverseMismatch { left: usize, right: usize },
}

/// Top-level error for the orchestrated pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error("no mentions")]
    NoMentions,
    #[error("no embeddable representative phrase")]
    NothingEmbeddable,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
