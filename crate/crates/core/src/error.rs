use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure category, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// The input data or configuration is unusable.
    Data,
    /// A numerical routine could not produce a valid result.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range for {len} samples")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("pair ({0}, {0}) does not name two distinct samples")]
    SelfPair(usize),

    #[error("need at least {required} samples, got {actual}")]
    TooFewSamples { required: usize, actual: usize },

    #[error("duplicate feature rows: {}", format_pairs(.0))]
    DuplicateRows(Vec<(usize, usize)>),

    #[error("non-finite feature value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("class {0} has no samples")]
    EmptyClass(usize),

    #[error("label {label} is outside 0..{class_count}")]
    InvalidLabel { label: usize, class_count: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("graph was built without witness counts")]
    MissingWitnessCounts,

    #[error("graph covers {graph} samples but dataset has {dataset}")]
    GraphDatasetMismatch { graph: usize, dataset: usize },

    #[error("no support edges: every graph edge joins samples of the same class")]
    EmptySupport,

    #[error("sample {0} has no graph neighbours")]
    IsolatedVertex(usize),

    #[error("kernel bandwidth must be positive and finite, got {0}")]
    InvalidSigma(f64),

    #[error("cannot remove {count} samples from class {class} of size {size}")]
    FilterCountTooLarge {
        class: usize,
        count: usize,
        size: usize,
    },

    #[error("class {class} has {size} samples, fewer than the {folds} folds requested")]
    ClassTooSmall {
        class: usize,
        size: usize,
        folds: usize,
    },

    #[error("every feature has zero variance on the training data")]
    NoFeatureVariance,

    #[error("{path}: line {line}, column '{column}': {message}")]
    Csv {
        path: PathBuf,
        line: usize,
        column: String,
        message: String,
    },

    #[error("{path}: duplicate feature rows at lines {}", format_pairs(.lines))]
    DuplicateCsvRows {
        path: PathBuf,
        lines: Vec<(usize, usize)>,
    },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("architecture {architecture} does not support {what}")]
    Unsupported { architecture: String, what: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("incremental and fresh graphs differ ({0})")]
    BenchmarkMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    CsvParse(#[from] csv::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::EmptySupport
            | Error::IsolatedVertex(_)
            | Error::Numerical(_)
            | Error::UndefinedMetric(_)
            | Error::BenchmarkMismatch(_) => ErrorKind::Numerical,
            _ => ErrorKind::Data,
        }
    }
}

fn format_pairs(pairs: &[(usize, usize)]) -> String {
    const SHOWN: usize = 10;
    let mut out = pairs
        .iter()
        .take(SHOWN)
        .map(|(a, b)| format!("{a}={b}"))
        .collect::<Vec<_>>()
        .join(", ");
    if pairs.len() > SHOWN {
        out.push_str(&format!(" (+{} more)", pairs.len() - SHOWN));
    }
    out
}
