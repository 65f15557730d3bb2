//! Crate-wide error type.

use thiserror::Error;

use crate::corpus::RecordIssue;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("corpus ingestion failed with {} issue(s):\n{}", .0.len(), format_issues(.0))]
    Ingest(Vec<RecordIssue>),

    #[error("no eligible categories in jurisdiction {jurisdiction}: all {total} categories have fewer than 50 samples")]
    NoEligibleCategories { jurisdiction: String, total: usize },

    #[error(
        "test2 needs {needed} samples but only {available} judgments remain outside the train set"
    )]
    Test2Insufficient { needed: usize, available: usize },

    #[error("cannot fit a feature space on zero documents")]
    EmptyCorpus,

    #[error("document frequency bounds inverted: min {min} > max {max}")]
    InvertedDfBounds { min: f64, max: f64 },

    #[error("chi-squared undefined: need at least 2 distinct categories, got {0}")]
    SingleCategory(usize),

    #[error("vectors and labels differ in length: {vectors} vs {labels}")]
    LengthMismatch { vectors: usize, labels: usize },

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("impurity is undefined for all-zero category counts")]
    EmptyCounts,

    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparam(String),

    #[error("feature index {index} out of range for feature space of size {size}")]
    FeatureIndexOutOfRange { index: u32, size: usize },

    #[error("stratified {folds}-fold split impossible: category {category:?} has only {support} samples")]
    FoldTooLarge {
        folds: usize,
        category: String,
        support: usize,
    },

    #[error("grid contains no combinations")]
    EmptyGrid,

    #[error("no category bag for jurisdiction {jurisdiction:?}, category {category:?}")]
    MissingBag {
        jurisdiction: String,
        category: String,
    },

    #[error("no expert dictionary for jurisdiction {jurisdiction:?}, category {category:?}")]
    MissingDictionary {
        jurisdiction: String,
        category: String,
    },

    #[error("questionnaire row for term {term:?} is unanswered")]
    UnansweredRow { term: String },

    #[error("answered sheet contains unknown term {term:?}")]
    UnknownTerm { term: String },

    #[error("presented term {term:?} is missing from the answered sheet")]
    SheetTermMissing { term: String },

    #[error("malformed sheet at line {line}: {problem}")]
    MalformedSheet { line: usize, problem: String },

    #[error("empty prediction set")]
    EmptyPredictions,

    #[error("model was trained on a different feature space: fingerprint {model} vs {space}")]
    FingerprintMismatch { model: String, space: String },

    #[error("unsupported file format version {found} (expected {expected})")]
    UnsupportedVersion { found: u32, expected: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_issues(issues: &[RecordIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}
