use std::path::PathBuf;

/// Errors raised anywhere in the clustering pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("data set is empty")]
    EmptyDataSet,
    #[error("non-finite entry at row {0}, column {1}")]
    NonFiniteEntry(usize, usize),
    #[error("label count {labels} does not match point count {points}")]
    LabelLengthMismatch { points: usize, labels: usize },
    #[error("labels must be contiguous ids starting at 0")]
    NonContiguousLabels,
    #[error("shape mismatch: data length {len} is not {rows}x{cols}")]
    ShapeMismatch { rows: usize, cols: usize, len: usize },
    #[error("parse error on line {0}")]
    ParseError(usize),
    #[error("ragged rows: line {0} has a different column count")]
    RaggedRows(usize),
    #[error("i/o error on {path}: {message}")]
    Io { path: PathBuf, message: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero vector at row {0} (cosine similarity undefined)")]
    ZeroVector(usize),
    #[error("row {0} has zero degree")]
    ZeroDegree(usize),
    #[error("invalid similarity parameter: sigma must be positive")]
    InvalidSigma,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid initial vector: {0}")]
    InvalidInitialVector(String),

    #[error("cannot reduce an empty vector")]
    EmptyVector,
    #[error("normalizer must be positive, got {0}")]
    NonPositiveTau(f64),
    #[error("invalid kernel configuration: {0}")]
    InvalidKernelConfig(String),

    #[error("k = {k} exceeds the number of points {n}")]
    KTooLarge { k: usize, n: usize },

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("data set has no labels")]
    MissingLabels,
    #[error("fraction {0} is out of range or yields an empty class")]
    FractionTooSmall(f64),

    #[error("label vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least two points, got {0}")]
    TooFewPoints(usize),
}

impl Error {
    /// Numeric failures (degenerate similarity structure, bad normalizers)
    /// as opposed to malformed input data.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::ZeroVector(_)
                | Error::ZeroDegree(_)
                | Error::NonPositiveTau(_)
                | Error::EmptyVector
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
