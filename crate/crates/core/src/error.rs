use thiserror::Error;

pub type Result<T, E = NgcaError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum NgcaError {
    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("singular covariance: eigenvalue {eigenvalue:e} is below 1e-12 x largest eigenvalue {largest:e}")]
    SingularCovariance { eigenvalue: f64, largest: f64 },

    #[error("parse error at row {row}{}: {message}", col.map(|c| format!(", column {c}")).unwrap_or_default())]
    Parse {
        row: usize,
        col: Option<usize>,
        message: String,
    },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("frame mismatch: cannot compare a {0} subspace with a {1} subspace")]
    FrameMismatch(String, String),

    #[error("rank deficiency: {0}")]
    RankDeficient(String),

    #[error("insufficient functions: {survivors} usable beta vectors, need at least {needed}")]
    InsufficientFunctions { survivors: usize, needed: usize },

    #[error("metric error: {0}")]
    Metric(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl NgcaError {
    pub(crate) fn shape(expected: impl Into<String>, actual: impl Into<String>) -> Self {
        NgcaError::ShapeMismatch {
            expected: expected.into(),
            actual: actual.into(),
        }
    }
}
