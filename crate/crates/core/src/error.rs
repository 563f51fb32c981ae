use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid code distance {0}: must be at least 2")]
    InvalidDistance(usize),

    #[error("dimension mismatch: expected length {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty batch")]
    EmptyBatch,

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("no samples left after discarding at stage `{stage}`")]
    EmptyAfterDiscard { stage: &'static str },

    #[error("decoder failure on record {index}: {source}")]
    Decoder {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("fit failed to converge (residual {residual})")]
    FitFailure { residual: f64 },

    #[error("curves do not cross in the sampled range")]
    NoCrossing,

    #[error("curves cross more than once: at {0:?}")]
    AmbiguousCrossing(Vec<f64>),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("stage `{stage}` failed for {params}: {source}")]
    Stage {
        stage: String,
        params: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
