use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("frame too short: {len} samples, need at least {needed}")]
    FrameTooShort { len: usize, needed: usize },

    #[error("spatial correlation matrix is not Hermitian positive semidefinite with unit diagonal")]
    NotPsd,

    #[error("insufficient CSI history: have {have} frames, need {need}")]
    InsufficientHistory { have: usize, need: usize },

    #[error("undefined estimate: {0}")]
    UndefinedEstimate(&'static str),

    #[error("pilot sequence has zero energy")]
    ZeroPilotEnergy,

    #[error("no acquisition: metric {metric:.4} below threshold {threshold:.4}")]
    NoAcquisition { metric: f64, threshold: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite loss {loss} at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { loss: f64, epoch: usize, batch: usize },

    #[error("dataset: {0}")]
    Dataset(String),

    #[error("model: {0}")]
    Model(String),

    #[error("nothing to report")]
    NothingToReport,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
