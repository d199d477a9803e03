use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("not a density matrix: {0}")]
    InvalidState(String),

    #[error("ket is not normalized (norm {0})")]
    Unnormalized(f64),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("negative outcome probability {value:.3e} at outcome {index}")]
    NegativeProbability { index: usize, value: f64 },

    #[error("invalid click record: {0}")]
    InvalidRecord(String),

    #[error("power-law fit: {0}")]
    Fit(String),

    #[error("campaign: {0}")]
    Campaign(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
