use thiserror::Error;

use crate::dist::MixtureModel;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("empty sample")]
    EmptySample,

    #[error("fit failed after {restarts} restart(s); best log-likelihood {best_log_likelihood}")]
    FitFailure {
        restarts: usize,
        best: Box<MixtureModel>,
        best_log_likelihood: f64,
    },

    #[error("no tipping point: alpha - beta keeps its sign on [{lo}, {hi}]")]
    NoTippingPoint { lo: f64, hi: f64 },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn model(msg: impl Into<String>) -> Self {
        Error::InvalidModel(msg.into())
    }

    /// Stable machine-readable tag, used in the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::InvalidModel(_) => "invalid_model",
            Error::EmptySample => "empty_sample",
            Error::FitFailure { .. } => "fit_failure",
            Error::NoTippingPoint { .. } => "no_tipping_point",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
