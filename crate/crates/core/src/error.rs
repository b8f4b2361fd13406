use thiserror::Error;

/// Errors raised by the numerical kernels and experiment drivers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degree {degree} is outside the band limit {band_limit}")]
    Index { degree: i64, band_limit: i64 },

    #[error("multiplier `{label}` has no symbol at degree {degree}")]
    MissingSymbol { label: String, degree: i64 },

    #[error("no degree survives the semiclassical cutoff at h = {h}")]
    EmptySupport { h: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("oversampling factor {0} must exceed pi")]
    Oversample(f64),

    #[error("quadrature self-test failed: {0}")]
    Quadrature(String),

    #[error("invalid experiment configuration: {0}")]
    Config(String),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
