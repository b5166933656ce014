use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {x} lies outside the domain [0, {length})")]
    OutsideDomain { x: f64, length: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("spectral parameter must be non-real, got {0}")]
    RealSpectralParameter(num_complex::Complex64),
    #[error(
        "m-function did not converge: radius {radius:e} after truncation at x = {truncation:e}"
    )]
    NonConvergence { radius: f64, truncation: f64 },
    #[error("series for 0F1 did not converge within {terms} terms (|w| = {modulus:e})")]
    SeriesCap { terms: usize, modulus: f64 },
    #[error("inversion failed: {0}")]
    Inversion(String),
    #[error("mesh produced no cells")]
    EmptyMesh,
    #[error("matrix is not positive semidefinite beyond tolerance: {0}")]
    NotPsd(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
