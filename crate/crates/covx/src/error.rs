//! Library-wide error type.

/// Errors produced by model construction, fitting and I/O.
///
/// The three data-free variants map onto the CLI exit codes:
/// `Config` → 2, `Data` → 3, `Numerical` → 4.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid configuration or arguments (bad intervals, bad edges, ...).
    #[error("config error: {0}")]
    Config(String),
    /// The data cannot support the requested operation (no exceedances,
    /// covariate outside bin coverage, ...).
    #[error("data error: {0}")]
    Data(String),
    /// A numerical routine failed to produce a usable result.
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
