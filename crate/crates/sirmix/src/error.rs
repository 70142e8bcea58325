use thiserror::Error;

/// All failure modes of the library.
///
/// Variants mirror the stages of the pipeline: parameter validation,
/// numerical integration, data ingestion, configuration, the dictionary
/// cache, and the statistics that can be undefined on degenerate input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("bad input data: {0}")]
    Data(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("dictionary cache error: {0}")]
    Cache(String),
    #[error("statistic undefined: {0}")]
    UndefinedStatistic(String),
    #[error("matching error: {0}")]
    Matching(String),
    #[error("regression error: {0}")]
    Regression(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Data(format!("csv: {other:?}")),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
