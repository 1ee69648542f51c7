use thiserror::Error;

/// Errors produced while configuring, fitting or applying a binning.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("column has a single distinct value")]
    DegenerateColumn,

    #[error("zero count in weight-of-evidence or divergence input")]
    ZeroCount,

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("malformed encoding: {0}")]
    MalformedEncoding(String),

    #[error("unknown category {0:?} and no others bin")]
    UnknownCategory(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("input error: {0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
