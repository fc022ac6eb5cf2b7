use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("stress {value} outside admissible domain [{lo}, {hi}] of the {basis} basis")]
    StressOutOfDomain {
        basis: String,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("coefficient vector has length {got}, basis dimension is {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dataset is unidentifiable: {0}")]
    Unidentifiable(String),

    #[error("invalid test plan: {0}")]
    InvalidPlan(String),

    #[error("no candidate model produced a convergent fit")]
    NoConvergentFit,

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
