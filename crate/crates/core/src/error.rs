use thiserror::Error;

use crate::srm::SrmReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid kernel token `{0}`")]
    KernelToken(String),

    #[error("kernel `{0}` is not supported here: {1}")]
    UnsupportedKernel(String, &'static str),

    #[error("gram matrix for {points} points exceeds the cap of {cap}")]
    TooLarge { points: usize, cap: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("data has a single class ({0}); both labels are required")]
    SingleClass(&'static str),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("model has no support vectors")]
    NoSupportVectors,

    #[error("vc confidence radicand is negative ({0:e})")]
    NegativeRadicand(f64),

    #[error("no polynomial degree converged")]
    SrmNoConvergence(Box<SrmReport>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidParameter(message.into())
    }
}
