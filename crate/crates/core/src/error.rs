use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("curve has no knots")]
    EmptyCurve,

    #[error("curve knots must have strictly increasing x (knot {index})")]
    NonIncreasingKnots { index: usize },

    #[error("division by zero: {0} must be non-zero")]
    DivisionByZero(&'static str),

    #[error("infeasible: {constraint}")]
    Infeasible { constraint: String },

    #[error("injection never activates below {ceiling_lpm} L/min")]
    NeverActivates { ceiling_lpm: f64 },

    #[error("mark count mismatch: {before} vs {after}")]
    MarkCountMismatch { before: usize, after: usize },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("unknown parameter path `{0}`")]
    UnknownParam(String),

    #[error("non-finite value in `{field}` at t = {t} s")]
    NonFinite { field: &'static str, t: f64 },

    #[error("missing prototype row {0}")]
    MissingRow(String),

    #[error("{0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn infeasible(constraint: impl Into<String>) -> Self {
        Error::Infeasible {
            constraint: constraint.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
