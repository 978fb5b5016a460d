use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown key `{0}`")]
    UnknownKey(String),

    #[error("missing key `{0}`")]
    MissingKey(String),

    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    #[error("outside model validity: {0}")]
    Validity(String),

    #[error("scenario has no {0} optics")]
    WrongOptics(&'static str),

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("infeasible target: {0}")]
    Infeasible(String),

    #[error("objective is not unimodal: {0} separated minima in coarse scan")]
    NonUnimodal(usize),

    #[error("optimum lies on the search boundary at {0:e}")]
    OptimumAtBoundary(f64),

    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    #[error("time step {dt:e} s exceeds stability limit {limit:e} s")]
    Unstable { dt: f64, limit: f64 },

    #[error("cannot serialize: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by the input document rather than by the
    /// numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse(_)
                | Error::UnknownKey(_)
                | Error::MissingKey(_)
                | Error::Validation { .. }
                | Error::Validity(_)
                | Error::WrongOptics(_)
        )
    }
}
