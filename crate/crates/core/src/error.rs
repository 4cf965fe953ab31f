use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge: {what} (difference {difference:.3e} exceeds {allowed:.3e})")]
    NonConvergence {
        what: String,
        difference: f64,
        allowed: f64,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("function vanishes at the origin (|f(0)| = {0:.3e})")]
    ZeroAtOrigin(f64),

    #[error("zero-norm signal: {0}")]
    ZeroNorm(String),

    #[error("degenerate fit: {0}")]
    FitDegenerate(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Short machine-readable tag, used by the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::NonConvergence { .. } => "non-convergence",
            Error::InsufficientData(_) => "insufficient-data",
            Error::Overflow(_) => "overflow",
            Error::ZeroAtOrigin(_) => "zero-at-origin",
            Error::ZeroNorm(_) => "zero-norm",
            Error::FitDegenerate(_) => "fit-degenerate",
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::Overflow(_) | Error::FitDegenerate(_)
        )
    }
}
