use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("wrong spectral regime: {0}")]
    Regime(String),

    #[error("series did not converge: {what} (error {achieved:e} > target {target:e})")]
    NonConvergence {
        what: &'static str,
        achieved: f64,
        target: f64,
    },

    #[error("quadrature tolerance not met: error {achieved:e} > target {target:e}")]
    ToleranceNotMet { achieved: f64, target: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("insufficient acceptance rate {rate:e} in conditional sampling")]
    InsufficientAcceptance { rate: f64 },

    #[error("matrix structure violated: {0}")]
    Structure(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn regime(msg: impl Into<String>) -> Self {
        Error::Regime(msg.into())
    }

    pub(crate) fn structure(msg: impl Into<String>) -> Self {
        Error::Structure(msg.into())
    }

    /// True for errors caused by the numerics rather than by the caller's
    /// parameters.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::ToleranceNotMet { .. } | Error::InsufficientAcceptance { .. }
        )
    }
}
