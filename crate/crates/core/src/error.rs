use thiserror::Error;

/// Errors raised by the numerical kernels and the model layers built on them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e} after {subdivisions} subdivisions")]
    NotConverged {
        estimate: f64,
        error_bound: f64,
        subdivisions: usize,
    },

    #[error("function value is not finite at x = {at:e}")]
    NonFinite { at: f64 },

    #[error("root bracketing failed in {op}: {detail}")]
    Bracket { op: &'static str, detail: String },

    #[error("resource budget exceeded: {0}")]
    Budget(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn bracket(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Bracket {
            op,
            detail: detail.into(),
        }
    }

    /// True for failures of an iterative numerical method, as opposed to
    /// invalid inputs or budget violations.
    pub fn is_numerics_failure(&self) -> bool {
        matches!(
            self,
            Error::NotConverged { .. } | Error::NonFinite { .. } | Error::Bracket { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
