use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid distribution spec: field `{field}`: {reason}")]
    InvalidSpec { field: String, reason: String },

    #[error("{what} must be finite, got {value}")]
    NonFinite { what: &'static str, value: f64 },

    #[error("{what} = {value} outside {expected}")]
    OutOfDomain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("{what} is not supported for the {family} family")]
    Unsupported {
        what: &'static str,
        family: &'static str,
    },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("saddle point for x = {x} not bracketed after {doublings} doublings")]
    NoBracket { x: f64, doublings: usize },

    #[error("enumeration needs {needed:.3e} paths, budget is {budget}; use a smaller k")]
    BudgetExceeded { needed: f64, budget: u64 },

    #[error(
        "truncation bias {bias:.3e} dominates the standard error {std_error:.3e} at k_trunc = {k_trunc}; increase k_trunc"
    )]
    TruncationBias {
        k_trunc: usize,
        bias: f64,
        std_error: f64,
    },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn spec(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidSpec {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for failures caused by user input rather than numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidSpec { .. }
                | Error::OutOfDomain { .. }
                | Error::Unsupported { .. }
                | Error::Config(_)
                | Error::NonFinite { .. }
                | Error::BudgetExceeded { .. }
        )
    }
}
