use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Inputs violate a documented precondition or model invariant.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A numerical estimate did not reach the requested tolerance.
    #[error("{what} did not converge: error estimate {estimate:.3e} exceeds tolerance {tolerance:.3e}")]
    NoConvergence {
        what: &'static str,
        estimate: f64,
        tolerance: f64,
    },

    /// The request cannot be met within configured resource limits.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("time stepping became unstable at step {step}: field norm grew by {growth:.3e}")]
    Unstable { step: usize, growth: f64 },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence { .. } | Error::Unstable { .. })
    }
}
