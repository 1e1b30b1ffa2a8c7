use thiserror::Error;

/// Errors raised by model construction, formula evaluation and simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested point lies outside the regime the formula covers.
    #[error("range error: {0}")]
    Range(String),

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error(
        "quadrature did not converge: value {value:e}, error estimate {error_estimate:e} after {subdivisions} subdivisions"
    )]
    Convergence {
        value: f64,
        error_estimate: f64,
        subdivisions: usize,
    },

    /// `n V(M) >= 1`: the censoring threshold is too low for the soft-censoring regime.
    #[error("hard censoring regime: Pi_n = n V(M) = {pi_n:e} is not in (0, 1)")]
    HardRegime { pi_n: f64 },

    /// Stratum weights underflow even in log space.
    #[error("stratum weights underflow: {0}")]
    StratumOverflow(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }
}
