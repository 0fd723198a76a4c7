use thiserror::Error;

/// Failures raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The doubled-node self-check moved a quadrature result by more than
    /// the allowed drift.
    #[error(
        "convergence failure in {context}: doubled-node drift {drift:.3e} exceeds {threshold:.1e}"
    )]
    ConvergenceFailure {
        context: String,
        drift: f64,
        threshold: f64,
    },

    #[error("near-singular Gram matrix: smallest eigenvalue {min:.3e} below floor {floor:.3e}")]
    NearSingularGram { min: f64, floor: f64 },

    #[error("point at radius {radius:.6} lies outside the evaluation radius {limit:.6} of the truncated basis")]
    EvaluationRadiusExceeded { radius: f64, limit: f64 },

    #[error("symbol support radius {support:.6} exceeds the evaluation radius {limit:.6} of the truncated basis")]
    SupportExceedsRadius { support: f64, limit: f64 },

    #[error("argument {value} outside the domain {domain}")]
    OutOfDomain { value: f64, domain: &'static str },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
