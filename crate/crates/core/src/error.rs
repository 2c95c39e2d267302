use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The adaptive integrator could not refine further; `value` is the best
    /// available estimate.
    #[error(
        "quadrature tolerance not reached: best value {value}, error estimate {err_estimate:e} \
         after {evaluations} evaluations"
    )]
    ToleranceNotReached {
        value: Complex64,
        err_estimate: f64,
        evaluations: usize,
    },

    #[error("subdivision limit of {limit} panels reached (best value {value}, error estimate {err_estimate:e})")]
    SubdivisionLimit {
        value: Complex64,
        err_estimate: f64,
        limit: usize,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("power-law fit rejected: {reason} (slope {slope:.4}, residual {residual:.3e})")]
    FitUnstable {
        slope: f64,
        residual: f64,
        reason: String,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Exit-code class used by front ends: `true` for argument problems,
    /// `false` for numerical failures.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Unsupported(_))
    }
}
