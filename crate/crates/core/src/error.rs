use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument is not finite: {0}")]
    NonFinite(&'static str),

    #[error("a finite temperature (beta_hbar) is required for {0}")]
    FiniteTemperatureRequired(&'static str),

    #[error("spectral density family {0} needs a physical context (temperature) to be evaluated")]
    ContextRequired(&'static str),

    #[error("{0} is not supported for this spectral density family")]
    Unsupported(&'static str),

    #[error("quadrature did not converge: {what} (estimate {value:e}, error {error:e})")]
    QuadratureFailed {
        what: &'static str,
        value: f64,
        error: f64,
    },

    #[error("integral diverges: {0}")]
    Divergent(&'static str),

    #[error(
        "pole collision between bath rate {omega_index} and thermal pole {pole_index}; \
         change the decomposition order"
    )]
    PoleCollision {
        omega_index: usize,
        pole_index: usize,
    },

    #[error("eigenvalue iteration failed to converge")]
    EigenSolve,

    #[error("index {index} out of range {min}..={max}")]
    OutOfRange {
        index: usize,
        min: usize,
        max: usize,
    },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("evaluation point coincides with a pole")]
    PoleHit,

    #[error("fit failed: {0}")]
    Fit(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
