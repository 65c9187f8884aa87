use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure modes of the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),

    #[error("optimal phase is undefined when both the detuning and the total decay vanish")]
    UndefinedPhase,

    #[error("weak-drive amplitude system is near-singular (condition number {condition:.3e})")]
    NearResonanceDegeneracy { condition: f64 },

    #[error(
        "steady state is degenerate or ill-conditioned \
         (condition estimate {condition:.3e}, residual {residual:.3e})"
    )]
    DegenerateSteadyState { condition: f64, residual: f64 },

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("integrator did not converge; step reached {step:.3e} without meeting the tolerance")]
    Stiffness { step: f64 },

    #[error("no successful rows for column `{0}`")]
    EmptyResult(String),

    #[error("invalid sweep specification: {0}")]
    InvalidSweep(String),
}

impl Error {
    /// Short machine-readable tag, used for per-row status columns.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::DivisionByZero(_) => "division_by_zero",
            Error::UnsupportedConfiguration(_) => "unsupported_configuration",
            Error::UndefinedPhase => "undefined_phase",
            Error::NearResonanceDegeneracy { .. } => "near_resonance_degeneracy",
            Error::DegenerateSteadyState { .. } => "degenerate_steady_state",
            Error::UndefinedCorrelation(_) => "undefined_correlation",
            Error::Stiffness { .. } => "stiffness",
            Error::EmptyResult(_) => "empty_result",
            Error::InvalidSweep(_) => "invalid_sweep",
        }
    }
}
