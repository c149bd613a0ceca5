use thiserror::Error;

/// Errors produced anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters or mismatched inputs supplied by the caller.
    #[error("configuration error: {0}")]
    Config(String),

    /// The instance is structurally invalid (self-loops, bad indices, ...).
    #[error("malformed instance: {0}")]
    Malformed(String),

    /// The instance is well formed but unusable for benchmarking
    /// (no feasible state, constant feasible objective, ...).
    #[error("instance rejected: {0}")]
    InstanceRejected(String),

    /// A documented precondition of an operation was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Instance file could not be parsed.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// Instance file parsed but a field holds an invalid value.
    #[error("invalid field `{field}`: {message}")]
    Field { field: String, message: String },

    /// The adaptive integrator could not make progress.
    #[error("integration failed at t = {t}: step size {step} underflowed after {steps} steps")]
    StepUnderflow { t: f64, step: f64, steps: usize },

    /// The integrator exhausted its step budget.
    #[error("integration failed at t = {t}: exceeded {steps} steps")]
    TooManySteps { t: f64, steps: usize },

    /// The state lost normalization beyond the allowed drift.
    #[error("norm drift {drift:e} at t = {t} exceeds limit {limit:e}")]
    NormDrift { t: f64, drift: f64, limit: f64 },

    /// The instance generator kept producing rejected instances.
    #[error("generator failed: {0}")]
    Generator(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn rejected(msg: impl Into<String>) -> Self {
        Error::InstanceRejected(msg.into())
    }

    pub(crate) fn malformed(msg: impl Into<String>) -> Self {
        Error::Malformed(msg.into())
    }

    pub(crate) fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Field {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for the errors that mean "this instance is not usable", as opposed
    /// to a bug or bad configuration.
    pub fn is_rejection(&self) -> bool {
        matches!(self, Error::InstanceRejected(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
