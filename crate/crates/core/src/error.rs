use thiserror::Error;

/// Errors raised while constructing or combining operators, states,
/// observables and instruments.
///
/// Validation failures carry the measured size of the violation so callers
/// can report how far an input was from satisfying the invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian (max |M - M*| = {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not positive semi-definite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_diagonal:e})")]
    ConvergenceFailure { sweeps: usize, off_diagonal: f64 },

    #[error("trace is not one (trace {trace}, |trace - 1| = {violation:e})")]
    TraceNotOne { trace: f64, violation: f64 },

    #[error("Bloch vector outside the unit ball (norm {norm})")]
    OutsideBlochBall { norm: f64 },

    #[error("effect {index} violates 0 <= C <= I (violation {violation:e})")]
    NotAnEffect { index: usize, violation: f64 },

    #[error("effects do not sum to the identity (max residual {residual:e})")]
    CompletenessViolation { residual: f64 },

    #[error("duplicate outcome {0}")]
    DuplicateOutcome(String),

    #[error("observable or instrument has no outcomes")]
    Empty,

    #[error("function is not defined on outcome {0}")]
    MissingLabel(String),

    #[error("effects for outcomes {x} and {y} do not commute (commutator norm {norm:e})")]
    NotCommuting { x: f64, y: f64, norm: f64 },

    #[error("unknown outcome {0}")]
    UnknownOutcome(String),

    #[error("weights are not a probability distribution ({0})")]
    NotAProbability(String),

    #[error(
        "operation is not trace non-increasing (max eigenvalue of sum K*K is {max_eigenvalue})"
    )]
    NotAnOperation { max_eigenvalue: f64 },

    #[error("instrument is not trace preserving (max |sum K*K - I| = {residual:e})")]
    NotTracePreserving { residual: f64 },

    #[error("outcome {0} is not real-valued")]
    NotRealValued(String),

    #[error("{0}")]
    InvalidArgument(String),
}

impl Error {
    /// Name of the violated invariant, used in machine-readable diagnostics.
    pub fn invariant(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension",
            Error::InvalidShape(_) => "shape",
            Error::NonFinite { .. } => "finite",
            Error::NotHermitian { .. } => "hermitian",
            Error::NotPsd { .. } => "positive_semidefinite",
            Error::ConvergenceFailure { .. } => "convergence",
            Error::TraceNotOne { .. } => "trace_one",
            Error::OutsideBlochBall { .. } => "bloch_ball",
            Error::NotAnEffect { .. } => "effect_bounds",
            Error::CompletenessViolation { .. } => "completeness",
            Error::DuplicateOutcome(_) => "distinct_outcomes",
            Error::Empty => "nonempty",
            Error::MissingLabel(_) => "total_function",
            Error::NotCommuting { .. } => "commuting",
            Error::UnknownOutcome(_) => "known_outcome",
            Error::NotAProbability(_) => "probability",
            Error::NotAnOperation { .. } => "trace_nonincreasing",
            Error::NotTracePreserving { .. } => "trace_preserving",
            Error::NotRealValued(_) => "real_valued",
            Error::InvalidArgument(_) => "argument",
        }
    }

    /// Measured size of the violation, when there is one.
    pub fn violation(&self) -> Option<f64> {
        match *self {
            Error::NotHermitian { residual }
            | Error::CompletenessViolation { residual }
            | Error::NotTracePreserving { residual } => Some(residual),
            Error::NotPsd { min_eigenvalue } => Some(-min_eigenvalue),
            Error::ConvergenceFailure { off_diagonal, .. } => Some(off_diagonal),
            Error::TraceNotOne { violation, .. } => Some(violation),
            Error::OutsideBlochBall { norm } => Some(norm - 1.0),
            Error::NotAnEffect { violation, .. } => Some(violation),
            Error::NotCommuting { norm, .. } => Some(norm),
            Error::NotAnOperation { max_eigenvalue } => Some(max_eigenvalue - 1.0),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
