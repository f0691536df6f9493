use thiserror::Error;

pub type Result<T, E = SpoError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum SpoError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("qubit count mismatch: expected {expected}, got {actual}")]
    QubitMismatch { expected: usize, actual: usize },

    #[error("grid index {index} out of range 0..={max}")]
    GridIndex { index: usize, max: usize },

    #[error("eigensolver did not converge (residual {residual:.3e}){}", grid_suffix(*.grid_index))]
    EigenNonConvergence {
        residual: f64,
        grid_index: Option<usize>,
    },

    #[error("operator has imaginary entries; use the Hermitian eigensolver")]
    ComplexOperator,

    #[error("degenerate first excited level at grid point {index} (lambda2 - lambda1 = {splitting:.3e})")]
    DegenerateExcited { index: usize, splitting: f64 },

    #[error("schedule rejected: {0}")]
    ScheduleRejected(String),

    #[error("norm drift {drift:.3e} exceeds tolerance {tolerance:.1e}")]
    NormDrift { drift: f64, tolerance: f64 },

    #[error("linear program failed: {0}")]
    LinearProgram(String),

    #[error("{context}: {message}")]
    Parse { context: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn grid_suffix(index: Option<usize>) -> String {
    match index {
        Some(i) => format!(" at grid point {i}"),
        None => String::new(),
    }
}

impl SpoError {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        SpoError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        SpoError::Parse {
            context: context.into(),
            message: message.into(),
        }
    }

    /// True for failures caused by files or their contents rather than by the numerics.
    pub fn is_io_or_schema(&self) -> bool {
        matches!(
            self,
            SpoError::Io { .. } | SpoError::Parse { .. } | SpoError::Json(_)
        )
    }
}
