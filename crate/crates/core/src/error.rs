use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("singular leave-out subsystem when holding out index {index}")]
    SingularSubsystem { index: usize },

    #[error("dense path limited to {cap} parameters, problem has {p}")]
    SizeCap { p: usize, cap: usize },

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("divergence: {what} norm {norm:e} exceeded limit")]
    Divergence { what: &'static str, norm: f64 },

    #[error("did not converge: {0}")]
    NotConverged(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("objective failed at s = {s}: {source}")]
    ObjectiveAt {
        s: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_)
            | Error::DimensionMismatch { .. }
            | Error::Precondition(_)
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_) => 1,
            Error::Singular(_)
            | Error::SingularSubsystem { .. }
            | Error::SizeCap { .. }
            | Error::NumericalBreakdown(_)
            | Error::Divergence { .. } => 2,
            Error::NotConverged(_) => 3,
            Error::ObjectiveAt { source, .. } => source.exit_code(),
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
