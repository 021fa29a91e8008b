use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters or configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A lattice quantity does not fit the integer width used for wavevectors.
    #[error("integer overflow: {0}")]
    Overflow(String),

    /// A structural invariant (orthogonality, unit length, lacunarity) failed.
    #[error("constraint violated: {0}")]
    Constraint(String),

    /// Combinatorial or size budget exceeded.
    #[error("budget exceeded: {what} needs {needed}, budget is {budget}")]
    Budget {
        what: &'static str,
        needed: usize,
        budget: usize,
    },

    /// The sampling grid cannot resolve the field's bandwidth.
    #[error("insufficient resolution: {0}")]
    Resolution(String),

    /// A supremum was attained at the edge of the search range.
    #[error("supremum attained at range boundary: {0}")]
    Boundary(String),

    /// Numerical failure (instability, NaN, inconsistent input).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Operation outside the supported scope of the calculus.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Failure inside a named pipeline stage.
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn in_stage(self, stage: &'static str) -> Error {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage { stage, source: Box::new(e) },
        }
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::Parse(_)
            | Error::Json(_)
            | Error::Io(_)
            | Error::Constraint(_)
            | Error::Overflow(_) => 2,
            Error::Budget { .. } => 4,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 3,
        }
    }
}
