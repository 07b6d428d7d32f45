use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("need at least {required} nodes, found {found}")]
    TooFewNodes { required: usize, found: usize },

    #[error("singular cells {first} and {second} are closer than {min_cells} cells")]
    MultipleSingularitiesTooClose {
        first: usize,
        second: usize,
        min_cells: usize,
    },

    #[error("supremum of the smooth-part derivative is zero")]
    DegenerateSmoothness,

    #[error("stencil index {index} outside 0..={last}")]
    IndexOutOfRange { index: isize, last: usize },

    #[error("one-sided fit is ill-conditioned (condition estimate {0:e})")]
    IllConditioned(f64),

    #[error("row {0} has no detectable singularity")]
    RowWithoutSingularity(usize),

    #[error("row {row} has {count} singularities, expected one")]
    RowWithMultipleSingularities { row: usize, count: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{context}: {source}")]
    Line {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Wraps a per-line (row/column) pipeline failure with its position.
    pub fn in_line(self, context: impl Into<String>) -> Self {
        Error::Line {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping any row/column annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::Line { source, .. } => source.root(),
            other => other,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
