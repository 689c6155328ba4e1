use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("horizon {got} is too small (need at least {need})")]
    HorizonTooSmall { got: usize, need: usize },

    #[error("unknown family '{0}'")]
    UnknownFamily(String),

    #[error("parameter '{name}' = {value} out of range: {reason}")]
    ParamOutOfRange {
        name: String,
        value: f64,
        reason: String,
    },

    #[error("missing parameter '{0}'")]
    MissingParam(String),

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("horizon mismatch: {0} vs {1}")]
    HorizonMismatch(usize, usize),

    /// The argument lies beyond the range on which a finite-horizon evaluation
    /// equals the infinite-horizon object.
    #[error("{what} = {value} outside exact range (limit {limit})")]
    OutOfExactRange {
        what: &'static str,
        value: f64,
        limit: f64,
    },

    #[error("input is not log-convex (first violation at index {0})")]
    NotLogConvex(usize),

    #[error("empty index set")]
    EmptyIndexSet,

    #[error("grid index {0} missing")]
    MissingIndex(f64),

    #[error("index grid violates required pattern: {0}")]
    GridPattern(String),

    #[error("empty window: {0}")]
    EmptyWindow(String),

    #[error("empty feasible grid")]
    EmptyGrid,

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("{0}")]
    Schema(SchemaErrors),

    #[error("bundle has no reports")]
    EmptyBundle,

    #[error("{label}: {source}")]
    Annotated {
        label: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn annotate(self, label: impl Into<String>) -> Self {
        Error::Annotated {
            label: label.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn param(name: &str, value: f64, reason: &str) -> Self {
        Error::ParamOutOfRange {
            name: name.to_string(),
            value,
            reason: reason.to_string(),
        }
    }

    /// True for errors caused by a malformed input document rather than a computation.
    pub fn is_schema(&self) -> bool {
        match self {
            Error::Schema(_) | Error::Json(_) | Error::UnknownFamily(_) => true,
            Error::Annotated { source, .. } => source.is_schema(),
            _ => false,
        }
    }
}

/// One schema violation, located by a JSON pointer-like path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaErrors(pub Vec<SchemaError>);

impl std::fmt::Display for SchemaErrors {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}: {}", e.path, e.message)?;
        }
        Ok(())
    }
}
