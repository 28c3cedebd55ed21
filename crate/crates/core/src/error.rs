use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    Dimension(String),

    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("zeta = {0} is outside [-1, 1]")]
    ZetaOutOfRange(f64),

    #[error("non-finite {what} at zeta = {zeta}")]
    NonFinite { what: &'static str, zeta: f64 },

    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),

    #[error("infeasible starting point: {0}")]
    Infeasible(String),

    #[error("invalid solver configuration: {0}")]
    Config(String),

    #[error("{}line {line}: {msg}", source_prefix(.path))]
    Parse {
        path: Option<PathBuf>,
        line: usize,
        msg: String,
    },

    #[error("exhaustive search over {count} candidates exceeds the limit of {limit}")]
    SearchTooLarge { count: u128, limit: u128 },

    #[error("invalid graph family code {0:?} (expected e.g. DBL, UPN)")]
    FamilyCode(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("record {0:?} has no known optimum")]
    MissingOptimum(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("output error: {0}")]
    Output(String),
}

fn source_prefix(path: &Option<PathBuf>) -> String {
    match path {
        Some(p) => format!("{}: ", p.display()),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    /// True for errors caused by numerical breakdown rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonFinite { .. })
    }

    /// True for errors caused by unreadable or malformed input files.
    pub fn is_input(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Io { .. })
    }
}
