use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Shapes that do not fit together, or sizes that overflow.
    #[error("size error: {0}")]
    Size(String),

    /// Input data violating a precondition (non-finite, non-skew, singular transform).
    #[error("input error: {0}")]
    Input(String),

    /// Out-of-range algorithm parameters such as an invalid target rank.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// An iterative kernel failed to converge.
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) => 2,
            _ => 1,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
