use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("integer overflow: {0}")]
    Overflow(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("diagram is not realizable in the plane: {0}")]
    Realizability(String),
    #[error("{0}")]
    Semantic(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("series truncated too early: estimated tail {tail:e} exceeds tolerance {tol:e}")]
    Tail { tail: f64, tol: f64 },
    #[error("solver did not converge: {0}")]
    Solver(String),
    #[error("corrupted input: {0}")]
    Corrupted(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable category, used for CLI exit reporting.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Argument(_) => "argument",
            Error::Overflow(_) => "overflow",
            Error::Resource(_) => "resource",
            Error::Syntax { .. } => "syntax",
            Error::Realizability(_) => "realizability",
            Error::Semantic(_) => "semantic",
            Error::Unsupported(_) => "unsupported",
            Error::Numerical(_) => "numerical",
            Error::Tail { .. } => "tail",
            Error::Solver(_) => "solver",
            Error::Corrupted(_) => "corrupted-input",
            Error::Io(_) => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Argument(_) => 2,
            Error::Syntax { .. } | Error::Semantic(_) | Error::Realizability(_) => 3,
            Error::Unsupported(_) => 4,
            Error::Overflow(_) | Error::Resource(_) => 5,
            Error::Numerical(_) | Error::Tail { .. } | Error::Solver(_) => 6,
            Error::Corrupted(_) | Error::Io(_) => 7,
        }
    }
}

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
