use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    /// A value violated an operation's precondition.
    #[error("invalid input: {0}")]
    Input(String),

    /// A root-find or fit had no solution in the model's reachable range.
    #[error("no solution: {0}")]
    NoSolution(String),

    /// Too few distinct values to estimate an information quantity.
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
