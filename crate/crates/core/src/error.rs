use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The input does not describe a full-dimensional convex body.
    #[error("degenerate body: {0}")]
    Degenerate(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// An operation was called outside the range where its result is justified.
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("vertex {0} is not an extreme point of the polytope")]
    NotExtreme(usize),
    #[error("lattice enumeration box is unbounded")]
    Unbounded,
    #[error("exponent fit failed: {0}")]
    Fit(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
