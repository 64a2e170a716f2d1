use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A circular-unfolding spec that does not fit the tensor order.
    #[error("invalid unfolding spec: {0}")]
    InvalidSpec(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// The SVD iteration did not converge.
    #[error("SVD failed to converge on a {rows}x{cols} matrix")]
    Numerical { rows: usize, cols: usize },

    /// Malformed portable pixmap input.
    #[error("pixmap parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
