use thiserror::Error;

/// Errors produced by the shotarc pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Incompatible tensor shapes, naming both operands.
    #[error("shape mismatch: {left} vs {right} in {op}")]
    Shape {
        op: &'static str,
        left: String,
        right: String,
    },

    /// A value that must be finite was NaN or infinite.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// Input violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A CSV row could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    /// Input file structure does not match the documented schema.
    #[error("schema error: {0}")]
    Schema(String),

    /// Training failed (divergence, non-finite loss).
    #[error("training error at {context}: {message}")]
    Train { context: String, message: String },

    /// Evaluation could not be carried out on the given inputs.
    #[error("evaluation error: {0}")]
    Eval(String),

    /// Dataset generation produced no usable shots.
    #[error("generation error: {0}")]
    Generation(String),

    /// The finite-difference oracle hit a non-evaluable point.
    #[error("oracle error: {0}")]
    Oracle(String),

    /// Checkpoint file is malformed or from an incompatible version.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
