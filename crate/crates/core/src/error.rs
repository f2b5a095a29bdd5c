use thiserror::Error;

/// Error taxonomy shared by the library and the CLI.
///
/// The CLI maps variants to exit codes: configuration, usage and parse
/// problems exit 2, data and numerical failures exit 3, I/O failures exit 4.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters: non-finite extents, unsupported (d, p) ranges,
    /// zero regularization where one is required, and similar.
    #[error("configuration: {0}")]
    Config(String),

    /// Structural misuse: mismatched array lengths, too few samples for a
    /// fit, and similar caller errors.
    #[error("usage: {0}")]
    Usage(String),

    /// Inputs that parse but cannot be worked with: non-finite samples,
    /// potentials violating a run mode's hypotheses, eigenvalues with the
    /// wrong sign for a fit.
    #[error("data: {0}")]
    Data(String),

    /// The iteration produced a non-finite energy or otherwise lost the
    /// ability to continue.
    #[error("numerics: {0}")]
    Numerics(String),

    /// Malformed potential descriptor or CSV text; `position` is a byte
    /// offset into the offending string.
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code the CLI uses for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Usage(_) | Error::Parse { .. } => 2,
            Error::Data(_) | Error::Numerics(_) => 3,
            Error::Io(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
