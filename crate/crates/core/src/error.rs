use num_complex::Complex64;

/// Errors produced anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter set violates one of the grid invariants.
    #[error("invalid parameters: {0}")]
    Params(String),

    /// A configuration file or record could not be interpreted.
    #[error("configuration error: {0}")]
    Config(String),

    /// Two grids or a grid and a parameter set disagree on shape.
    #[error("dimension mismatch: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    Dimension {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },

    /// A flat buffer has the wrong number of elements.
    #[error("length mismatch: expected {expected}, got {got}")]
    Length { expected: usize, got: usize },

    /// A function was called outside the region where it is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A coefficient model was requested where it does not apply.
    #[error("coefficient model {model} is not supported here: {reason}")]
    WrongModel { model: String, reason: String },

    /// Adaptive quadrature stopped before reaching its tolerance.
    #[error("quadrature did not converge: estimate {estimate}, error estimate {error:e}")]
    Quadrature { estimate: Complex64, error: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
