use thiserror::Error;

/// Errors surfaced by ratio evaluation, boundary construction and the
/// optimization harness.
#[derive(Debug, Clone, Error)]
pub enum CrouzeixError {
    #[error("polynomial has no coefficients")]
    EmptyPolynomial,

    #[error("polynomial is identically zero")]
    ZeroPolynomial,

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("parameter vector has length {got}, layout requires {want}")]
    ParameterLength { got: usize, want: usize },

    #[error("structural invariant violated: {0}")]
    Structure(String),

    #[error("Crabb matrix order must be at least 2, got {0}")]
    CrabbOrder(usize),

    #[error("reference configuration invalid: {0}")]
    ReferenceConfig(String),

    #[error("dominance condition violated: {0}")]
    Dominance(String),

    #[error("p(A) is numerically zero; the ratio is undefined there")]
    ZeroDenominator,

    #[error("|p(z)| vanishes at the attainment point; gradient phase undefined")]
    PhaseUndefined,

    #[error("eigensolver failed to converge")]
    EigFailure,

    #[error("magnitude guard tripped: {0:e} exceeds the overflow limit")]
    Overflow(f64),

    #[error("{0} requires a nonempty input")]
    EmptyInput(&'static str),

    #[error("oracle evaluation failed at the starting point: {0}")]
    OracleAtStart(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CrouzeixError {
    fn from(e: std::io::Error) -> Self {
        CrouzeixError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CrouzeixError>;
