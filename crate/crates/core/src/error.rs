use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TqError {
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("interpolation needs {expected} points, got {got}")]
    PointCount { expected: usize, got: usize },

    #[error("duplicate interpolation abscissae at indices {0} and {1}")]
    DuplicateAbscissa(usize, usize),

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("evaluation at Bethe root; use polynomial form")]
    AtBetheRoot,

    #[error("Q does not satisfy BAEs; Λ is not polynomial (relative remainder {0:.3e})")]
    NotPolynomial(f64),

    #[error("selection rule violated: {0}")]
    SelectionRule(String),

    #[error("vanishing transfer eigenvalue at origin")]
    VanishingAtOrigin,

    #[error("accidental degeneracy at probe point; retry with new u* (gave up after {0} probe points)")]
    AccidentalDegeneracy(usize),

    #[error("singular reconstruction system (condition number {0:.3e})")]
    SingularSystem(f64),

    #[error("reconstruction inconsistent (residual {0:.3e})")]
    ReconstructionInconsistent(f64),

    #[error("null state (norm {0:.3e})")]
    NullState(f64),

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, TqError>;
