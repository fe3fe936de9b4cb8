use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared across the crate. Variants mirror the failure modes of the
/// individual operations; analysis drivers match on them to decide whether a
/// failure aborts a run or merely skips one analysis.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: expected {expected} coordinates, found {found}")]
    RowDimension {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("duplicate point: indices {first} and {second} coincide within {tol}")]
    DuplicatePoint {
        first: usize,
        second: usize,
        tol: f64,
    },

    #[error("sample needs at least 2 points for a packing radius")]
    UndefinedRadius,

    #[error("region touches censored data near the window boundary: {0}")]
    BoundaryContamination(String),

    #[error("site too close to the window boundary: {0}")]
    BoundarySite(String),

    #[error("shrinking by {amount} empties a side of length {side}")]
    EmptyRegion { amount: f64, side: f64 },

    #[error("window too small: {0}")]
    InsufficientWindow(String),

    #[error("pattern not admissible: {0}")]
    InadmissiblePattern(String),

    #[error("patch radii differ: {0} vs {1}")]
    RadiusMismatch(f64, f64),

    #[error("{candidates} candidate copies exceed the exact cap of {cap}; use greedy mode")]
    ExactCapExceeded { candidates: usize, cap: usize },

    #[error("basis is singular")]
    SingularBasis,

    #[error("invalid generator parameters: {0}")]
    InvalidGenerator(String),

    #[error("weight {0} is not positive; the inradius bound is vacuous")]
    VacuousBound(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("report schema mismatch: expected {expected}, found {found}")]
    SchemaMismatch { expected: String, found: String },
}
