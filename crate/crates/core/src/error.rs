use thiserror::Error;

/// Errors raised by the library. Mathematical check failures are not errors;
/// they are reported through the experiment reports.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("shape mismatch: expected (k={expected_k}, n={expected_n}), got (k={got_k}, n={got_n})")]
    ShapeMismatch {
        expected_k: usize,
        expected_n: usize,
        got_k: usize,
        got_n: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("variable x_({group},{alpha}) is missing from the assignment")]
    MissingVariable { group: usize, alpha: usize },

    #[error("monomials share group {0}; only disjoint-support products are defined")]
    OverlappingGroups(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("modulus {0} is not an admissible prime")]
    BadModulus(u64),

    #[error("characteristic {p} divides 2(2r+1)r! for r={r}")]
    InadmissibleCharacteristic { p: u64, r: usize },

    #[error("edge label {0} is already present")]
    LabelPresent(usize),

    #[error("edge label {0} is out of range")]
    LabelOutOfRange(usize),

    #[error("label sets differ: {0:?} vs {1:?}")]
    LabelSetMismatch(Vec<usize>, Vec<usize>),

    #[error("operator entry at row {row}, column {col} lies outside the predicted block pattern")]
    OffBlockEntry { row: usize, col: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
