use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("field size {0} is outside the supported range (q < 2^32)")]
    FieldUnsupported(u64),
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NonSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("degree {degree} exceeds m-1 = {max}{}", row_suffix(.row))]
    DegreeTooHigh {
        row: Option<usize>,
        degree: usize,
        max: usize,
    },
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("no value assigned to variable a{0}")]
    MissingAssignment(u32),
    #[error("all polynomials must have degree m-1 = {expected} (row {row} has {found})")]
    DegreesNotUniform { row: usize, expected: usize, found: usize },
    #[error("support matrix violates the MDS condition on rows {witness:?}")]
    NotMdsCondition { witness: Vec<usize> },
    #[error("no suitable evaluation points found after {tried} candidates")]
    NotFound { tried: u64 },
    #[error("field of size {q} cannot hold {n} distinct evaluation points")]
    FieldTooSmall { q: u64, n: usize },
    #[error("field of size {q} is below the bound n+m-1 = {bound}")]
    FieldBelowBound { q: u64, bound: usize },
    #[error("reduction stuck: polynomials {first} and {second} are identical of degree m-1")]
    StuckGrp { first: usize, second: usize },
    #[error("reduction ended with a non-acceptable degree vector {degrees:?}")]
    NotAcceptable { degrees: Vec<usize> },
    #[error("invalid support matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid root family: {0}")]
    InvalidFamily(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
}

fn row_suffix(row: &Option<usize>) -> String {
    row.map(|r| format!(" (row {})", r + 1)).unwrap_or_default()
}
