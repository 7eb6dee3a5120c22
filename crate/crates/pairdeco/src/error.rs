use num_complex::Complex64;
use thiserror::Error;

/// Everything that can go wrong in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("missing key {0}")]
    MissingKey(&'static str),
    #[error("line {line}: non-numeric value {value:?} for key {key}")]
    NonNumeric {
        line: usize,
        key: String,
        value: String,
    },
    #[error("line {line}: unknown key {key}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key {key}")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: expected `key = value`")]
    Malformed { line: usize },
    #[error("{0} violated")]
    Invariant(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("singular mode: omega must be positive (the k = 0 mode is excluded)")]
    SingularMode,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unit mismatch: eigenvalues per {eigen} against kernels per {kernel}")]
    UnitMismatch {
        eigen: &'static str,
        kernel: &'static str,
    },
    #[error("cutoff schedule exhausted at n_max = {n_max}: last estimates {previous} and {last}")]
    NotConverged {
        previous: Complex64,
        last: Complex64,
        n_max: usize,
    },
    #[error("N = {0} is outside the supported range")]
    OutOfBudget(u32),
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("no records")]
    Empty,
}

pub type Result<T> = std::result::Result<T, Error>;
