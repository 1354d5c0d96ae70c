//! Error type shared by every module.

use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two inputs that must agree in length or shape do not.
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    /// A NaN or infinity was found at construction time.
    NonFinite {
        what: &'static str,
        row: usize,
        col: usize,
    },
    /// Fewer observations than the procedure requires.
    SampleTooSmall { required: usize, got: usize },
    /// A covariate column has zero sample variance, so the
    /// variance-standardized statistics are undefined.
    SingularScaling { column: usize },
    /// A scalar argument is outside its admissible range.
    Domain(&'static str),
    /// The F-test needs `p <= n - 2` and a well-conditioned design.
    NotApplicable(&'static str),
    /// An input that makes the statistic identically degenerate
    /// (e.g. a zero residual vector for the permutation test).
    DegenerateInput(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch {
                what,
                expected,
                got,
            } => write!(f, "dimension mismatch in {what}: expected {expected}, got {got}"),
            Error::NonFinite { what, row, col } => {
                write!(f, "non-finite value in {what} at row {row}, column {col}")
            }
            Error::SampleTooSmall { required, got } => {
                write!(f, "sample too small: need n >= {required}, got n = {got}")
            }
            Error::SingularScaling { column } => {
                write!(f, "column {column} has zero sample variance")
            }
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::NotApplicable(msg) => write!(f, "not applicable: {msg}"),
            Error::DegenerateInput(msg) => write!(f, "degenerate input: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
