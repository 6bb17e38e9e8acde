use core::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Argument outside the domain of an operation.
    Domain(&'static str),
    DimensionMismatch { expected: usize, found: usize },
    NotSquare { rows: usize, cols: usize },
    NotHermitian { max_deviation: f64 },
    NotPositiveDefinite { min_eigenvalue: f64 },
    NonUnitDiagonal { max_deviation: f64 },
    /// Singular or numerically degenerate matrix; carries a condition estimate.
    Degenerate { condition: f64 },
    /// CF modulus at the truncation frequency exceeds the tolerance.
    Truncation { omega: f64, modulus: f64 },
    /// Inversion window leaves out too much probability mass.
    Bracketing { mass_outside: f64 },
    /// Requested probability outside the numerically resolved CDF range.
    Range { q: f64 },
    NoConvergence(&'static str),
    /// Internal consistency check failed.
    Internal(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(what) => write!(f, "domain error: {what}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NotSquare { rows, cols } => write!(f, "matrix is {rows}x{cols}, not square"),
            Error::NotHermitian { max_deviation } => {
                write!(f, "matrix not Hermitian (max |A - A^H| = {max_deviation:e})")
            }
            Error::NotPositiveDefinite { min_eigenvalue } => {
                write!(f, "matrix not positive definite (min eigenvalue {min_eigenvalue:e})")
            }
            Error::NonUnitDiagonal { max_deviation } => {
                write!(f, "diagonal entries deviate from 1 by up to {max_deviation:e}")
            }
            Error::Degenerate { condition } => {
                write!(f, "numerically degenerate matrix (condition estimate {condition:e})")
            }
            Error::Truncation { omega, modulus } => write!(
                f,
                "characteristic function not negligible at truncation: |phi({omega})| = {modulus:e}"
            ),
            Error::Bracketing { mass_outside } => {
                write!(f, "capacity window misses probability mass {mass_outside:e}")
            }
            Error::Range { q } => write!(f, "probability {q} outside the resolved CDF range"),
            Error::NoConvergence(what) => write!(f, "no convergence: {what}"),
            Error::Internal(what) => write!(f, "internal error: {what}"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
