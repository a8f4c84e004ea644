use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure of the bracketed level solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("no sign change on bracket [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    #[error("bisection did not reach width {width:e} within {iterations} iterations")]
    NoConvergence { width: f64, iterations: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {series} at index {index}")]
    NonFinite { series: &'static str, index: usize },
    #[error("length mismatch: xs has {xs} values, ys has {ys}")]
    LengthMismatch { xs: usize, ys: usize },
    #[error("sample of size {n} is below the minimum of {min}")]
    TooSmall { n: usize, min: usize },
    #[error("invalid ranks: {0}")]
    InvalidRanks(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{0} has zero variance")]
    ZeroVariance(&'static str),
    #[error("overflow in {op} at index {index}")]
    Overflow { op: &'static str, index: usize },
    #[error("level {value} outside admissible range [{lo}, {hi}]")]
    OutOfBracket { value: f64, lo: f64, hi: f64 },
    #[error("solver failure: {0}")]
    Solver(#[from] SolverError),
    #[error("panel: {0}")]
    Panel(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerical machinery rather than of the input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Solver(_) | Error::OutOfBracket { .. } | Error::Overflow { .. }
        )
    }
}
