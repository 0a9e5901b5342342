use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("quadrature failure in cell {cell} (t = {t}): {reason}")]
    Quadrature { cell: usize, t: f64, reason: String },
    #[error("Taylor tail bound {bound:e} exceeds tolerance; need n_max >= {required_n_max}")]
    TruncationTooShort { bound: f64, required_n_max: usize },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("bracketing failed on [{lo}, {hi}]: {reason}")]
    Bracket { lo: f64, hi: f64, reason: String },
    #[error("root finder: {0}")]
    Root(String),
    #[error("moment condition violated: {0}")]
    Moment(String),
    #[error("statistics: {0}")]
    Statistics(String),
    #[error("linear algebra failure (LAPACK info {0})")]
    Lapack(i32),
    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
