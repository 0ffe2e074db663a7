use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown function spec `{0}` (expected linear | quadratic | exp | poly:<c1>,<c2>,...)")]
    UnknownFunctionSpec(String),

    #[error("invalid function: {0}")]
    InvalidFunction(String),

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("root solve did not converge after {iterations} iterations (t = {t}, residual = {residual:e})")]
    NonConvergence {
        iterations: usize,
        t: f64,
        residual: f64,
    },

    #[error("no threshold index satisfies the interval constraint (function hypotheses violated?)")]
    NoThresholdIndex,

    #[error("SVD failed to converge")]
    Svd,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
