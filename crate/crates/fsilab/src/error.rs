use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singularity: {0}")]
    Singularity(String),
    #[error("iteration limit reached: last iterate {last}, residual {residual:e}")]
    IterationLimit { last: Complex64, residual: f64 },
    #[error("no sign change on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },
    #[error("matrix is numerically nonsingular (pivot ratio {ratio:e})")]
    Rank { ratio: f64 },
    #[error("degenerate parameters: {0}")]
    Degenerate(String),
    #[error("contour refinement failed: {0}")]
    Refinement(String),
    #[error("consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
