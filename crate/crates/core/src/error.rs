use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the numerical kernels and the model evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Elimination met a pivot below the rank tolerance; the equilibrium is not unique.
    #[error("singular matrix: pivot {pivot:e} at column {column} is below threshold {threshold:e}")]
    SingularMatrix { column: usize, pivot: f64, threshold: f64 },

    #[error("degenerate denominator in {stage}: value {value:e} (term scale {scale:e})")]
    DegenerateDenominator {
        stage: &'static str,
        value: f64,
        scale: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no convergence after {iterations} iterations (last step {last_step:e})")]
    NoConvergence { iterations: usize, last_step: f64 },

    #[error("no sign change on [{lo:e}, {hi:e}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("invalid bracket [{lo:e}, {hi:e}]: lower end must be below upper end")]
    InvalidBracket { lo: f64, hi: f64 },

    #[error("function value {value} at x = {x:e} is not finite")]
    NotFinite { x: f64, value: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("config error: {0}")]
    Config(String),
}
