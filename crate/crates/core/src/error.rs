use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("length mismatch: expected {expected} samples, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("root is not bracketed: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoBracket { f_lo: f64, f_hi: f64 },
    #[error("belief has zero mass")]
    ZeroMass,
    #[error("time must be positive, got {0}")]
    NonpositiveTime(f64),
    #[error("summaries are defined on different grids")]
    GridMismatch,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("insufficient reserves: {0}")]
    InsufficientReserves(String),
    #[error("belief ratio weight is identically zero")]
    DegenerateBelief,
    #[error("{:.3}% of the belief mass lies outside the price grid", .fraction * 100.0)]
    TruncationDominated { fraction: f64 },
    #[error("linear term admits no budget multiplier with positive stationarity denominators")]
    InfeasibleLinearTerm,
    #[error("insufficient samples: a visited state has only {min_visits} visits (need 100)")]
    InsufficientSamples { min_visits: u64 },
}
