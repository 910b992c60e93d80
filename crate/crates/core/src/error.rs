use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("index {index} overflows 64-bit exponent arithmetic (N + k - 1 must stay below 63)")]
    Overflow { index: u32 },
    #[error("schedule check failed: {0}")]
    Schedule(String),
    #[error(
        "schedule depth {k_max} is infeasible: n_(K+1) = {n_next} exceeds the sampling cap {cap}"
    )]
    Feasibility { k_max: u32, n_next: u64, cap: u64 },
    #[error("index {k} outside 1..={k_max}")]
    Index { k: u32, k_max: u32 },
    #[error("point with log|z| = {log_abs:.6e} lies outside the certified range (log bound {bound:.6e})")]
    OutOfRange { log_abs: f64, bound: f64 },
    #[error("phase precision lost (accumulated phase error {phase_err:.3e} rad)")]
    PrecisionLoss { phase_err: f64 },
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("need at least {needed} scale points, got {got}")]
    InsufficientScales { needed: usize, got: usize },
    #[error("no sign change of the growth exponent over the tested exponents")]
    NoBracket,
    #[error("target dimension {target} is outside the attainable range [{lo:.4}, {hi:.4}] on the real cardioid ray")]
    Unreachable { target: f64, lo: f64, hi: f64 },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("format error: {0}")]
    Format(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
