//! Error type shared by every module of the laboratory.

use std::path::PathBuf;

/// Errors raised by profile construction, the solver, the diagnostics and the lab runner.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("overlapping profiles: {0}")]
    Overlap(String),
    #[error("domain too small: {0}")]
    Domain(String),
    #[error("blow-up at t = {t}: max|u| = {max_abs}")]
    Blowup { t: f64, max_abs: f64 },
    #[error("operation requires p = {expected}, field has p = {found}")]
    WrongExponent { expected: u32, found: u32 },
    #[error("kappa = {kappa} outside (0, {upper})")]
    KappaRange { kappa: f64, upper: f64 },
    #[error("non-positive value {value} at sample {index}")]
    NonPositiveValue { index: usize, value: f64 },
    #[error("spectral tail holds {fraction:e} of the derivative energy")]
    SpectralTail { fraction: f64 },
    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("separation violated: {0}")]
    Separation(String),
    #[error("H1 distance {distance:e} to the guessed profiles exceeds the cap {cap:e}")]
    Closeness { distance: f64, cap: f64 },
    #[error("fitted speed {0} is not positive")]
    SpeedRange(f64),
    #[error("potential does not decay at the domain edges: {0:e}")]
    Decay(f64),
    #[error("unresolved spectrum: {0}")]
    UnresolvedSpectrum(String),
    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("config error: {0}")]
    Config(String),
    #[error("io error on {path:?}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("format error: {0}")]
    Format(String),
    #[error("diagnostic failed: {0}")]
    Diagnostic(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }
}
