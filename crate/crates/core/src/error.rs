//! Error types shared across the toolkit.

use thiserror::Error;

/// Everything that can go wrong when building spectra, running scans, or
/// simulating the time-domain detection.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid filter profile: {0}")]
    InvalidFilter(String),

    #[error("invalid source spectrum: {0}")]
    InvalidSource(String),

    #[error("negative filter shift {0} nm; the rotation only shifts toward shorter wavelengths")]
    NegativeShift(f64),

    #[error("incompatible spectra: grids differ ({0})")]
    GridMismatch(String),

    #[error("mode overlap {0} outside [0, 1]")]
    InvalidModeOverlap(f64),

    #[error("phase list is empty")]
    EmptyPhases,

    #[error("extrema are inconsistent: {0}")]
    InvalidExtrema(String),

    #[error("reference arm has no power; cannot normalize")]
    ZeroReference,

    #[error("insufficient distinguishability structure: {0}")]
    InsufficientStructure(String),

    #[error("no constructive power to normalize the binned integrals")]
    ZeroConstructivePower,

    #[error("split wavelength {0} nm lies outside the grid")]
    SplitOutsideGrid(f64),

    #[error("invalid interferometer config: {0}")]
    InvalidInterferometer(String),

    #[error("sample rate {rate} Hz violates Nyquist for mirror frequency {freq} Hz")]
    NyquistViolation { rate: f64, freq: f64 },

    #[error("duration {duration} s is not an integer number of periods of {freq} Hz")]
    IncommensurateDuration { duration: f64, freq: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code class: 1 for physics/degeneracy failures, 2 for
    /// input/parse failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse { .. } | Error::Io { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
