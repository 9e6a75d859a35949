//! Spectrally-resolved which-path analysis for Mach-Zehnder interferometers.
//!
//! The toolkit models a two-arm interferometer whose arms carry
//! narrow-band filters with a tunable spectral separation. Per wavelength it
//! computes interference fringes, their extrema, fringe visibility V and
//! which-path distinguishability D, and checks the duality bound
//! `V^2 + D^2 <= 1`. A binned analysis integrates the destructive-port
//! spectrum on either side of the balance wavelength and shows how the
//! difference of the two bins discards the which-path information the
//! spectra plainly carry. A companion time-domain simulation reconstructs
//! the quad-cell harmonic detection of beams marked by vibrating mirrors,
//! where the same subtraction effect appears.
//!
//! The `specmzi` binary exposes the pipelines as `scan`, `table`, `bins`,
//! `danan`, and `ingest` subcommands emitting plot-ready CSV.

pub mod bins;
pub mod cli;
pub mod config;
pub mod error;
pub mod interference;
pub mod pipeline;
pub mod report;
pub mod spectral;
pub mod timesim;

pub use error::{Error, Result};
