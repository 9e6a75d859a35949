//! End-to-end chains shared by the CLI commands: arm spectra for one filter
//! separation, fringe extrema, normalization, mode selection, duality rows,
//! and the binned destructive-port powers.

use crate::bins::{bin_powers, BinnedPowers};
use crate::config::RunConfig;
use crate::error::Result;
use crate::interference::{
    distinguishability, egy_check, modulated_extrema, select_modes, visibility, MaskedCurve,
    ModeSelectOptions, ModeSelection, Normalizer, POWER_FLOOR_FRACTION,
};
use crate::spectral::{arm_spectrum, balance_arms, shift_filter, SpectralDensity};

/// Everything derived from one filter separation.
#[derive(Debug, Clone)]
pub struct SettingScan {
    pub delta_lambda: f64,
    pub arm1: SpectralDensity,
    pub arm2: SpectralDensity,
    /// Normalized fringe extrema (divided by four times the reference-arm
    /// peak).
    pub i_max: SpectralDensity,
    pub i_min: SpectralDensity,
    pub v: MaskedCurve,
    pub d: MaskedCurve,
    pub modes: ModeSelection,
    pub mode_overlap: f64,
}

/// Arm spectra for one separation: the second filter is blue-shifted by
/// `delta_lambda`, both filters act on the configured source, and the
/// stronger arm is attenuated to the weaker one's peak when balancing is on.
pub fn arm_pair(
    config: &RunConfig,
    delta_lambda: f64,
) -> Result<(SpectralDensity, SpectralDensity)> {
    let grid = config.grid()?;
    let source = config.source()?;
    let f1 = config.filter1.profile()?;
    let f2 = shift_filter(&config.filter2.profile()?, delta_lambda)?;
    let a1 = arm_spectrum(&source, &f1, grid);
    let a2 = arm_spectrum(&source, &f2, grid);
    if config.balance {
        balance_arms(&a1, &a2)
    } else {
        Ok((a1, a2))
    }
}

/// Run the analysis chain on prepared arm spectra.
pub fn scan_from_arms(
    arm1: SpectralDensity,
    arm2: SpectralDensity,
    mode_overlap: f64,
    smoothing: usize,
    delta_lambda: f64,
) -> Result<SettingScan> {
    let (i_max, i_min) = modulated_extrema(&arm1, &arm2, mode_overlap)?;
    let norm = Normalizer::new(&arm1)?;
    let i_max = norm.density(&i_max);
    let i_min = norm.density(&i_min);
    let v = visibility(&i_max, &i_min, POWER_FLOOR_FRACTION)?;
    let d = distinguishability(&arm1, &arm2, POWER_FLOOR_FRACTION)?;
    let opts = ModeSelectOptions {
        smoothing_window: (smoothing >= 3).then_some(smoothing),
    };
    let modes = select_modes(&v, &arm1, &arm2, opts)?;
    Ok(SettingScan {
        delta_lambda,
        arm1,
        arm2,
        i_max,
        i_min,
        v,
        d,
        modes,
        mode_overlap,
    })
}

/// Full chain for one configured separation.
pub fn scan_setting(config: &RunConfig, delta_lambda: f64) -> Result<SettingScan> {
    let (arm1, arm2) = arm_pair(config, delta_lambda)?;
    scan_from_arms(
        arm1,
        arm2,
        config.mode_overlap,
        config.smoothing,
        delta_lambda,
    )
}

/// Bin the normalized destructive-port spectrum at the mode-E wavelength.
pub fn bins_for_scan(scan: &SettingScan) -> Result<BinnedPowers> {
    bin_powers(
        &scan.i_min,
        &scan.i_max,
        scan.modes.lambda_e,
        scan.delta_lambda,
    )
}

/// One row of the power-density / duality tables.
#[derive(Debug, Clone, Copy)]
pub struct ModeRow {
    pub delta_lambda: f64,
    pub mode: char,
    pub lambda: f64,
    pub i_max: f64,
    pub i_min: f64,
    pub v: f64,
    pub d: f64,
    pub v2_plus_d2: f64,
}

impl SettingScan {
    /// Rows for modes A, B and E, in that order.
    pub fn mode_rows(&self) -> [ModeRow; 3] {
        let row = |mode: char, idx: usize, lambda: f64, v: f64, d: f64| ModeRow {
            delta_lambda: self.delta_lambda,
            mode,
            lambda,
            i_max: self.i_max.values()[idx],
            i_min: self.i_min.values()[idx],
            v,
            d,
            v2_plus_d2: egy_check(v, d).sum_of_squares,
        };
        let m = &self.modes;
        [
            row('A', m.index_a, m.lambda_a, m.v_a, m.d_a),
            row('B', m.index_b, m.lambda_b, m.v_b, m.d_b),
            row('E', m.index_e, m.lambda_e, m.v_e, m.d_e),
        ]
    }
}
