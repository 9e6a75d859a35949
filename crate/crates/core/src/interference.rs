//! Two-beam interference per wavelength: fringes and their extrema,
//! visibility, which-path distinguishability, the duality inequality test,
//! the x4 output-port normalization, and selection of the analysis modes
//! A, B and E.
//!
//! The fringe law at the analyzed output port is
//! `I(lambda, phi) = I1 + I2 + 2 mu sqrt(I1 I2) cos(phi)`,
//! with `mu` the mode overlap of the interferometer (the maximum achievable
//! visibility for balanced arms). The complementary port carries the same
//! expression with the interference term negated, so the two ports always
//! sum to `I1 + I2`.

use crate::error::{Error, Result};
use crate::spectral::{trapezoid, SpectralDensity, SpectralGrid};

/// Wavelengths whose total power falls below this fraction of the global
/// maximum are excluded from visibility, distinguishability, and mode
/// selection: the defining ratios degenerate to 0/0 there.
pub const POWER_FLOOR_FRACTION: f64 = 1e-6;

/// Pass threshold for the duality inequality on exact simulated data.
pub const DUALITY_TOLERANCE: f64 = 1e-9;

/// Per-wavelength fringe data over a phase sweep.
#[derive(Debug, Clone)]
pub struct FringeScan {
    grid: SpectralGrid,
    phases: Vec<f64>,
    /// Row-major: `intensity[p * n_lambda + i]` is I(lambda_i, phi_p).
    intensity: Vec<f64>,
    mode_overlap: f64,
}

impl FringeScan {
    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn mode_overlap(&self) -> f64 {
        self.mode_overlap
    }

    /// Intensity at grid point `i` and phase index `p`.
    pub fn intensity(&self, i: usize, p: usize) -> f64 {
        self.intensity[p * self.grid.len() + i]
    }

    /// All intensities at one phase.
    pub fn at_phase(&self, p: usize) -> &[f64] {
        let n = self.grid.len();
        &self.intensity[p * n..(p + 1) * n]
    }
}

/// Uniform phase sweep covering one full period: `count` samples of
/// `2 pi k / count`. Even counts include both the constructive (0) and
/// destructive (pi) phases exactly.
pub fn phase_sweep(count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| 2.0 * std::f64::consts::PI * k as f64 / count as f64)
        .collect()
}

/// Simulate the analyzed-port fringe over a phase sweep.
pub fn simulate_fringes(
    arm1: &SpectralDensity,
    arm2: &SpectralDensity,
    mode_overlap: f64,
    phases: &[f64],
) -> Result<FringeScan> {
    arm1.check_same_grid(arm2)?;
    if !(0.0..=1.0).contains(&mode_overlap) {
        return Err(Error::InvalidModeOverlap(mode_overlap));
    }
    if phases.is_empty() {
        return Err(Error::EmptyPhases);
    }
    let n = arm1.len();
    let cross: Vec<f64> = arm1
        .values()
        .iter()
        .zip(arm2.values())
        .map(|(a, b)| 2.0 * mode_overlap * (a * b).sqrt())
        .collect();
    let mut intensity = Vec::with_capacity(n * phases.len());
    for phi in phases {
        let c = phi.cos();
        for i in 0..n {
            let v = arm1.values()[i] + arm2.values()[i] + cross[i] * c;
            // AM-GM guarantees nonnegativity; clamp the rounding dust.
            intensity.push(v.max(0.0));
        }
    }
    Ok(FringeScan {
        grid: *arm1.grid(),
        phases: phases.to_vec(),
        intensity,
        mode_overlap,
    })
}

impl FringeScan {
    /// The complementary output port: same arms, interference term negated.
    pub fn complementary_port(&self, arm1: &SpectralDensity, arm2: &SpectralDensity) -> Result<Self> {
        let flipped: Vec<f64> = self.phases.iter().map(|p| p + std::f64::consts::PI).collect();
        let mut scan = simulate_fringes(arm1, arm2, self.mode_overlap, &flipped)?;
        scan.phases = self.phases.clone();
        Ok(scan)
    }
}

/// Per-wavelength extrema of a sampled fringe scan: max and min over the
/// swept phases.
///
/// Exact whenever the sweep contains the phases 0 and pi (any even uniform
/// sweep from [`phase_sweep`] does); otherwise accurate to the sampling.
pub fn fringe_extrema(scan: &FringeScan) -> (SpectralDensity, SpectralDensity) {
    let n = scan.grid.len();
    let mut maxima = vec![f64::MIN; n];
    let mut minima = vec![f64::MAX; n];
    for p in 0..scan.phases.len() {
        let row = scan.at_phase(p);
        for i in 0..n {
            maxima[i] = maxima[i].max(row[i]);
            minima[i] = minima[i].min(row[i]);
        }
    }
    (
        SpectralDensity::new(scan.grid, maxima).expect("intensities are finite and nonnegative"),
        SpectralDensity::new(scan.grid, minima).expect("intensities are finite and nonnegative"),
    )
}

/// Closed-form fringe extrema for arbitrary mode overlap:
/// `I1 + I2 +- 2 mu sqrt(I1 I2)`.
pub fn modulated_extrema(
    arm1: &SpectralDensity,
    arm2: &SpectralDensity,
    mode_overlap: f64,
) -> Result<(SpectralDensity, SpectralDensity)> {
    arm1.check_same_grid(arm2)?;
    if !(0.0..=1.0).contains(&mode_overlap) {
        return Err(Error::InvalidModeOverlap(mode_overlap));
    }
    let mut maxima = Vec::with_capacity(arm1.len());
    let mut minima = Vec::with_capacity(arm1.len());
    for (a, b) in arm1.values().iter().zip(arm2.values()) {
        let cross = 2.0 * mode_overlap * (a * b).sqrt();
        maxima.push(a + b + cross);
        minima.push((a + b - cross).max(0.0));
    }
    Ok((
        SpectralDensity::new(*arm1.grid(), maxima)?,
        SpectralDensity::new(*arm1.grid(), minima)?,
    ))
}

/// Perfect-interference extrema `( sqrt(I1) +- sqrt(I2) )^2`, the pipeline
/// behind the theory rows of the power-density table. Works on simulated or
/// ingested arm spectra alike.
pub fn theory_extrema(
    arm1: &SpectralDensity,
    arm2: &SpectralDensity,
) -> Result<(SpectralDensity, SpectralDensity)> {
    modulated_extrema(arm1, arm2, 1.0)
}

/// A per-wavelength curve with an explicit defined/undefined mask.
///
/// Undefined points mark wavelengths with no usable light, not a value of
/// zero.
#[derive(Debug, Clone)]
pub struct MaskedCurve {
    grid: SpectralGrid,
    values: Vec<f64>,
    defined: Vec<bool>,
}

impl MaskedCurve {
    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    /// Value at grid index `i`, or `None` where the curve is undefined.
    pub fn value(&self, i: usize) -> Option<f64> {
        self.defined[i].then(|| self.values[i])
    }

    pub fn is_defined(&self, i: usize) -> bool {
        self.defined[i]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Iterator over `(lambda, value)` for the defined points.
    pub fn defined_points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.len()).filter_map(|i| self.value(i).map(|v| (self.grid.lambda(i), v)))
    }

    /// Raw values; meaningful only where defined.
    pub fn raw_values(&self) -> &[f64] {
        &self.values
    }
}

/// Fringe visibility `V = (Imax - Imin) / (Imax + Imin)` per wavelength.
///
/// Wavelengths where `Imax + Imin` falls below `floor_fraction` of its
/// global maximum are flagged undefined rather than computed.
pub fn visibility(
    i_max: &SpectralDensity,
    i_min: &SpectralDensity,
    floor_fraction: f64,
) -> Result<MaskedCurve> {
    i_max.check_same_grid(i_min)?;
    let mut totals = Vec::with_capacity(i_max.len());
    for (hi, lo) in i_max.values().iter().zip(i_min.values()) {
        if *lo > hi + 1e-12 * hi.abs().max(1.0) {
            return Err(Error::InvalidExtrema(format!("Imin {lo} exceeds Imax {hi}")));
        }
        totals.push(hi + lo);
    }
    let cap = totals.iter().cloned().fold(0.0, f64::max) * floor_fraction;
    let mut values = Vec::with_capacity(i_max.len());
    let mut defined = Vec::with_capacity(i_max.len());
    for ((hi, lo), total) in i_max.values().iter().zip(i_min.values()).zip(&totals) {
        if *total > cap && *total > 0.0 {
            values.push(((hi - lo) / total).clamp(0.0, 1.0));
            defined.push(true);
        } else {
            values.push(0.0);
            defined.push(false);
        }
    }
    Ok(MaskedCurve {
        grid: *i_max.grid(),
        values,
        defined,
    })
}

/// Which-path distinguishability `D = |I1 - I2| / (I1 + I2)` per wavelength,
/// with the same undefined-below-floor convention as [`visibility`].
pub fn distinguishability(
    arm1: &SpectralDensity,
    arm2: &SpectralDensity,
    floor_fraction: f64,
) -> Result<MaskedCurve> {
    arm1.check_same_grid(arm2)?;
    let totals: Vec<f64> = arm1
        .values()
        .iter()
        .zip(arm2.values())
        .map(|(a, b)| a + b)
        .collect();
    let cap = totals.iter().cloned().fold(0.0, f64::max) * floor_fraction;
    let mut values = Vec::with_capacity(arm1.len());
    let mut defined = Vec::with_capacity(arm1.len());
    for ((a, b), total) in arm1.values().iter().zip(arm2.values()).zip(&totals) {
        if *total > cap && *total > 0.0 {
            values.push(((a - b).abs() / total).clamp(0.0, 1.0));
            defined.push(true);
        } else {
            values.push(0.0);
            defined.push(false);
        }
    }
    Ok(MaskedCurve {
        grid: *arm1.grid(),
        values,
        defined,
    })
}

/// One evaluation of the duality inequality `V^2 + D^2 <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityRecord {
    pub v: f64,
    pub d: f64,
    pub sum_of_squares: f64,
    pub passes: bool,
}

/// Evaluate the duality inequality for one (V, D) pair.
pub fn egy_check(v: f64, d: f64) -> DualityRecord {
    let sum_of_squares = v * v + d * d;
    DualityRecord {
        v,
        d,
        sum_of_squares,
        passes: sum_of_squares <= 1.0 + DUALITY_TOLERANCE,
    }
}

/// Scalar normalization against the fixed reference arm.
///
/// The divisor is `4 x max(reference)`: with two balanced splitters only a
/// quarter of the input leaves the analyzed port when one arm is blocked, so
/// a fully transmitted single arm normalizes to 0.25 at its peak.
#[derive(Debug, Clone, Copy)]
pub struct Normalizer {
    divisor: f64,
}

impl Normalizer {
    pub fn new(reference_arm: &SpectralDensity) -> Result<Self> {
        let peak = reference_arm.peak();
        if peak <= 0.0 {
            return Err(Error::ZeroReference);
        }
        Ok(Self { divisor: 4.0 * peak })
    }

    pub fn divisor(&self) -> f64 {
        self.divisor
    }

    pub fn scalar(&self, detected: f64) -> f64 {
        detected / self.divisor
    }

    pub fn density(&self, detected: &SpectralDensity) -> SpectralDensity {
        detected
            .scaled(1.0 / self.divisor)
            .expect("divisor is positive")
    }
}

/// The three analysis wavelengths and their visibility/distinguishability
/// values. Mode E sits at the visibility maximum; modes A and B flank it on
/// the arm-1- and arm-2-dominated sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSelection {
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub lambda_e: f64,
    pub v_a: f64,
    pub v_b: f64,
    pub v_e: f64,
    pub d_a: f64,
    pub d_b: f64,
    pub d_e: f64,
    pub index_a: usize,
    pub index_b: usize,
    pub index_e: usize,
}

/// Options for [`select_modes`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ModeSelectOptions {
    /// Odd moving-average window (>= 3) applied to the residue envelope
    /// before the local-extremum comparison; `None` disables smoothing.
    pub smoothing_window: Option<usize>,
}

/// Locate the analysis modes from a visibility curve and the arm spectra.
///
/// Mode E is the visibility argmax over the defined region. Modes A and B
/// are the per-side peaks of the destructive-port residue envelope
/// `(I1 + I2)(1 - V)`, i.e. the wavelengths on either side of E where the
/// phase-independent which-path signal is strongest. On measured curves
/// those coincide with the flanking visibility minima; on clean synthetic
/// spectra, where visibility decays monotonically away from its maximum,
/// they land at the arm transmission peaks, reproducing the
/// fully-distinguishable 0.25/0.25 limit. Mode A is the candidate on the
/// arm-1-dominated side (I1 > I2), mode B the other; value ties break
/// toward the wavelength nearer E.
pub fn select_modes(
    v: &MaskedCurve,
    arm1: &SpectralDensity,
    arm2: &SpectralDensity,
    opts: ModeSelectOptions,
) -> Result<ModeSelection> {
    arm1.check_same_grid(arm2)?;
    let n = v.len();
    if n != arm1.len() {
        return Err(Error::GridMismatch(
            "visibility curve and arms differ in length".into(),
        ));
    }

    // Visibility argmax over the defined region.
    let mut index_e = None;
    let mut best = f64::MIN;
    for i in 0..n {
        if let Some(val) = v.value(i) {
            if val > best {
                best = val;
                index_e = Some(i);
            }
        }
    }
    let index_e =
        index_e.ok_or_else(|| Error::InsufficientStructure("no defined visibility".into()))?;

    // Destructive-port residue envelope; mu cancels out of the product.
    let mut envelope: Vec<f64> = (0..n)
        .map(|i| {
            let total = arm1.values()[i] + arm2.values()[i];
            match v.value(i) {
                Some(val) => total * (1.0 - val),
                None => 0.0,
            }
        })
        .collect();
    if let Some(w) = opts.smoothing_window {
        if w >= 3 && w % 2 == 1 {
            envelope = moving_average(&envelope, w);
        } else {
            return Err(Error::Config(format!(
                "smoothing window {w} must be an odd number >= 3"
            )));
        }
    }

    let candidate = |range: std::ops::Range<usize>| -> Option<usize> {
        let mut best: Option<usize> = None;
        for i in range {
            if i == 0 || i + 1 >= n {
                continue;
            }
            if !(v.is_defined(i - 1) && v.is_defined(i) && v.is_defined(i + 1)) {
                continue;
            }
            let (lo, mid, hi) = (envelope[i - 1], envelope[i], envelope[i + 1]);
            let is_peak = mid >= lo && mid >= hi && (mid > lo || mid > hi);
            if !is_peak {
                continue;
            }
            best = match best {
                None => Some(i),
                Some(j) => {
                    let tie = (envelope[i] - envelope[j]).abs()
                        <= 1e-12 * envelope[j].abs().max(f64::MIN_POSITIVE);
                    if envelope[i] > envelope[j] && !tie {
                        Some(i)
                    } else if tie && i.abs_diff(index_e) < j.abs_diff(index_e) {
                        Some(i)
                    } else {
                        Some(j)
                    }
                }
            };
        }
        best
    };

    let left = candidate(0..index_e);
    let right = candidate(index_e + 1..n);
    let (left, right) = match (left, right) {
        (Some(l), Some(r)) => (l, r),
        _ => {
            return Err(Error::InsufficientStructure(
                "fewer than two which-path residue peaks flank the visibility maximum".into(),
            ))
        }
    };

    // Mode A belongs to the arm-1-dominated side.
    let arm1_dominates = |i: usize| arm1.values()[i] > arm2.values()[i];
    let (index_a, index_b) = if arm1_dominates(right) && !arm1_dominates(left) {
        (right, left)
    } else if arm1_dominates(left) && !arm1_dominates(right) {
        (left, right)
    } else {
        return Err(Error::InsufficientStructure(
            "residue peaks do not separate the arms".into(),
        ));
    };

    let d = distinguishability(arm1, arm2, POWER_FLOOR_FRACTION)?;
    let pick = |i: usize| -> Result<(f64, f64)> {
        match (v.value(i), d.value(i)) {
            (Some(vv), Some(dd)) => Ok((vv, dd)),
            _ => Err(Error::InsufficientStructure(format!(
                "selected wavelength {} nm is below the power floor",
                v.grid().lambda(i)
            ))),
        }
    };
    let (v_a, d_a) = pick(index_a)?;
    let (v_b, d_b) = pick(index_b)?;
    let (v_e, d_e) = pick(index_e)?;

    Ok(ModeSelection {
        lambda_a: v.grid().lambda(index_a),
        lambda_b: v.grid().lambda(index_b),
        lambda_e: v.grid().lambda(index_e),
        v_a,
        v_b,
        v_e,
        d_a,
        d_b,
        d_e,
        index_a,
        index_b,
        index_e,
    })
}

fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    let n = values.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Integral of a density over the grid (trapezoid); convenience re-export
/// used by the binned analysis.
pub fn density_integral(d: &SpectralDensity) -> f64 {
    trapezoid(d.grid().step(), d.values())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{
        arm_spectrum, balance_arms, shift_filter, FilterProfile, SourceShape, SourceSpectrum,
    };
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn uniform_density(grid: SpectralGrid, value: f64) -> SpectralDensity {
        SpectralDensity::from_fn(grid, |_| value).unwrap()
    }

    fn gaussian_arms(grid: SpectralGrid, delta: f64) -> (SpectralDensity, SpectralDensity) {
        let f1 = FilterProfile::default_narrowband();
        let f2 = shift_filter(&f1, delta).unwrap();
        let a1 = SpectralDensity::from_fn(grid, |l| f1.transmission(l)).unwrap();
        let a2 = SpectralDensity::from_fn(grid, |l| f2.transmission(l)).unwrap();
        (a1, a2)
    }

    #[test]
    fn fringe_law_matches_examples() {
        let grid = SpectralGrid::new(820.0, 821.0, 0.5).unwrap();
        let a = uniform_density(grid, 0.25);
        let b = uniform_density(grid, 0.25);
        let zero = uniform_density(grid, 0.0);

        // perfect destructive interference
        let scan = simulate_fringes(&a, &b, 1.0, &[std::f64::consts::PI]).unwrap();
        assert_abs_diff_eq!(scan.intensity(0, 0), 0.0, epsilon = 1e-15);

        // single arm: no interference term
        let scan = simulate_fringes(&a, &zero, 0.7, &[0.3]).unwrap();
        assert_abs_diff_eq!(scan.intensity(1, 0), 0.25, epsilon = 1e-15);

        // the ~98% visibility floor
        let scan = simulate_fringes(&a, &b, 0.98, &[std::f64::consts::PI]).unwrap();
        assert_abs_diff_eq!(scan.intensity(0, 0), 0.01, epsilon = 1e-12);
    }

    #[test]
    fn fringe_rejects_bad_inputs() {
        let grid = SpectralGrid::new(820.0, 821.0, 0.5).unwrap();
        let other = SpectralGrid::new(820.0, 821.0, 0.25).unwrap();
        let a = uniform_density(grid, 0.25);
        let b = uniform_density(other, 0.25);
        assert!(matches!(
            simulate_fringes(&a, &b, 1.0, &[0.0]),
            Err(Error::GridMismatch(_))
        ));
        let b = uniform_density(grid, 0.25);
        assert!(matches!(
            simulate_fringes(&a, &b, 1.5, &[0.0]),
            Err(Error::InvalidModeOverlap(_))
        ));
        assert!(matches!(
            simulate_fringes(&a, &b, 1.0, &[]),
            Err(Error::EmptyPhases)
        ));
    }

    #[test]
    fn extrema_match_closed_forms() {
        let grid = SpectralGrid::new(820.0, 821.0, 0.5).unwrap();
        let a = uniform_density(grid, 0.2);
        let b = uniform_density(grid, 0.05);
        let scan = simulate_fringes(&a, &b, 1.0, &phase_sweep(64)).unwrap();
        let (hi, lo) = fringe_extrema(&scan);
        // (sqrt 0.2 + sqrt 0.05)^2 = 0.45, (sqrt 0.2 - sqrt 0.05)^2 = 0.05
        assert_relative_eq!(hi.values()[0], 0.45, epsilon = 1e-12);
        assert_relative_eq!(lo.values()[0], 0.05, epsilon = 1e-12);

        let (thi, tlo) = theory_extrema(&a, &b).unwrap();
        assert_relative_eq!(thi.values()[1], 0.45, epsilon = 1e-15);
        assert_relative_eq!(tlo.values()[1], 0.05, epsilon = 1e-15);
    }

    #[test]
    fn extrema_equal_amplitude_and_single_arm_limits() {
        let grid = SpectralGrid::new(820.0, 821.0, 0.5).unwrap();
        let a = uniform_density(grid, 0.25);
        let b = uniform_density(grid, 0.25);
        let (hi, lo) = theory_extrema(&a, &b).unwrap();
        assert_abs_diff_eq!(hi.values()[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(lo.values()[0], 0.0, epsilon = 1e-15);

        let zero = uniform_density(grid, 0.0);
        let scan = simulate_fringes(&a, &zero, 1.0, &phase_sweep(16)).unwrap();
        let (hi, lo) = fringe_extrema(&scan);
        assert_abs_diff_eq!(hi.values()[0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(lo.values()[0], 0.25, epsilon = 1e-15);
    }

    #[test]
    fn sampled_extrema_agree_with_theory_on_gaussian_arms() {
        let grid = SpectralGrid::default_scan();
        let (a1, a2) = gaussian_arms(grid, 4.9);
        let scan = simulate_fringes(&a1, &a2, 1.0, &phase_sweep(64)).unwrap();
        let (shi, slo) = fringe_extrema(&scan);
        let (thi, tlo) = theory_extrema(&a1, &a2).unwrap();
        for i in 0..grid.len() {
            assert_relative_eq!(shi.values()[i], thi.values()[i], max_relative = 1e-12);
            assert_abs_diff_eq!(
                slo.values()[i],
                tlo.values()[i],
                epsilon = 1e-12 * thi.values()[i].max(1e-300)
            );
        }
    }

    #[test]
    fn visibility_matches_table_values() {
        let grid = SpectralGrid::new(820.0, 821.0, 0.5).unwrap();
        let hi = uniform_density(grid, 0.902);
        let lo = uniform_density(grid, 0.014);
        let v = visibility(&hi, &lo, POWER_FLOOR_FRACTION).unwrap();
        assert_abs_diff_eq!(v.value(0).unwrap(), 0.9694323144104804, epsilon = 1e-12);
        assert!((v.value(0).unwrap() - 0.97).abs() < 0.01);

        let flat = visibility(&hi, &hi, POWER_FLOOR_FRACTION).unwrap();
        assert_abs_diff_eq!(flat.value(0).unwrap(), 0.0, epsilon = 1e-15);

        let one = uniform_density(grid, 1.0);
        let zero = uniform_density(grid, 0.0);
        let perfect = visibility(&one, &zero, POWER_FLOOR_FRACTION).unwrap();
        assert_abs_diff_eq!(perfect.value(0).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn visibility_flags_dark_wavelengths_undefined() {
        let grid = SpectralGrid::new(820.0, 822.0, 0.5).unwrap();
        let hi = SpectralDensity::new(grid, vec![1.0, 1e-9, 1.0, 1.0, 1.0]).unwrap();
        let lo = SpectralDensity::new(grid, vec![0.1, 0.0, 0.1, 0.1, 0.1]).unwrap();
        let v = visibility(&hi, &lo, POWER_FLOOR_FRACTION).unwrap();
        assert!(v.is_defined(0));
        assert!(!v.is_defined(1), "dark point must be undefined, not zero");
        assert!(matches!(
            visibility(&lo, &hi, POWER_FLOOR_FRACTION),
            Err(Error::InvalidExtrema(_))
        ));
    }

    #[test]
    fn distinguishability_limits() {
        let grid = SpectralGrid::new(820.0, 821.0, 0.5).unwrap();
        let a = uniform_density(grid, 0.4);
        let zero = uniform_density(grid, 0.0);
        let d = distinguishability(&a, &a, POWER_FLOOR_FRACTION).unwrap();
        assert_abs_diff_eq!(d.value(0).unwrap(), 0.0, epsilon = 1e-15);
        let d = distinguishability(&a, &zero, POWER_FLOOR_FRACTION).unwrap();
        assert_abs_diff_eq!(d.value(0).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn distinguishability_at_residue_peak_matches_table() {
        // gaussian arms, fwhm 3 nm, shift 4.9 nm: D at the selected mode-A
        // wavelength reaches the 0.99 reported for that rotation
        let grid = SpectralGrid::default_scan();
        let (a1, a2) = gaussian_arms(grid, 4.9);
        let (hi, lo) = modulated_extrema(&a1, &a2, 0.98).unwrap();
        let v = visibility(&hi, &lo, POWER_FLOOR_FRACTION).unwrap();
        let modes = select_modes(&v, &a1, &a2, ModeSelectOptions::default()).unwrap();
        assert!(modes.d_a >= 0.99, "D_A = {}", modes.d_a);
        assert!(modes.d_b >= 0.99, "D_B = {}", modes.d_b);
    }

    #[test]
    fn egy_check_examples() {
        let r = egy_check(0.71, 0.66);
        assert_abs_diff_eq!(r.sum_of_squares, 0.9397, epsilon = 1e-12);
        assert!(r.passes);

        let r = egy_check(1.0, 0.0);
        assert_abs_diff_eq!(r.sum_of_squares, 1.0, epsilon = 1e-15);
        assert!(r.passes, "boundary case must pass");

        let r = egy_check(0.9, 0.9);
        assert!(!r.passes);
    }

    #[test]
    fn duality_saturates_for_unit_overlap() {
        // V = 2 sqrt(I1 I2)/(I1+I2), D = |I1-I2|/(I1+I2) sum to one in
        // quadrature for any positive pair; checked over a deterministic
        // pseudo-random sample.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1000 {
            let i1 = 1e-6 + next();
            let i2 = 1e-6 + next();
            let v = 2.0 * (i1 * i2).sqrt() / (i1 + i2);
            let d = (i1 - i2).abs() / (i1 + i2);
            let r = egy_check(v, d);
            assert_abs_diff_eq!(r.sum_of_squares, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn normalizer_follows_quarter_convention() {
        let grid = SpectralGrid::new(820.0, 821.0, 0.5).unwrap();
        let reference = SpectralDensity::new(grid, vec![0.3, 0.8, 0.5]).unwrap();
        let norm = Normalizer::new(&reference).unwrap();
        assert_abs_diff_eq!(norm.scalar(4.0 * 0.8), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(norm.scalar(0.0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(norm.scalar(0.8), 0.25, epsilon = 1e-15);

        let zero = SpectralDensity::new(grid, vec![0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(Normalizer::new(&zero), Err(Error::ZeroReference)));
    }

    #[test]
    fn fully_distinguishable_destructive_port_quarters() {
        // shift far beyond the bandwidth: the residue at each arm peak
        // normalizes to ~0.25
        let grid = SpectralGrid::default_scan();
        let (a1, a2) = gaussian_arms(grid, 9.0);
        let (_, lo) = theory_extrema(&a1, &a2).unwrap();
        let norm = Normalizer::new(&a1).unwrap();
        let lo_n = norm.density(&lo);
        let at_826 = grid.nearest_index(826.0).unwrap();
        assert_abs_diff_eq!(lo_n.values()[at_826], 0.25, epsilon = 0.01);
    }

    #[test]
    fn select_modes_symmetric_midpoint() {
        // grid step chosen so the midpoint 823.55 is on-grid
        let grid = SpectralGrid::new(815.0, 835.0, 0.05).unwrap();
        let (a1, a2) = gaussian_arms(grid, 4.9);
        let (hi, lo) = modulated_extrema(&a1, &a2, 0.98).unwrap();
        let v = visibility(&hi, &lo, POWER_FLOOR_FRACTION).unwrap();
        let modes = select_modes(&v, &a1, &a2, ModeSelectOptions::default()).unwrap();
        assert_abs_diff_eq!(modes.lambda_e, 823.55, epsilon = 1e-9);
        assert!(modes.lambda_b < modes.lambda_e && modes.lambda_e < modes.lambda_a);
    }

    #[test]
    fn select_modes_identical_arms_errors() {
        let grid = SpectralGrid::default_scan();
        let (a1, _) = gaussian_arms(grid, 0.0);
        let a2 = a1.clone();
        let (hi, lo) = modulated_extrema(&a1, &a2, 0.98).unwrap();
        let v = visibility(&hi, &lo, POWER_FLOOR_FRACTION).unwrap();
        assert!(matches!(
            select_modes(&v, &a1, &a2, ModeSelectOptions::default()),
            Err(Error::InsufficientStructure(_))
        ));
    }

    #[test]
    fn select_modes_brackets_with_high_distinguishability() {
        // dense-grid closed-form oracle for the residue peaks, compared with
        // the implementation on the same grid
        let grid = SpectralGrid::new(815.0, 835.0, 0.01).unwrap();
        let (a1, a2) = gaussian_arms(grid, 4.9);
        let mu = 1.0;
        let (hi, lo) = modulated_extrema(&a1, &a2, mu).unwrap();
        let v = visibility(&hi, &lo, POWER_FLOOR_FRACTION).unwrap();
        let modes = select_modes(&v, &a1, &a2, ModeSelectOptions::default()).unwrap();

        // oracle: brute-force argmax of I1+I2-2 sqrt(I1 I2) on each side of
        // the closed-form visibility maximum
        let f1 = FilterProfile::default_narrowband();
        let f2 = shift_filter(&f1, 4.9).unwrap();
        let residue = |l: f64| {
            let (i1, i2) = (f1.transmission(l), f2.transmission(l));
            i1 + i2 - 2.0 * mu * (i1 * i2).sqrt()
        };
        let mid = 826.0 - 4.9 / 2.0;
        let mut best_right = (f64::MIN, 0.0);
        let mut best_left = (f64::MIN, 0.0);
        let mut l = 815.0;
        while l <= 835.0 {
            let r = residue(l);
            if l > mid && r > best_right.0 {
                best_right = (r, l);
            }
            if l < mid && r > best_left.0 {
                best_left = (r, l);
            }
            l += 0.001;
        }
        assert_abs_diff_eq!(modes.lambda_a, best_right.1, epsilon = 0.02);
        assert_abs_diff_eq!(modes.lambda_b, best_left.1, epsilon = 0.02);
        assert!(modes.d_a >= 0.9 && modes.d_b >= 0.9);
        assert!(modes.lambda_b < modes.lambda_e && modes.lambda_e < modes.lambda_a);
    }

    #[test]
    fn energy_conservation_across_ports() {
        // I1 and I2 are per-port single-arm densities (a quarter of the
        // input each for balanced splitters), so the two output ports
        // together carry 2(I1 + I2) -- the full throughput -- at every
        // phase. At the constructive phase one port alone holds all of it.
        let grid = SpectralGrid::default_scan();
        let source = SourceSpectrum::new(826.0, 10.0, 1.0, SourceShape::Gaussian).unwrap();
        let f1 = FilterProfile::default_narrowband();
        let f2 = shift_filter(&f1, 2.4).unwrap();
        let a1 = arm_spectrum(&source, &f1, grid);
        let a2 = arm_spectrum(&source, &f2, grid);
        let (b1, b2) = balance_arms(&a1, &a2).unwrap();
        let phases = phase_sweep(64);
        let port1 = simulate_fringes(&b1, &b2, 0.98, &phases).unwrap();
        let port2 = port1.complementary_port(&b1, &b2).unwrap();
        for p in 0..phases.len() {
            for i in 0..grid.len() {
                let throughput = 2.0 * (b1.values()[i] + b2.values()[i]);
                let sum = port1.intensity(i, p) + port2.intensity(i, p);
                assert_abs_diff_eq!(sum, throughput, epsilon = 1e-9 * throughput.max(1e-300));
            }
        }
        // and all of it exits port 1 at the constructive phase for mu = 1
        let perfect = simulate_fringes(&b1, &b2, 1.0, &[0.0]).unwrap();
        for i in 0..grid.len() {
            let (x, y) = (b1.values()[i], b2.values()[i]);
            if x > 0.0 && (x - y).abs() < 1e-12 * x {
                assert_abs_diff_eq!(
                    perfect.intensity(i, 0),
                    2.0 * (x + y),
                    epsilon = 1e-9 * (x + y)
                );
            }
        }
    }

    #[test]
    fn normalization_scale_invariance() {
        let grid = SpectralGrid::default_scan();
        let (a1, a2) = gaussian_arms(grid, 4.9);
        let k = 37.5;
        let (s1, s2) = (a1.scaled(k).unwrap(), a2.scaled(k).unwrap());

        let run = |x1: &SpectralDensity, x2: &SpectralDensity| {
            let (hi, lo) = modulated_extrema(x1, x2, 0.98).unwrap();
            let v = visibility(&hi, &lo, POWER_FLOOR_FRACTION).unwrap();
            let modes = select_modes(&v, x1, x2, ModeSelectOptions::default()).unwrap();
            let norm = Normalizer::new(x1).unwrap();
            let lo_n = norm.density(&lo);
            (modes, lo_n.values()[modes.index_a])
        };
        let (m0, r0) = run(&a1, &a2);
        let (m1, r1) = run(&s1, &s2);
        assert_eq!(m0.index_a, m1.index_a);
        assert_eq!(m0.index_b, m1.index_b);
        assert_eq!(m0.index_e, m1.index_e);
        assert_relative_eq!(m0.v_a, m1.v_a, max_relative = 1e-12);
        assert_relative_eq!(m0.d_a, m1.d_a, max_relative = 1e-12);
        assert_relative_eq!(r0, r1, max_relative = 1e-12);
    }

    #[test]
    fn visibility_at_fixed_wavelength_decreases_with_shift() {
        // fix the mode-A wavelength of the 6.5 nm geometry, then widen the
        // filter separation: V there must fall strictly
        let grid = SpectralGrid::default_scan();
        let (a1_65, a2_65) = gaussian_arms(grid, 6.5);
        let (hi, lo) = modulated_extrema(&a1_65, &a2_65, 0.98).unwrap();
        let v65 = visibility(&hi, &lo, POWER_FLOOR_FRACTION).unwrap();
        let modes = select_modes(&v65, &a1_65, &a2_65, ModeSelectOptions::default()).unwrap();
        let ia = modes.index_a;

        let mut previous = f64::MAX;
        for delta in [1.4, 2.4, 4.9, 6.5] {
            let (a1, a2) = gaussian_arms(grid, delta);
            let (hi, lo) = modulated_extrema(&a1, &a2, 0.98).unwrap();
            let v = visibility(&hi, &lo, POWER_FLOOR_FRACTION).unwrap();
            let val = v.value(ia).unwrap();
            assert!(val < previous, "V({delta}) = {val} not below {previous}");
            previous = val;
        }
    }
}
