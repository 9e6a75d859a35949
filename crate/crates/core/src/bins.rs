//! Emulation of the quad-cell harmonic method on spectra: split the
//! destructive-port spectrum at the mode-E wavelength, integrate each side
//! into P+ and P-, form their difference, and accumulate across a sweep of
//! filter separations.
//!
//! The subtraction is the point: P+ and P- individually grow with the
//! spectral distance of the filters (the which-path signal), while their
//! difference stays near zero for symmetric arms, discarding exactly the
//! information the spectrally resolved detection keeps.

use crate::error::{Error, Result};
use crate::spectral::SpectralDensity;

/// Arm tails above this fraction of the arm peak at the grid edges mean the
/// finite-domain integrals visibly truncate the idealized 0..infinity ones.
pub const TRUNCATION_FRACTION: f64 = 1e-9;

/// Binned destructive-port powers for one filter separation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinnedPowers {
    pub delta_lambda: f64,
    /// Split wavelength (mode E).
    pub lambda_s: f64,
    pub p_plus: f64,
    pub p_minus: f64,
    pub delta_p: f64,
    /// True when an arm density at a grid edge exceeded
    /// [`TRUNCATION_FRACTION`] of its peak.
    pub truncated: bool,
}

/// Integrate the destructive-port minima on each side of `lambda_s`,
/// normalized by the full constructive integral.
///
/// Trapezoidal quadrature on the native grid. When `lambda_s` coincides with
/// a grid point that point's weight splits half to each bin; otherwise the
/// straddling cell is cut by its chord at `lambda_s`, which preserves the
/// total exactly.
pub fn bin_powers(
    i_min: &SpectralDensity,
    i_max: &SpectralDensity,
    lambda_s: f64,
    delta_lambda: f64,
) -> Result<BinnedPowers> {
    i_min.check_same_grid(i_max)?;
    let grid = i_min.grid();
    if lambda_s < grid.lambda_min() || lambda_s > grid.lambda_max() {
        return Err(Error::SplitOutsideGrid(lambda_s));
    }
    let h = grid.step();
    let total = crate::spectral::trapezoid(h, i_max.values());
    let floor = i_max.peak() * f64::MIN_POSITIVE.max(1e-300);
    if total <= floor || total == 0.0 {
        return Err(Error::ZeroConstructivePower);
    }

    let values = i_min.values();
    let n = values.len();
    // index of the last grid point at or below lambda_s
    let pos = (lambda_s - grid.lambda_min()) / h;
    let j = (pos.floor() as usize).min(n - 1);
    let frac = pos - j as f64;

    let mut left = 0.0;
    for i in 0..j {
        left += 0.5 * h * (values[i] + values[i + 1]);
    }
    let mut right = 0.0;
    for i in (j + 1)..n - 1 {
        right += 0.5 * h * (values[i] + values[i + 1]);
    }
    const NODE_SNAP: f64 = 1e-9;
    if frac.abs() <= NODE_SNAP {
        // on-node split: the half-cell weights of the trapezoid rule land
        // half in each bin automatically
        if j + 1 < n {
            right += 0.5 * h * (values[j] + values[j + 1]);
        }
    } else if j + 1 < n {
        let chord = values[j] + frac * (values[j + 1] - values[j]);
        left += 0.5 * (frac * h) * (values[j] + chord);
        right += 0.5 * ((1.0 - frac) * h) * (chord + values[j + 1]);
    }

    let truncated = {
        let cap = TRUNCATION_FRACTION * i_min.peak().max(i_max.peak());
        let hi = i_max.values();
        values[0] > cap || values[n - 1] > cap || hi[0] > cap || hi[n - 1] > cap
    };

    let p_plus = left / total;
    let p_minus = right / total;
    Ok(BinnedPowers {
        delta_lambda,
        lambda_s,
        p_plus,
        p_minus,
        delta_p: p_plus - p_minus,
        truncated,
    })
}

/// One sweep entry: either a binned record or the reason that separation was
/// skipped.
#[derive(Debug, Clone)]
pub enum SweepEntry {
    Ok(BinnedPowers),
    Skipped { delta_lambda: f64, reason: String },
}

/// Aggregate of a sweep across filter separations.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub entries: Vec<SweepEntry>,
    /// Arithmetic means of P+, P- and of the per-setting differences over
    /// the settings that ran.
    pub mean_p_plus: f64,
    pub mean_p_minus: f64,
    /// Mean of per-setting delta P values.
    pub mean_delta_p: f64,
    /// Difference of the means; equals `mean_delta_p` whenever every
    /// setting contributes both bins, reported separately because the two
    /// reductions are quoted separately in practice.
    pub diff_of_means: f64,
}

/// Run `compute` for every separation, collecting per-setting records and
/// the sweep means. Mode-selection failures skip that setting with a
/// warning entry instead of aborting the sweep.
pub fn sweep_accumulate(
    settings: &[f64],
    mut compute: impl FnMut(f64) -> Result<BinnedPowers>,
) -> Result<SweepOutcome> {
    if settings.is_empty() {
        return Err(Error::Config("empty sweep: no filter separations".into()));
    }
    let mut entries = Vec::with_capacity(settings.len());
    let mut sums = (0.0, 0.0, 0.0);
    let mut ran = 0usize;
    for &delta in settings {
        match compute(delta) {
            Ok(record) => {
                sums.0 += record.p_plus;
                sums.1 += record.p_minus;
                sums.2 += record.delta_p;
                ran += 1;
                entries.push(SweepEntry::Ok(record));
            }
            Err(e @ Error::InsufficientStructure(_)) => {
                entries.push(SweepEntry::Skipped {
                    delta_lambda: delta,
                    reason: e.to_string(),
                });
            }
            Err(other) => return Err(other),
        }
    }
    if ran == 0 {
        return Err(Error::InsufficientStructure(
            "every sweep setting failed mode selection".into(),
        ));
    }
    let k = ran as f64;
    Ok(SweepOutcome {
        entries,
        mean_p_plus: sums.0 / k,
        mean_p_minus: sums.1 / k,
        mean_delta_p: sums.2 / k,
        diff_of_means: sums.0 / k - sums.1 / k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interference::{modulated_extrema, theory_extrema};
    use crate::spectral::{shift_filter, FilterProfile, SpectralDensity, SpectralGrid};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn symmetric_arms(
        grid: SpectralGrid,
        delta: f64,
    ) -> (SpectralDensity, SpectralDensity) {
        let f1 = FilterProfile::default_narrowband();
        let f2 = shift_filter(&f1, delta).unwrap();
        (
            SpectralDensity::from_fn(grid, |l| f1.transmission(l)).unwrap(),
            SpectralDensity::from_fn(grid, |l| f2.transmission(l)).unwrap(),
        )
    }

    #[test]
    fn identical_arms_bin_to_zero() {
        let grid = SpectralGrid::new(805.0, 845.0, 0.05).unwrap();
        let (a1, _) = symmetric_arms(grid, 0.0);
        let a2 = a1.clone();
        let (hi, lo) = theory_extrema(&a1, &a2).unwrap();
        let b = bin_powers(&lo, &hi, 826.0, 0.0).unwrap();
        assert_abs_diff_eq!(b.p_plus, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.p_minus, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.delta_p, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn symmetric_midpoint_split_balances() {
        // frozen against a brute-force trapezoid oracle at 10x resolution
        // (and a 100x-resolution numpy cross-check): fwhm-3 arms at 6.5 nm
        // separation, unit overlap, split at the symmetry midpoint
        let grid = SpectralGrid::new(805.0, 845.0, 0.05).unwrap();
        let (a1, a2) = symmetric_arms(grid, 6.5);
        let (hi, lo) = theory_extrema(&a1, &a2).unwrap();
        let b = bin_powers(&lo, &hi, 826.0 - 6.5 / 2.0, 6.5).unwrap();
        assert_abs_diff_eq!(b.delta_p, 0.0, epsilon = 1e-12);
        assert_relative_eq!(b.p_plus, b.p_minus, max_relative = 1e-12);

        // oracle on the same closed forms at 10x resolution
        let fine = SpectralGrid::new(805.0, 845.0, 0.005).unwrap();
        let (f1, f2) = symmetric_arms(fine, 6.5);
        let (fhi, flo) = theory_extrema(&f1, &f2).unwrap();
        let oracle = bin_powers(&flo, &fhi, 826.0 - 6.5 / 2.0, 6.5).unwrap();
        assert_relative_eq!(b.p_plus, oracle.p_plus, max_relative = 1e-7);
        // the value itself, frozen from the oracle
        assert_abs_diff_eq!(b.p_plus, 0.46281, epsilon = 2e-4);
        assert!(!b.truncated);
    }

    #[test]
    fn blocked_arm_puts_everything_in_one_bin() {
        let grid = SpectralGrid::new(805.0, 845.0, 0.05).unwrap();
        let (a1, _) = symmetric_arms(grid, 0.0);
        let zero = SpectralDensity::from_fn(grid, |_| 0.0).unwrap();
        let (hi, lo) = theory_extrema(&a1, &zero).unwrap();
        // flat fringe: Imin = Imax = I1; split far left of the band
        let b = bin_powers(&lo, &hi, 806.0, 0.0).unwrap();
        assert!(b.p_plus < 1e-12);
        assert_relative_eq!(b.p_minus, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn zero_constructive_power_errors() {
        let grid = SpectralGrid::new(805.0, 845.0, 0.05).unwrap();
        let zero = SpectralDensity::from_fn(grid, |_| 0.0).unwrap();
        assert!(matches!(
            bin_powers(&zero, &zero, 826.0, 0.0),
            Err(Error::ZeroConstructivePower)
        ));
        let (a1, a2) = symmetric_arms(grid, 2.4);
        let (hi, lo) = theory_extrema(&a1, &a2).unwrap();
        assert!(matches!(
            bin_powers(&lo, &hi, 700.0, 2.4),
            Err(Error::SplitOutsideGrid(_))
        ));
    }

    #[test]
    fn split_is_exhaustive_wherever_it_lands() {
        // P+ + P- must equal the full Imin integral over the full Imax
        // integral whether lambda_s is a node, a half-cell, or arbitrary
        let grid = SpectralGrid::new(805.0, 845.0, 0.05).unwrap();
        let (a1, a2) = symmetric_arms(grid, 4.9);
        let (hi, lo) = modulated_extrema(&a1, &a2, 0.98).unwrap();
        let full = crate::spectral::trapezoid(grid.step(), lo.values())
            / crate::spectral::trapezoid(grid.step(), hi.values());
        for lambda_s in [823.55, 823.575, 823.5811, 815.0 + 0.05 * 173.0] {
            let b = bin_powers(&lo, &hi, lambda_s, 4.9).unwrap();
            assert_relative_eq!(b.p_plus + b.p_minus, full, max_relative = 1e-12);
            assert_abs_diff_eq!(b.delta_p, b.p_plus - b.p_minus, epsilon = 0.0);
            assert!(b.p_plus >= 0.0 && b.p_minus >= 0.0);
            assert!(b.p_plus + b.p_minus <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn which_path_blindness_for_all_overlaps() {
        // mirror-symmetric arms about an on-grid split: delta P vanishes for
        // every mode overlap while P+ grows strictly with the separation
        let grid = SpectralGrid::new(805.0, 845.0, 0.05).unwrap();
        for mu in [0.0, 0.5, 0.98, 1.0] {
            let mut previous = -1.0;
            for delta in [1.4, 2.4, 4.9, 6.5] {
                let (a1, a2) = symmetric_arms(grid, delta);
                let (hi, lo) = modulated_extrema(&a1, &a2, mu).unwrap();
                let b = bin_powers(&lo, &hi, 826.0 - delta / 2.0, delta).unwrap();
                assert!(
                    b.delta_p.abs() <= 1e-9,
                    "delta P = {} at mu={mu} delta={delta}",
                    b.delta_p
                );
                if mu > 0.9 {
                    assert!(b.p_plus > previous, "P+ not increasing at {delta}");
                    previous = b.p_plus;
                }
            }
        }
    }

    #[test]
    fn quadrature_converges_under_halving() {
        let grid = SpectralGrid::new(805.0, 845.0, 0.05).unwrap();
        let halved = grid.halved().unwrap();
        for delta in [2.4, 4.9] {
            let (a1, a2) = symmetric_arms(grid, delta);
            let (hi, lo) = modulated_extrema(&a1, &a2, 0.98).unwrap();
            let coarse = bin_powers(&lo, &hi, 826.0 - delta / 2.0, delta).unwrap();
            let (b1, b2) = symmetric_arms(halved, delta);
            let (hi2, lo2) = modulated_extrema(&b1, &b2, 0.98).unwrap();
            let fine = bin_powers(&lo2, &hi2, 826.0 - delta / 2.0, delta).unwrap();
            assert_relative_eq!(coarse.p_plus, fine.p_plus, max_relative = 1e-6);
            assert_relative_eq!(coarse.p_minus, fine.p_minus, max_relative = 1e-6);
        }
    }

    #[test]
    fn truncation_flag_raises_on_clipped_tails() {
        // the paper's 815-835 window clips the 6.5 nm-shifted arm at the
        // 1e-3 level, so the finite-domain caveat must surface
        let grid = SpectralGrid::default_scan();
        let (a1, a2) = symmetric_arms(grid, 6.5);
        let (hi, lo) = theory_extrema(&a1, &a2).unwrap();
        let b = bin_powers(&lo, &hi, 822.8, 6.5).unwrap();
        assert!(b.truncated);
    }

    #[test]
    fn sweep_means_and_skips() {
        let grid = SpectralGrid::new(805.0, 845.0, 0.05).unwrap();
        let outcome = sweep_accumulate(&[1.4, 2.4], |delta| {
            let (a1, a2) = symmetric_arms(grid, delta);
            let (hi, lo) = modulated_extrema(&a1, &a2, 0.98).unwrap();
            bin_powers(&lo, &hi, 826.0 - delta / 2.0, delta)
        })
        .unwrap();
        assert_eq!(outcome.entries.len(), 2);
        let (p1, p2) = match (&outcome.entries[0], &outcome.entries[1]) {
            (SweepEntry::Ok(a), SweepEntry::Ok(b)) => (a.p_plus, b.p_plus),
            _ => panic!("both settings should run"),
        };
        assert_relative_eq!(outcome.mean_p_plus, (p1 + p2) / 2.0, max_relative = 1e-15);
        assert_abs_diff_eq!(
            outcome.mean_delta_p,
            outcome.diff_of_means,
            epsilon = 1e-15
        );

        // single-setting sweep: mean equals the record
        let single = sweep_accumulate(&[4.9], |delta| {
            let (a1, a2) = symmetric_arms(grid, delta);
            let (hi, lo) = modulated_extrema(&a1, &a2, 0.98).unwrap();
            bin_powers(&lo, &hi, 826.0 - delta / 2.0, delta)
        })
        .unwrap();
        match &single.entries[0] {
            SweepEntry::Ok(r) => {
                assert_eq!(single.mean_p_plus, r.p_plus);
                assert_eq!(single.mean_delta_p, r.delta_p);
            }
            _ => panic!(),
        }

        // a failing setting is skipped with a warning entry
        let with_skip = sweep_accumulate(&[0.0, 4.9], |delta| {
            if delta == 0.0 {
                Err(Error::InsufficientStructure("flat visibility".into()))
            } else {
                let (a1, a2) = symmetric_arms(grid, delta);
                let (hi, lo) = modulated_extrema(&a1, &a2, 0.98).unwrap();
                bin_powers(&lo, &hi, 826.0 - delta / 2.0, delta)
            }
        })
        .unwrap();
        assert!(matches!(with_skip.entries[0], SweepEntry::Skipped { .. }));
        assert!(matches!(with_skip.entries[1], SweepEntry::Ok(_)));
    }
}
