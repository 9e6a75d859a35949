//! Wavelength grids, spectral power densities, and filter transmission
//! profiles, including the rotation-induced blue shift of the second arm
//! filter.
//!
//! All wavelengths are in nanometers and densities in arbitrary power units
//! per nanometer. Values are plain `f64` sampled on a shared uniform grid.

use std::fmt::Write as _;
use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};

/// Relative tolerance used when checking that a span is a whole number of
/// grid steps and when matching wavelengths to grid points.
const GRID_ALIGN_TOL: f64 = 1e-9;

/// A uniform wavelength grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralGrid {
    lambda_min: f64,
    lambda_max: f64,
    step: f64,
    points: usize,
}

impl SpectralGrid {
    /// Build a grid from `lambda_min` to `lambda_max` inclusive.
    ///
    /// The span must be a whole number of steps within rounding tolerance.
    pub fn new(lambda_min: f64, lambda_max: f64, step: f64) -> Result<Self> {
        if !(lambda_min.is_finite() && lambda_max.is_finite() && step.is_finite()) {
            return Err(Error::InvalidGrid("non-finite bounds or step".into()));
        }
        if lambda_min >= lambda_max {
            return Err(Error::InvalidGrid(format!(
                "lambda_min {lambda_min} must be below lambda_max {lambda_max}"
            )));
        }
        if step <= 0.0 {
            return Err(Error::InvalidGrid(format!("step {step} must be positive")));
        }
        let span = lambda_max - lambda_min;
        let intervals = span / step;
        let n = intervals.round();
        if n < 1.0 || (intervals - n).abs() > GRID_ALIGN_TOL * intervals.max(1.0) {
            return Err(Error::InvalidGrid(format!(
                "span {span} nm is not a whole number of {step} nm steps"
            )));
        }
        Ok(Self {
            lambda_min,
            lambda_max,
            step,
            points: n as usize + 1,
        })
    }

    /// The paper's scan range: 815-835 nm at 0.2 nm resolution.
    pub fn default_scan() -> Self {
        Self::new(815.0, 835.0, 0.2).expect("default grid is valid")
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Wavelength of grid point `i`.
    pub fn lambda(&self, i: usize) -> f64 {
        debug_assert!(i < self.points);
        if i + 1 == self.points {
            self.lambda_max
        } else {
            self.lambda_min + i as f64 * self.step
        }
    }

    /// Iterator over all grid wavelengths.
    pub fn wavelengths(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(|i| self.lambda(i))
    }

    /// Index of the grid point nearest to `lambda`, if `lambda` lies within
    /// the grid extent.
    pub fn nearest_index(&self, lambda: f64) -> Option<usize> {
        let half = self.step / 2.0;
        if lambda < self.lambda_min - half || lambda > self.lambda_max + half {
            return None;
        }
        let i = ((lambda - self.lambda_min) / self.step).round();
        let i = (i.max(0.0) as usize).min(self.points - 1);
        Some(i)
    }

    /// A grid with the same extent and half the step.
    pub fn halved(&self) -> Result<Self> {
        Self::new(self.lambda_min, self.lambda_max, self.step / 2.0)
    }

    fn compatible(&self, other: &Self) -> bool {
        self.points == other.points
            && (self.lambda_min - other.lambda_min).abs() <= GRID_ALIGN_TOL
            && (self.step - other.step).abs() <= GRID_ALIGN_TOL * self.step
    }
}

/// Nonnegative power density sampled on a [`SpectralGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    grid: SpectralGrid,
    values: Vec<f64>,
}

impl SpectralDensity {
    /// Wrap sampled values; every value must be finite and nonnegative and
    /// the length must match the grid.
    pub fn new(grid: SpectralGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}-point grid",
                values.len(),
                grid.len()
            )));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::GridMismatch(format!(
                    "density value {v} at index {i} is not a finite nonnegative number"
                )));
            }
        }
        Ok(Self { grid, values })
    }

    /// Sample a nonnegative function on the grid.
    pub fn from_fn(grid: SpectralGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.wavelengths().map(f).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest density value.
    pub fn peak(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Multiply every value by a nonnegative factor.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !factor.is_finite() || factor < 0.0 {
            return Err(Error::GridMismatch(format!(
                "scale factor {factor} must be finite and nonnegative"
            )));
        }
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
        })
    }

    /// Trapezoidal integral over the full grid.
    pub fn integral(&self) -> f64 {
        trapezoid(self.grid.step(), &self.values)
    }

    /// Error unless both densities share one grid.
    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid.compatible(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "[{}, {}] step {} vs [{}, {}] step {}",
                self.grid.lambda_min,
                self.grid.lambda_max,
                self.grid.step,
                other.grid.lambda_min,
                other.grid.lambda_max,
                other.grid.step
            )))
        }
    }

    /// Serialize as two-column text: one header line, then
    /// `wavelength_nm density` rows. Full float precision so that a
    /// write/ingest round trip is exact.
    pub fn to_two_column(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 24);
        out.push_str("wavelength_nm density\n");
        for (lambda, v) in self.grid.wavelengths().zip(&self.values) {
            let _ = writeln!(out, "{lambda:.6} {v:.17e}");
        }
        out
    }

    /// Parse two-column text produced by [`Self::to_two_column`] or measured
    /// externally, then resample onto `grid` by linear interpolation.
    ///
    /// Wavelengths must be strictly increasing and densities nonnegative;
    /// violations are reported with their line number. Grid points outside
    /// the tabulated range get zero density.
    pub fn ingest_two_column(path: &Path, text: &str, grid: SpectralGrid) -> Result<Self> {
        let path_str = path.display().to_string();
        let mut lambdas: Vec<f64> = Vec::new();
        let mut densities: Vec<f64> = Vec::new();
        let mut saw_header = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split_whitespace();
            let a = fields.next();
            let b = fields.next();
            let (a, b) = match (a, b) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    return Err(Error::Parse {
                        path: path_str,
                        line: lineno + 1,
                        message: format!("expected two columns, got {line:?}"),
                    })
                }
            };
            let parsed = a.parse::<f64>().and_then(|x| b.parse::<f64>().map(|y| (x, y)));
            let (lambda, density) = match parsed {
                Ok(pair) => pair,
                Err(_) if !saw_header && lambdas.is_empty() => {
                    // one-line column header
                    saw_header = true;
                    continue;
                }
                Err(e) => {
                    return Err(Error::Parse {
                        path: path_str,
                        line: lineno + 1,
                        message: format!("not numeric: {e}"),
                    })
                }
            };
            if !lambda.is_finite() || !density.is_finite() {
                return Err(Error::Parse {
                    path: path_str,
                    line: lineno + 1,
                    message: "non-finite value".into(),
                });
            }
            if density < 0.0 {
                return Err(Error::Parse {
                    path: path_str,
                    line: lineno + 1,
                    message: format!("negative density {density}"),
                });
            }
            if let Some(prev) = lambdas.last() {
                if lambda <= *prev {
                    return Err(Error::Parse {
                        path: path_str,
                        line: lineno + 1,
                        message: format!("wavelengths must be strictly increasing ({prev} then {lambda})"),
                    });
                }
            }
            lambdas.push(lambda);
            densities.push(density);
        }
        if lambdas.is_empty() {
            return Err(Error::Parse {
                path: path_str,
                line: 0,
                message: "no data rows".into(),
            });
        }
        let values = grid
            .wavelengths()
            .map(|x| interp_linear(&lambdas, &densities, x))
            .collect();
        Self::new(grid, values)
    }

    /// Read and ingest a two-column spectrum file.
    pub fn ingest_file(path: &Path, grid: SpectralGrid) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut text = String::new();
        let mut reader = std::io::BufReader::new(file);
        loop {
            let mut line = String::new();
            let n = reader.read_line(&mut line).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?;
            if n == 0 {
                break;
            }
            text.push_str(&line);
        }
        Self::ingest_two_column(path, &text, grid)
    }
}

/// Composite trapezoidal sum with uniform spacing `h`.
pub fn trapezoid(h: f64, values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    h * (0.5 * values[0] + inner + 0.5 * values[values.len() - 1])
}

fn interp_linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x < xs[0] || x > xs[xs.len() - 1] {
        return 0.0;
    }
    match xs.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
        Ok(i) => ys[i],
        Err(i) => {
            let (x0, x1) = (xs[i - 1], xs[i]);
            let t = (x - x0) / (x1 - x0);
            ys[i - 1] + t * (ys[i] - ys[i - 1])
        }
    }
}

/// Transmission line shape of a narrow-band filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterShape {
    Gaussian,
    /// Flat-topped generalization; order 1 equals [`FilterShape::Gaussian`].
    SuperGaussian(u32),
}

/// Parametric filter transmission window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterProfile {
    pub center: f64,
    pub fwhm: f64,
    pub peak_transmission: f64,
    pub shape: FilterShape,
}

impl FilterProfile {
    pub fn new(center: f64, fwhm: f64, peak_transmission: f64, shape: FilterShape) -> Result<Self> {
        if !center.is_finite() || !fwhm.is_finite() || fwhm <= 0.0 {
            return Err(Error::InvalidFilter(format!(
                "center {center} / fwhm {fwhm}"
            )));
        }
        if !(peak_transmission > 0.0 && peak_transmission <= 1.0)
            && peak_transmission != 0.0
        {
            return Err(Error::InvalidFilter(format!(
                "peak transmission {peak_transmission} outside [0, 1]"
            )));
        }
        if let FilterShape::SuperGaussian(order) = shape {
            if order < 1 {
                return Err(Error::InvalidFilter("supergaussian order must be >= 1".into()));
            }
        }
        Ok(Self {
            center,
            fwhm,
            peak_transmission,
            shape,
        })
    }

    /// Gaussian filter with the paper's 3 nm bandwidth at 826 nm and unit
    /// peak transmission.
    pub fn default_narrowband() -> Self {
        Self::new(826.0, 3.0, 1.0, FilterShape::Gaussian).expect("valid")
    }

    /// Transmission at a single wavelength.
    ///
    /// Gaussian: `peak * exp(-4 ln2 ((x - center)/fwhm)^2)`. The
    /// supergaussian raises the squared argument to the order power with the
    /// constant chosen so the half-maximum stays at `center +- fwhm/2`.
    pub fn transmission(&self, lambda: f64) -> f64 {
        let u = (lambda - self.center) / self.fwhm;
        let t = match self.shape {
            FilterShape::Gaussian => (-4.0 * std::f64::consts::LN_2 * u * u).exp(),
            FilterShape::SuperGaussian(order) => {
                let base = 4.0 * u * u;
                (-std::f64::consts::LN_2 * base.powi(order as i32)).exp()
            }
        };
        self.peak_transmission * t
    }
}

/// Evaluate a filter's transmission curve on a grid.
///
/// The result is dimensionless per grid point, in `[0, peak_transmission]`.
pub fn evaluate_filter(profile: &FilterProfile, grid: SpectralGrid) -> SpectralDensity {
    SpectralDensity::from_fn(grid, |lambda| profile.transmission(lambda))
        .expect("transmission is finite and nonnegative")
}

/// Blue-shift a filter window by `delta_lambda >= 0` nanometers.
///
/// Width and peak transmission are unchanged: the experiment's neutral
/// density filter compensates the transmission change, so the profile models
/// the post-compensation state.
pub fn shift_filter(profile: &FilterProfile, delta_lambda: f64) -> Result<FilterProfile> {
    if !delta_lambda.is_finite() || delta_lambda < 0.0 {
        return Err(Error::NegativeShift(delta_lambda));
    }
    Ok(FilterProfile {
        center: profile.center - delta_lambda,
        ..*profile
    })
}

/// Spectral envelope of the source feeding the interferometer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceSpectrum {
    pub center: f64,
    pub fwhm: f64,
    pub total_power: f64,
    pub shape: SourceShape,
}

/// Envelope shape of the source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceShape {
    /// Gaussian envelope integrating to `total_power`.
    Gaussian,
    /// Uniform density across the analysis grid; useful for constructing
    /// exactly mirror-symmetric arm pairs.
    Flat,
}

impl SourceSpectrum {
    pub fn new(center: f64, fwhm: f64, total_power: f64, shape: SourceShape) -> Result<Self> {
        if !(fwhm > 0.0) || !fwhm.is_finite() {
            return Err(Error::InvalidSource(format!("fwhm {fwhm}")));
        }
        if !(total_power > 0.0) || !total_power.is_finite() {
            return Err(Error::InvalidSource(format!("total power {total_power}")));
        }
        if !center.is_finite() {
            return Err(Error::InvalidSource(format!("center {center}")));
        }
        Ok(Self {
            center,
            fwhm,
            total_power,
            shape,
        })
    }

    /// The mode-locked laser of the experiment: 826 nm center, 10 nm
    /// bandwidth, unit total power.
    pub fn default_laser() -> Self {
        Self::new(826.0, 10.0, 1.0, SourceShape::Gaussian).expect("valid")
    }

    /// Source density at one wavelength. The gaussian form integrates to
    /// `total_power` over the full line; the flat form spreads it uniformly
    /// over `grid`.
    pub fn density(&self, lambda: f64, grid: &SpectralGrid) -> f64 {
        match self.shape {
            SourceShape::Gaussian => {
                let ln2 = std::f64::consts::LN_2;
                let amplitude =
                    self.total_power * 2.0 * (ln2 / std::f64::consts::PI).sqrt() / self.fwhm;
                let u = (lambda - self.center) / self.fwhm;
                amplitude * (-4.0 * ln2 * u * u).exp()
            }
            SourceShape::Flat => {
                self.total_power / (grid.lambda_max() - grid.lambda_min())
            }
        }
    }
}

/// Spectral power density in one interferometer arm: pointwise product of
/// the source density and the arm filter's transmission.
pub fn arm_spectrum(
    source: &SourceSpectrum,
    filter: &FilterProfile,
    grid: SpectralGrid,
) -> SpectralDensity {
    SpectralDensity::from_fn(grid, |lambda| {
        source.density(lambda, &grid) * filter.transmission(lambda)
    })
    .expect("product of nonnegative factors")
}

/// Attenuate the stronger of two arm densities so both peak at the same
/// level, mimicking the neutral density filter used to balance losses.
///
/// Returns the balanced pair; arms that are already balanced (or both zero)
/// pass through unchanged.
pub fn balance_arms(
    arm1: &SpectralDensity,
    arm2: &SpectralDensity,
) -> Result<(SpectralDensity, SpectralDensity)> {
    arm1.check_same_grid(arm2)?;
    let (p1, p2) = (arm1.peak(), arm2.peak());
    if p1 == 0.0 || p2 == 0.0 || p1 == p2 {
        return Ok((arm1.clone(), arm2.clone()));
    }
    if p1 > p2 {
        Ok((arm1.scaled(p2 / p1)?, arm2.clone()))
    } else {
        Ok((arm1.clone(), arm2.scaled(p1 / p2)?))
    }
}
