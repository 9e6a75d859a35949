//! Time-domain reconstruction of the harmonic which-path measurement:
//! nested Mach-Zehnder paths with mirrors vibrating at distinct frequencies,
//! a transverse-Gaussian beam, the quad-cell difference photocurrent, and
//! its Fourier magnitude spectrum, contrasted with a phase-independent
//! spectral decomposition of the same detector light.
//!
//! Transverse coordinates are in units of the beam waist w. The fundamental
//! mode has intensity profile `|g(x)|^2 = exp(-x^2) / sqrt(pi)`, so a beam
//! displaced by `s` sends `erf(s)` of its power into the half-plane
//! difference signal. Mirror vibration displaces the beam by
//! `d sin(2 pi f t)` without any wavefront tilt phase; that first-order
//! model is the minimal one exhibiting the effect.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Vibration amplitudes above this fraction of the waist leave the weak-mark
/// regime the first-order displacement model assumes.
pub const MAX_TILT_DISPLACEMENT: f64 = 0.2;

/// Mirrors of the nested interferometer, labeled as in the harmonic
/// experiment: A and B inside the inner loop, E before it, F after it, C on
/// the standalone outer path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MirrorLabel {
    A,
    B,
    C,
    E,
    F,
}

impl MirrorLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            MirrorLabel::A => "A",
            MirrorLabel::B => "B",
            MirrorLabel::C => "C",
            MirrorLabel::E => "E",
            MirrorLabel::F => "F",
        }
    }
}

/// One vibrating mirror: label, vibration frequency, and the transverse
/// displacement amplitude it imprints on the beam (in waists).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MirrorSpec {
    pub label: MirrorLabel,
    pub frequency: f64,
    pub tilt_displacement: f64,
}

impl MirrorSpec {
    pub fn new(label: MirrorLabel, frequency: f64, tilt_displacement: f64) -> Result<Self> {
        if !(frequency > 0.0) || !frequency.is_finite() {
            return Err(Error::InvalidInterferometer(format!(
                "mirror {} frequency {frequency} must be positive",
                label.as_str()
            )));
        }
        if !(0.0..=MAX_TILT_DISPLACEMENT).contains(&tilt_displacement) {
            return Err(Error::InvalidInterferometer(format!(
                "mirror {} tilt {tilt_displacement} outside the weak-mark range [0, {MAX_TILT_DISPLACEMENT}]",
                label.as_str()
            )));
        }
        Ok(Self {
            label,
            frequency,
            tilt_displacement,
        })
    }
}

/// Interferometer layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    /// Outer loop with path c plus the nested inner loop.
    FullNested,
    /// Path c blocked; only the inner loop (mirrors A, B, optionally E
    /// upstream) is operational.
    InnerOnlyBlockedC,
}

/// Which output of the final splitter is analyzed. The signal port is
/// destructive for the inner pair at `inner_phase = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputPort {
    Signal,
    Complement,
}

/// Full description of one simulated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferometerConfig {
    pub topology: Topology,
    /// Phase between the inner arms; 0 is destructive at the signal port.
    pub inner_phase: f64,
    /// Phase of the outer path c relative to the inner output; 0 is
    /// destructive at the signal port when the inner pair is constructive.
    pub outer_phase: f64,
    pub mirrors: Vec<MirrorSpec>,
    pub mode_overlap: f64,
}

impl InterferometerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.mode_overlap) {
            return Err(Error::InvalidModeOverlap(self.mode_overlap));
        }
        if !self.inner_phase.is_finite() || !self.outer_phase.is_finite() {
            return Err(Error::InvalidInterferometer("non-finite phase".into()));
        }
        for (i, m) in self.mirrors.iter().enumerate() {
            MirrorSpec::new(m.label, m.frequency, m.tilt_displacement)?;
            for other in &self.mirrors[..i] {
                if other.label == m.label {
                    return Err(Error::InvalidInterferometer(format!(
                        "duplicate mirror {}",
                        m.label.as_str()
                    )));
                }
                if other.frequency == m.frequency {
                    return Err(Error::InvalidInterferometer(format!(
                        "mirrors {} and {} share frequency {}",
                        other.label.as_str(),
                        m.label.as_str(),
                        m.frequency
                    )));
                }
            }
            if self.topology == Topology::InnerOnlyBlockedC
                && matches!(m.label, MirrorLabel::C | MirrorLabel::F)
            {
                return Err(Error::InvalidInterferometer(format!(
                    "mirror {} has no path when c is blocked",
                    m.label.as_str()
                )));
            }
        }
        Ok(())
    }

    pub fn max_frequency(&self) -> f64 {
        self.mirrors
            .iter()
            .map(|m| m.frequency)
            .fold(0.0, f64::max)
    }

    fn displacement_of(&self, label: MirrorLabel, t: f64) -> f64 {
        self.mirrors
            .iter()
            .find(|m| m.label == label)
            .map(|m| m.tilt_displacement * (2.0 * std::f64::consts::PI * m.frequency * t).sin())
            .unwrap_or(0.0)
    }
}

/// Superposition of displaced fundamental modes at the detector plane.
#[derive(Debug, Clone)]
pub struct TransverseField {
    /// `(complex amplitude, transverse displacement)` per contributing path.
    components: Vec<(Complex64, f64)>,
    mode_overlap: f64,
}

impl TransverseField {
    pub fn new(components: Vec<(Complex64, f64)>, mode_overlap: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mode_overlap) {
            return Err(Error::InvalidModeOverlap(mode_overlap));
        }
        Ok(Self {
            components,
            mode_overlap,
        })
    }

    pub fn components(&self) -> &[(Complex64, f64)] {
        &self.components
    }

    /// Detector-plane intensity at transverse position `x`. Cross terms are
    /// scaled by the mode overlap.
    pub fn intensity(&self, x: f64) -> f64 {
        let norm = 1.0 / std::f64::consts::PI.sqrt();
        let profiles: Vec<f64> = self
            .components
            .iter()
            .map(|(_, s)| (-0.5 * (x - s) * (x - s)).exp())
            .collect();
        let mut total = 0.0;
        for (i, (amp_i, _)) in self.components.iter().enumerate() {
            total += amp_i.norm_sqr() * profiles[i] * profiles[i];
            for (j, (amp_j, _)) in self.components.iter().enumerate().take(i) {
                total +=
                    2.0 * self.mode_overlap * (amp_i * amp_j.conj()).re * profiles[i] * profiles[j];
            }
        }
        (total * norm).max(0.0)
    }
}

/// Detector field of a configuration at time `t`.
///
/// Amplitude bookkeeping uses 50:50 splitters throughout. In the blocked-c
/// topology the operational interferometer is the inner one, so each path
/// carries amplitude 1/2 of the light entering it; in the nested topology
/// the inner paths carry 1/4 and path c carries 1/2.
pub fn propagate_fields(
    config: &InterferometerConfig,
    t: f64,
    port: OutputPort,
) -> Result<TransverseField> {
    config.validate()?;
    let e = config.displacement_of(MirrorLabel::E, t);
    let a = config.displacement_of(MirrorLabel::A, t);
    let b = config.displacement_of(MirrorLabel::B, t);
    let inner = Complex64::from_polar(1.0, config.inner_phase);
    // the signal port is dark for the inner pair at inner_phase = 0
    let sign = match port {
        OutputPort::Signal => -1.0,
        OutputPort::Complement => 1.0,
    };
    let components = match config.topology {
        Topology::InnerOnlyBlockedC => vec![
            (Complex64::new(0.5, 0.0), e + a),
            (inner * Complex64::new(0.5 * sign, 0.0), e + b),
        ],
        Topology::FullNested => {
            let f = config.displacement_of(MirrorLabel::F, t);
            let c = config.displacement_of(MirrorLabel::C, t);
            let outer = Complex64::from_polar(1.0, config.outer_phase);
            vec![
                (Complex64::new(0.25, 0.0), e + a + f),
                (inner * Complex64::new(-0.25, 0.0), e + b + f),
                (outer * Complex64::new(0.5 * sign, 0.0), c),
            ]
        }
    };
    TransverseField::new(components, config.mode_overlap)
}

/// Uniform transverse quadrature grid.
#[derive(Debug, Clone, Copy)]
pub struct TransverseGrid {
    pub half_width: f64,
    pub points: usize,
}

impl Default for TransverseGrid {
    /// +-6 waists sampled at 601 points keeps the Gaussian tail truncation
    /// below 1e-9 of the beam power.
    fn default() -> Self {
        Self {
            half_width: 6.0,
            points: 601,
        }
    }
}

impl TransverseGrid {
    fn validate(&self) -> Result<()> {
        if self.points < 3 || self.points % 2 == 0 {
            return Err(Error::InvalidInterferometer(format!(
                "transverse grid needs an odd point count >= 3, got {}",
                self.points
            )));
        }
        if !(self.half_width > 0.0) {
            return Err(Error::InvalidInterferometer(
                "transverse half width must be positive".into(),
            ));
        }
        Ok(())
    }

    fn step(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }
}

/// Quad-cell readout of one field snapshot: difference of the photocurrents
/// from the two detector halves, the total power, and whether the transverse
/// truncation exceeded 1e-9 of the power.
pub fn quad_cell_of_field(field: &TransverseField, grid: &TransverseGrid) -> Result<(f64, f64, bool)> {
    grid.validate()?;
    let h = grid.step();
    let mid = grid.points / 2; // x = 0 for odd point counts
    let mut right = 0.0;
    let mut left = 0.0;
    let mut edge = 0.0f64;
    for i in 0..grid.points {
        let x = -grid.half_width + i as f64 * h;
        let intensity = field.intensity(x);
        let weight = if i == 0 || i + 1 == grid.points {
            edge = edge.max(intensity);
            0.5
        } else if i == mid {
            // the split point's full trapezoid weight h goes half to each side
            right += 0.5 * h * intensity;
            left += 0.5 * h * intensity;
            continue;
        } else {
            1.0
        };
        if i >= mid {
            right += weight * h * intensity;
        }
        if i <= mid {
            left += weight * h * intensity;
        }
    }
    let power = left + right;
    let truncated = edge > 1e-9 * power.max(f64::MIN_POSITIVE);
    Ok((right - left, power, truncated))
}

/// Sampled detector signal.
#[derive(Debug, Clone)]
pub struct TimeTrace {
    pub sample_rate: f64,
    pub duration: f64,
    pub values: Vec<f64>,
}

impl TimeTrace {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(|i| i as f64 / self.sample_rate)
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            0.0
        } else {
            self.values.iter().sum::<f64>() / self.values.len() as f64
        }
    }
}

/// Time sampling for the simulation.
#[derive(Debug, Clone, Copy)]
pub struct Sampling {
    pub sample_rate: f64,
    pub duration: f64,
}

impl Sampling {
    fn validate(&self, config: &InterferometerConfig) -> Result<usize> {
        if !(self.sample_rate > 0.0) || !(self.duration > 0.0) {
            return Err(Error::InvalidInterferometer(
                "sample rate and duration must be positive".into(),
            ));
        }
        let fmax = config.max_frequency();
        if self.sample_rate <= 2.0 * fmax {
            return Err(Error::NyquistViolation {
                rate: self.sample_rate,
                freq: fmax,
            });
        }
        for m in &config.mirrors {
            let cycles = self.duration * m.frequency;
            if (cycles - cycles.round()).abs() > 1e-9 * cycles.max(1.0) {
                return Err(Error::IncommensurateDuration {
                    duration: self.duration,
                    freq: m.frequency,
                });
            }
        }
        let n = (self.sample_rate * self.duration).round();
        if (self.sample_rate * self.duration - n).abs() > 1e-9 {
            return Err(Error::InvalidInterferometer(
                "sample count must be a whole number".into(),
            ));
        }
        Ok(n as usize)
    }
}

/// Simulated detector traces for one configuration: the quad-cell difference
/// signal and the total detected power, plus a transverse-truncation flag.
#[derive(Debug, Clone)]
pub struct DetectorTraces {
    pub difference: TimeTrace,
    pub total_power: TimeTrace,
    pub truncated: bool,
}

/// Sample the quad-cell difference and total-power signals over time.
pub fn quad_cell_signal(
    config: &InterferometerConfig,
    sampling: &Sampling,
    grid: &TransverseGrid,
    port: OutputPort,
) -> Result<DetectorTraces> {
    let n = sampling.validate(config)?;
    let mut diff = Vec::with_capacity(n);
    let mut power = Vec::with_capacity(n);
    let mut truncated = false;
    for i in 0..n {
        let t = i as f64 / sampling.sample_rate;
        let field = propagate_fields(config, t, port)?;
        let (s, p, trunc) = quad_cell_of_field(&field, grid)?;
        truncated |= trunc;
        diff.push(s);
        power.push(p);
    }
    Ok(DetectorTraces {
        difference: TimeTrace {
            sample_rate: sampling.sample_rate,
            duration: sampling.duration,
            values: diff,
        },
        total_power: TimeTrace {
            sample_rate: sampling.sample_rate,
            duration: sampling.duration,
            values: power,
        },
        truncated,
    })
}

/// One-sided Fourier magnitude spectrum.
#[derive(Debug, Clone)]
pub struct PowerSpectrum {
    pub frequencies: Vec<f64>,
    pub magnitudes: Vec<f64>,
}

impl PowerSpectrum {
    /// Magnitude of the bin nearest `f`, if within range.
    pub fn magnitude_at(&self, f: f64) -> Option<f64> {
        if self.frequencies.is_empty() {
            return None;
        }
        let df = if self.frequencies.len() > 1 {
            self.frequencies[1] - self.frequencies[0]
        } else {
            return Some(self.magnitudes[0]);
        };
        let i = (f / df).round();
        if i < 0.0 || i as usize >= self.frequencies.len() {
            None
        } else {
            Some(self.magnitudes[i as usize])
        }
    }

    /// Sum of squared magnitudes, weighting interior one-sided bins twice to
    /// account for their negative-frequency twins. Equals the mean square of
    /// the mean-removed signal by Parseval's theorem.
    pub fn mean_square(&self, trace_len: usize) -> f64 {
        let mut sum = 0.0;
        for (k, m) in self.magnitudes.iter().enumerate() {
            let nyquist_bin = trace_len % 2 == 0 && k + 1 == self.magnitudes.len();
            let w = if k == 0 || nyquist_bin { 1.0 } else { 2.0 };
            sum += w * m * m;
        }
        sum
    }
}

/// Discrete Fourier magnitude spectrum of the mean-removed trace.
///
/// Magnitudes are `|X_k| / N`, so a full-scale sinusoid of amplitude `a` at
/// a bin center shows up with magnitude `a/2`. Frequency resolution is
/// `1/duration`.
pub fn power_spectrum(trace: &TimeTrace) -> PowerSpectrum {
    let n = trace.values.len();
    if n == 0 {
        return PowerSpectrum {
            frequencies: vec![],
            magnitudes: vec![],
        };
    }
    let mean = trace.mean();
    let mut buf: Vec<Complex64> = trace
        .values
        .iter()
        .map(|v| Complex64::new(v - mean, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let bins = n / 2 + 1;
    let scale = 1.0 / n as f64;
    let df = 1.0 / trace.duration;
    PowerSpectrum {
        frequencies: (0..bins).map(|k| k as f64 * df).collect(),
        magnitudes: buf[..bins].iter().map(|c| c.norm() * scale).collect(),
    }
}

/// Parseval residual between a spectrum and its source trace, relative to
/// the trace's mean square power (absolute when that vanishes).
pub fn parseval_residual(spectrum: &PowerSpectrum, trace: &TimeTrace) -> f64 {
    let mean = trace.mean();
    let ms: f64 = trace
        .values
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / trace.values.len() as f64;
    let ps = spectrum.mean_square(trace.values.len());
    if ms > 0.0 {
        (ps - ms).abs() / ms
    } else {
        ps.abs()
    }
}

/// Phase-resolved powers of the spectral decomposition of the detector
/// light: the shared symmetric component plus one orthogonal marked mode per
/// arm.
#[derive(Debug, Clone)]
pub struct ModePowers {
    pub phases: Vec<f64>,
    /// Interferes: varies as cos(phase), destructive at 0.
    pub symmetric: Vec<f64>,
    /// Phase-independent marked power of arm A.
    pub marked_a: f64,
    /// Phase-independent marked power of arm B.
    pub marked_b: f64,
}

/// Decompose the blocked-c detector light into the indistinguishable
/// symmetric component and two orthogonal marked components, as a
/// spectrally resolving detector would separate them.
///
/// `overlap_a`/`overlap_b` are the mode overlaps of each marked arm field
/// with the unmarked mode (1 = unmarked, 0 = fully distinguishable); for a
/// static transverse displacement `s` the overlap is `exp(-s^2/4)`. The
/// marked powers do not depend on the interferometer phase: the which-path
/// signal survives at every phase setting, including the destructive one.
pub fn spectral_detection_counterpart(
    overlap_a: f64,
    overlap_b: f64,
    mode_overlap: f64,
    phases: &[f64],
) -> Result<ModePowers> {
    for c in [overlap_a, overlap_b] {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::InvalidInterferometer(format!(
                "mark overlap {c} outside [0, 1]"
            )));
        }
    }
    if !(0.0..=1.0).contains(&mode_overlap) {
        return Err(Error::InvalidModeOverlap(mode_overlap));
    }
    if phases.is_empty() {
        return Err(Error::EmptyPhases);
    }
    let marked_a = 0.25 * (1.0 - overlap_a * overlap_a);
    let marked_b = 0.25 * (1.0 - overlap_b * overlap_b);
    let symmetric = phases
        .iter()
        .map(|phi| {
            0.25 * (overlap_a * overlap_a + overlap_b * overlap_b
                - 2.0 * mode_overlap * overlap_a * overlap_b * phi.cos())
        })
        .collect();
    Ok(ModePowers {
        phases: phases.to_vec(),
        symmetric,
        marked_a,
        marked_b,
    })
}

/// Overlap of a displaced fundamental mode with the undisplaced one.
pub fn displacement_overlap(displacement: f64) -> f64 {
    (-displacement * displacement / 4.0).exp()
}
