//! Flat key=value run configuration with dotted section prefixes, e.g.
//! `filter2.fwhm=3.0`. Unset keys keep the defaults of the experiment:
//! 815-835 nm grid at 0.2 nm, a 826/10 nm gaussian source, 3 nm filters at
//! 826 nm, separations {1.4, 2.4, 4.9, 6.5} nm, and 0.98 mode overlap.

use std::path::Path;

use crate::error::{Error, Result};
use crate::spectral::{FilterProfile, FilterShape, SourceShape, SourceSpectrum, SpectralGrid};
use crate::timesim::{
    InterferometerConfig, MirrorLabel, MirrorSpec, Sampling, Topology, TransverseGrid,
};

/// One mirror's configured frequency and tilt amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MirrorSetting {
    pub frequency: f64,
    pub tilt: f64,
}

/// Complete run configuration for every CLI command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_step: f64,
    pub source_center: f64,
    pub source_fwhm: f64,
    pub source_power: f64,
    pub source_shape: SourceShape,
    pub filter1: FilterSetting,
    pub filter2: FilterSetting,
    pub delta_lambda: Vec<f64>,
    pub mode_overlap: f64,
    /// Phase samples per 2 pi period.
    pub phases_per_period: usize,
    /// Attenuate the stronger arm to the weaker arm's peak before
    /// interfering, as the neutral density filter did.
    pub balance: bool,
    /// Moving-average window for mode selection; 0 disables smoothing.
    pub smoothing: usize,
    pub timesim: TimesimConfig,
}

/// Parametric filter description as configured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSetting {
    pub center: f64,
    pub fwhm: f64,
    pub peak: f64,
    pub shape: FilterShape,
}

impl FilterSetting {
    pub fn profile(&self) -> Result<FilterProfile> {
        FilterProfile::new(self.center, self.fwhm, self.peak, self.shape)
    }
}

/// Time-domain simulation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TimesimConfig {
    pub topology: Topology,
    pub inner_phase: f64,
    pub outer_phase: f64,
    pub sample_rate: f64,
    pub duration: f64,
    pub mirror_a: MirrorSetting,
    pub mirror_b: MirrorSetting,
    pub mirror_c: MirrorSetting,
    pub mirror_e: MirrorSetting,
    pub mirror_f: MirrorSetting,
    pub transverse_half_width: f64,
    pub transverse_points: usize,
    /// Mark overlaps used by the spectral-detection counterpart output;
    /// 0 models fully distinguishable marks.
    pub mark_overlap_a: f64,
    pub mark_overlap_b: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid_min: 815.0,
            grid_max: 835.0,
            grid_step: 0.2,
            source_center: 826.0,
            source_fwhm: 10.0,
            source_power: 1.0,
            source_shape: SourceShape::Gaussian,
            filter1: FilterSetting {
                center: 826.0,
                fwhm: 3.0,
                peak: 1.0,
                shape: FilterShape::Gaussian,
            },
            filter2: FilterSetting {
                center: 826.0,
                fwhm: 3.0,
                peak: 1.0,
                shape: FilterShape::Gaussian,
            },
            delta_lambda: vec![1.4, 2.4, 4.9, 6.5],
            mode_overlap: 0.98,
            phases_per_period: 64,
            balance: true,
            smoothing: 0,
            timesim: TimesimConfig {
                topology: Topology::InnerOnlyBlockedC,
                inner_phase: 0.0,
                outer_phase: 0.0,
                sample_rate: 1024.0,
                duration: 1.0,
                mirror_a: MirrorSetting {
                    frequency: 30.0,
                    tilt: 0.05,
                },
                mirror_b: MirrorSetting {
                    frequency: 32.0,
                    tilt: 0.05,
                },
                mirror_c: MirrorSetting {
                    frequency: 37.0,
                    tilt: 0.0,
                },
                mirror_e: MirrorSetting {
                    frequency: 35.0,
                    tilt: 0.0,
                },
                mirror_f: MirrorSetting {
                    frequency: 39.0,
                    tilt: 0.0,
                },
                transverse_half_width: 6.0,
                transverse_points: 601,
                mark_overlap_a: 0.0,
                mark_overlap_b: 0.0,
            },
        }
    }
}

impl RunConfig {
    /// Apply one `key=value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("key {key}: {what} ({value:?})"));
        let f = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| bad("expected a number"))
                .and_then(|x| {
                    if x.is_finite() {
                        Ok(x)
                    } else {
                        Err(bad("expected a finite number"))
                    }
                })
        };
        let mirror = |v: &str| -> Result<MirrorSetting> {
            let (freq, tilt) = v
                .split_once(':')
                .ok_or_else(|| bad("expected frequency:tilt"))?;
            Ok(MirrorSetting {
                frequency: f(freq)?,
                tilt: f(tilt)?,
            })
        };
        match key {
            "grid.min" => self.grid_min = f(value)?,
            "grid.max" => self.grid_max = f(value)?,
            "grid.step" => self.grid_step = f(value)?,
            "source.center" => self.source_center = f(value)?,
            "source.fwhm" => self.source_fwhm = f(value)?,
            "source.power" => self.source_power = f(value)?,
            "source.shape" => {
                self.source_shape = match value {
                    "gaussian" => SourceShape::Gaussian,
                    "flat" => SourceShape::Flat,
                    _ => return Err(bad("expected gaussian or flat")),
                }
            }
            "filter1.center" => self.filter1.center = f(value)?,
            "filter1.fwhm" => self.filter1.fwhm = f(value)?,
            "filter1.peak" => self.filter1.peak = f(value)?,
            "filter1.shape" => self.filter1.shape = parse_shape(value).ok_or_else(|| bad("expected gaussian or supergaussian:N"))?,
            "filter2.center" => self.filter2.center = f(value)?,
            "filter2.fwhm" => self.filter2.fwhm = f(value)?,
            "filter2.peak" => self.filter2.peak = f(value)?,
            "filter2.shape" => self.filter2.shape = parse_shape(value).ok_or_else(|| bad("expected gaussian or supergaussian:N"))?,
            "delta_lambda" => {
                let mut list = Vec::new();
                for part in value.split(',') {
                    let part = part.trim();
                    if part.is_empty() {
                        continue;
                    }
                    list.push(f(part)?);
                }
                if list.is_empty() {
                    return Err(bad("expected a comma-separated list"));
                }
                self.delta_lambda = list;
            }
            "mode_overlap" => self.mode_overlap = f(value)?,
            "phases.per_period" => {
                self.phases_per_period = value
                    .parse::<usize>()
                    .map_err(|_| bad("expected a positive integer"))?;
            }
            "balance.enabled" => {
                self.balance = match value {
                    "true" => true,
                    "false" => false,
                    _ => return Err(bad("expected true or false")),
                }
            }
            "select.smoothing" => {
                self.smoothing = value
                    .parse::<usize>()
                    .map_err(|_| bad("expected an integer"))?;
            }
            "timesim.topology" => {
                self.timesim.topology = match value {
                    "blocked_c" => Topology::InnerOnlyBlockedC,
                    "full_nested" => Topology::FullNested,
                    _ => return Err(bad("expected blocked_c or full_nested")),
                }
            }
            "timesim.inner_phase" => self.timesim.inner_phase = f(value)?,
            "timesim.outer_phase" => self.timesim.outer_phase = f(value)?,
            "timesim.sample_rate" => self.timesim.sample_rate = f(value)?,
            "timesim.duration" => self.timesim.duration = f(value)?,
            "timesim.mirror_a" => self.timesim.mirror_a = mirror(value)?,
            "timesim.mirror_b" => self.timesim.mirror_b = mirror(value)?,
            "timesim.mirror_c" => self.timesim.mirror_c = mirror(value)?,
            "timesim.mirror_e" => self.timesim.mirror_e = mirror(value)?,
            "timesim.mirror_f" => self.timesim.mirror_f = mirror(value)?,
            "timesim.transverse_half_width" => self.timesim.transverse_half_width = f(value)?,
            "timesim.transverse_points" => {
                self.timesim.transverse_points = value
                    .parse::<usize>()
                    .map_err(|_| bad("expected an integer"))?;
            }
            "timesim.mark_overlap_a" => self.timesim.mark_overlap_a = f(value)?,
            "timesim.mark_overlap_b" => self.timesim.mark_overlap_b = f(value)?,
            _ => return Err(Error::Config(format!("unknown key {key}"))),
        }
        Ok(())
    }

    /// Parse a whole config text over the defaults. Lines are
    /// `key=value`; blank lines and `#` comments are ignored.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut config = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                message: format!("expected key=value, got {line:?}"),
            })?;
            config
                .set(key.trim(), value.trim())
                .map_err(|e| Error::Parse {
                    path: path.display().to_string(),
                    line: lineno + 1,
                    message: e.to_string(),
                })?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn grid(&self) -> Result<SpectralGrid> {
        SpectralGrid::new(self.grid_min, self.grid_max, self.grid_step)
    }

    pub fn source(&self) -> Result<SourceSpectrum> {
        SourceSpectrum::new(
            self.source_center,
            self.source_fwhm,
            self.source_power,
            self.source_shape,
        )
    }

    pub fn phases(&self) -> Result<Vec<f64>> {
        if self.phases_per_period < 2 {
            return Err(Error::Config(format!(
                "phases.per_period {} must be at least 2",
                self.phases_per_period
            )));
        }
        Ok(crate::interference::phase_sweep(self.phases_per_period))
    }

    /// Interferometer built from the timesim settings. Mirrors C and F are
    /// included only for the nested topology.
    pub fn interferometer(&self) -> Result<InterferometerConfig> {
        let ts = &self.timesim;
        let mut mirrors = vec![
            MirrorSpec::new(MirrorLabel::A, ts.mirror_a.frequency, ts.mirror_a.tilt)?,
            MirrorSpec::new(MirrorLabel::B, ts.mirror_b.frequency, ts.mirror_b.tilt)?,
            MirrorSpec::new(MirrorLabel::E, ts.mirror_e.frequency, ts.mirror_e.tilt)?,
        ];
        if ts.topology == Topology::FullNested {
            mirrors.push(MirrorSpec::new(
                MirrorLabel::C,
                ts.mirror_c.frequency,
                ts.mirror_c.tilt,
            )?);
            mirrors.push(MirrorSpec::new(
                MirrorLabel::F,
                ts.mirror_f.frequency,
                ts.mirror_f.tilt,
            )?);
        }
        let cfg = InterferometerConfig {
            topology: ts.topology,
            inner_phase: ts.inner_phase,
            outer_phase: ts.outer_phase,
            mirrors,
            mode_overlap: self.mode_overlap,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn sampling(&self) -> Sampling {
        Sampling {
            sample_rate: self.timesim.sample_rate,
            duration: self.timesim.duration,
        }
    }

    pub fn transverse_grid(&self) -> TransverseGrid {
        TransverseGrid {
            half_width: self.timesim.transverse_half_width,
            points: self.timesim.transverse_points,
        }
    }
}

fn parse_shape(value: &str) -> Option<FilterShape> {
    if value == "gaussian" {
        return Some(FilterShape::Gaussian);
    }
    let order = value.strip_prefix("supergaussian:")?.parse::<u32>().ok()?;
    (order >= 1).then_some(FilterShape::SuperGaussian(order))
}
