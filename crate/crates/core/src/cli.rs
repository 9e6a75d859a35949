//! File-emitting command implementations behind the `specmzi` binary:
//! `scan`, `table`, `bins`, `danan`, and `ingest`.
//!
//! Every command is a pure function of its configuration and inputs and
//! writes newline-terminated CSV (or two-column spectra) with fixed
//! nine-significant-digit numbers, so repeated runs are byte-identical.

use std::path::{Path, PathBuf};

use crate::bins::{sweep_accumulate, SweepEntry};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::interference::simulate_fringes;
use crate::pipeline::{bins_for_scan, scan_from_arms, scan_setting, ModeRow, SettingScan};
use crate::report::{sig9, slug, write_csv, write_text};
use crate::spectral::SpectralDensity;
use crate::timesim::{
    parseval_residual, power_spectrum, quad_cell_signal, spectral_detection_counterpart,
    OutputPort, Topology,
};

const MODES_HEADER: &str = "delta_lambda_nm,mode,lambda_nm,i_max,i_min,v,d,v2_plus_d2";

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })
}

fn mode_row_csv(row: &ModeRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        sig9(row.delta_lambda),
        row.mode,
        sig9(row.lambda),
        sig9(row.i_max),
        sig9(row.i_min),
        sig9(row.v),
        sig9(row.d),
        sig9(row.v2_plus_d2)
    )
}

fn write_masked_curve(path: &Path, header: &str, curve: &crate::interference::MaskedCurve) -> Result<()> {
    let rows: Vec<String> = curve
        .defined_points()
        .map(|(lambda, value)| format!("{},{}", sig9(lambda), sig9(value)))
        .collect();
    write_csv(path, header, &rows)
}

/// Scan one or more separations: per-arm spectra, visibility and
/// distinguishability curves, the three mode fringes, and the mode summary.
pub fn cmd_scan(config: &RunConfig, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    let phases = config.phases()?;
    for &delta in &config.delta_lambda {
        let scan = scan_setting(config, delta)?;
        let tag = format!("scan_dl{}", slug(delta));

        write_text(
            &out.join(format!("{tag}_arm1.txt")),
            &scan.arm1.to_two_column(),
        )?;
        write_text(
            &out.join(format!("{tag}_arm2.txt")),
            &scan.arm2.to_two_column(),
        )?;
        write_masked_curve(
            &out.join(format!("{tag}_visibility.csv")),
            "lambda_nm,v",
            &scan.v,
        )?;
        write_masked_curve(
            &out.join(format!("{tag}_distinguishability.csv")),
            "lambda_nm,d",
            &scan.d,
        )?;

        // normalized fringes at the three analysis wavelengths
        let divisor = 4.0 * scan.arm1.peak();
        let a1 = scan.arm1.scaled(1.0 / divisor)?;
        let a2 = scan.arm2.scaled(1.0 / divisor)?;
        let fringes = simulate_fringes(&a1, &a2, scan.mode_overlap, &phases)?;
        for (mode, idx, lambda) in [
            ('a', scan.modes.index_a, scan.modes.lambda_a),
            ('b', scan.modes.index_b, scan.modes.lambda_b),
            ('e', scan.modes.index_e, scan.modes.lambda_e),
        ] {
            let rows: Vec<String> = phases
                .iter()
                .enumerate()
                .map(|(p, phi)| {
                    format!(
                        "{},{},{}",
                        sig9(lambda),
                        sig9(*phi),
                        sig9(fringes.intensity(idx, p))
                    )
                })
                .collect();
            write_csv(
                &out.join(format!("{tag}_fringe_{mode}.csv")),
                "lambda_nm,phase_rad,intensity",
                &rows,
            )?;
        }

        let rows: Vec<String> = scan.mode_rows().iter().map(mode_row_csv).collect();
        write_csv(&out.join(format!("{tag}_modes.csv")), MODES_HEADER, &rows)?;
    }
    Ok(())
}

fn table_rows(scans: &[SettingScan]) -> (Vec<String>, Vec<String>) {
    let mut power = Vec::new();
    let mut duality = Vec::new();
    for scan in scans {
        for row in scan.mode_rows() {
            power.push(format!(
                "{},{},{},{},{}",
                sig9(row.delta_lambda),
                row.mode,
                sig9(row.lambda),
                sig9(row.i_max),
                sig9(row.i_min)
            ));
            duality.push(format!(
                "{},{},{},{},{},{}",
                sig9(row.delta_lambda),
                row.mode,
                sig9(row.lambda),
                sig9(row.v),
                sig9(row.d),
                sig9(row.v2_plus_d2)
            ));
        }
    }
    (power, duality)
}

/// Emit the normalized-extrema and duality tables over the configured
/// separations, modes A, B and E per row, in input order.
pub fn cmd_table(config: &RunConfig, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    let mut scans = Vec::new();
    for &delta in &config.delta_lambda {
        scans.push(scan_setting(config, delta)?);
    }
    let (power, duality) = table_rows(&scans);
    write_csv(
        &out.join("table_power.csv"),
        "delta_lambda_nm,mode,lambda_nm,i_max,i_min",
        &power,
    )?;
    write_csv(
        &out.join("table_duality.csv"),
        "delta_lambda_nm,mode,lambda_nm,v,d,v2_plus_d2",
        &duality,
    )?;
    Ok(())
}

fn bins_rows(entries: &[SweepEntry]) -> (Vec<String>, Vec<String>) {
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for entry in entries {
        match entry {
            SweepEntry::Ok(b) => rows.push(format!(
                "{},{},{},{},{}",
                sig9(b.delta_lambda),
                sig9(b.lambda_s),
                sig9(b.p_plus),
                sig9(b.p_minus),
                sig9(b.delta_p)
            )),
            SweepEntry::Skipped {
                delta_lambda,
                reason,
            } => warnings.push(format!(
                "warning: delta_lambda={} skipped: {reason}",
                slug(*delta_lambda)
            )),
        }
    }
    (rows, warnings)
}

/// Run the binned-power sweep and emit per-setting rows plus the mean.
pub fn cmd_bins(config: &RunConfig, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    let outcome = sweep_accumulate(&config.delta_lambda, |delta| {
        let scan = scan_setting(config, delta)?;
        bins_for_scan(&scan)
    })?;
    let (mut rows, warnings) = bins_rows(&outcome.entries);
    for w in &warnings {
        eprintln!("{w}");
    }
    if outcome
        .entries
        .iter()
        .any(|e| matches!(e, SweepEntry::Ok(b) if b.truncated))
    {
        eprintln!("warning: arm spectra do not vanish at the grid edges; binned integrals truncate the idealized range");
    }
    rows.push(format!(
        "mean,,{},{},{}",
        sig9(outcome.mean_p_plus),
        sig9(outcome.mean_p_minus),
        sig9(outcome.mean_delta_p)
    ));
    rows.push(format!(
        "diff_of_means,,{},{},{}",
        sig9(outcome.mean_p_plus),
        sig9(outcome.mean_p_minus),
        sig9(outcome.diff_of_means)
    ));
    write_csv(
        &out.join("bins.csv"),
        "delta_lambda_nm,lambda_s_nm,p_plus,p_minus,delta_p",
        &rows,
    )?;
    Ok(())
}

/// Simulate the harmonic measurement: quad-cell difference and total-power
/// traces with their spectra, plus the spectral-detection mode powers.
pub fn cmd_danan(config: &RunConfig, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    let interferometer = config.interferometer()?;
    let traces = quad_cell_signal(
        &interferometer,
        &config.sampling(),
        &config.transverse_grid(),
        OutputPort::Signal,
    )?;
    if traces.truncated {
        eprintln!("warning: transverse grid truncates more than 1e-9 of the beam power");
    }

    let trace_rows = |trace: &crate::timesim::TimeTrace| -> Vec<String> {
        trace
            .times()
            .zip(&trace.values)
            .map(|(t, v)| format!("{},{}", sig9(t), sig9(*v)))
            .collect()
    };
    write_csv(
        &out.join("danan_difference_trace.csv"),
        "t_s,signal",
        &trace_rows(&traces.difference),
    )?;
    write_csv(
        &out.join("danan_total_power_trace.csv"),
        "t_s,signal",
        &trace_rows(&traces.total_power),
    )?;

    for (name, trace) in [
        ("danan_difference_spectrum.csv", &traces.difference),
        ("danan_total_power_spectrum.csv", &traces.total_power),
    ] {
        let spectrum = power_spectrum(trace);
        debug_assert!(parseval_residual(&spectrum, trace) < 1e-9);
        let rows: Vec<String> = spectrum
            .frequencies
            .iter()
            .zip(&spectrum.magnitudes)
            .map(|(f, m)| format!("{},{}", sig9(*f), sig9(*m)))
            .collect();
        write_csv(&out.join(name), "f_hz,magnitude", &rows)?;
    }

    if interferometer.topology == Topology::InnerOnlyBlockedC {
        let phases = config.phases()?;
        let powers = spectral_detection_counterpart(
            config.timesim.mark_overlap_a,
            config.timesim.mark_overlap_b,
            config.mode_overlap,
            &phases,
        )?;
        let rows: Vec<String> = powers
            .phases
            .iter()
            .zip(&powers.symmetric)
            .map(|(phi, sym)| {
                format!(
                    "{},{},{},{}",
                    sig9(*phi),
                    sig9(*sym),
                    sig9(powers.marked_a),
                    sig9(powers.marked_b)
                )
            })
            .collect();
        write_csv(
            &out.join("danan_mode_powers.csv"),
            "phase_rad,symmetric,marked_a,marked_b",
            &rows,
        )?;
    } else {
        eprintln!("note: spectral-detection mode powers are defined for the blocked-c topology only");
    }
    Ok(())
}

/// Ingest two measured arm spectra and run the theory chain on them:
/// perfect-interference extrema, visibility, distinguishability, duality,
/// and bins, emitted with an `ingested_` prefix.
pub fn cmd_ingest(arm1_path: &Path, arm2_path: &Path, config: &RunConfig, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    let grid = config.grid()?;
    let arm1 = SpectralDensity::ingest_file(arm1_path, grid)?;
    let arm2 = SpectralDensity::ingest_file(arm2_path, grid)?;

    // separation label: distance between the measured arm peaks
    let peak_lambda = |d: &SpectralDensity| {
        let mut best = (0usize, f64::MIN);
        for (i, v) in d.values().iter().enumerate() {
            if *v > best.1 {
                best = (i, *v);
            }
        }
        grid.lambda(best.0)
    };
    let delta = (peak_lambda(&arm1) - peak_lambda(&arm2)).abs();

    // measured spectra get the perfect-interference theory treatment
    let scan = scan_from_arms(arm1, arm2, 1.0, config.smoothing, delta)?;

    let (power, duality) = table_rows(std::slice::from_ref(&scan));
    write_csv(
        &out.join("ingested_table_power.csv"),
        "delta_lambda_nm,mode,lambda_nm,i_max,i_min",
        &power,
    )?;
    write_csv(
        &out.join("ingested_table_duality.csv"),
        "delta_lambda_nm,mode,lambda_nm,v,d,v2_plus_d2",
        &duality,
    )?;
    write_masked_curve(
        &out.join("ingested_visibility.csv"),
        "lambda_nm,v",
        &scan.v,
    )?;
    write_masked_curve(
        &out.join("ingested_distinguishability.csv"),
        "lambda_nm,d",
        &scan.d,
    )?;

    let b = bins_for_scan(&scan)?;
    if b.truncated {
        eprintln!("warning: ingested spectra do not vanish at the grid edges; binned integrals truncate the idealized range");
    }
    let rows = vec![
        format!(
            "{},{},{},{},{}",
            sig9(b.delta_lambda),
            sig9(b.lambda_s),
            sig9(b.p_plus),
            sig9(b.p_minus),
            sig9(b.delta_p)
        ),
        format!(
            "mean,,{},{},{}",
            sig9(b.p_plus),
            sig9(b.p_minus),
            sig9(b.delta_p)
        ),
    ];
    write_csv(
        &out.join("ingested_bins.csv"),
        "delta_lambda_nm,lambda_s_nm,p_plus,p_minus,delta_p",
        &rows,
    )?;
    Ok(())
}

/// Resolve the output directory: explicit flag, then the `SPECMZI_OUT`
/// environment variable, then `./specmzi-out`.
pub fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("SPECMZI_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("specmzi-out"))
}

/// Load the config file (when given) and apply command-line overrides.
pub fn effective_config(
    config_path: Option<&Path>,
    delta_lambda: &[f64],
    mu: Option<f64>,
) -> Result<RunConfig> {
    let mut config = match config_path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if !delta_lambda.is_empty() {
        config.delta_lambda = delta_lambda.to_vec();
    }
    if let Some(mu) = mu {
        config.mode_overlap = mu;
    }
    Ok(config)
}
