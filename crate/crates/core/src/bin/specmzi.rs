use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use specmzi::cli;

#[derive(Parser)]
#[command(
    name = "specmzi",
    about = "Spectrally-resolved which-path analysis for a Mach-Zehnder interferometer",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Path to a key=value run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (or set SPECMZI_OUT)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Filter separation in nm; repeat for a sweep (overrides the config)
    #[arg(long = "delta-lambda", value_name = "NM")]
    delta_lambda: Vec<f64>,
    /// Mode overlap override
    #[arg(long)]
    mu: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Per-wavelength scan: arm spectra, V and D curves, mode fringes
    Scan {
        #[command(flatten)]
        common: Common,
    },
    /// Normalized extrema and duality tables for modes A, B, E
    Table {
        #[command(flatten)]
        common: Common,
    },
    /// Binned destructive-port powers across the separation sweep
    Bins {
        #[command(flatten)]
        common: Common,
    },
    /// Time-domain quad-cell simulation and its spectral-detection contrast
    Danan {
        #[command(flatten)]
        common: Common,
    },
    /// Analyze two measured arm spectra (two-column text)
    Ingest {
        arm1: PathBuf,
        arm2: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn run() -> specmzi::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Scan { common } => {
            let config =
                cli::effective_config(common.config.as_deref(), &common.delta_lambda, common.mu)?;
            cli::cmd_scan(&config, &cli::resolve_out_dir(common.out))
        }
        Command::Table { common } => {
            let config =
                cli::effective_config(common.config.as_deref(), &common.delta_lambda, common.mu)?;
            cli::cmd_table(&config, &cli::resolve_out_dir(common.out))
        }
        Command::Bins { common } => {
            let config =
                cli::effective_config(common.config.as_deref(), &common.delta_lambda, common.mu)?;
            cli::cmd_bins(&config, &cli::resolve_out_dir(common.out))
        }
        Command::Danan { common } => {
            let config =
                cli::effective_config(common.config.as_deref(), &common.delta_lambda, common.mu)?;
            cli::cmd_danan(&config, &cli::resolve_out_dir(common.out))
        }
        Command::Ingest { arm1, arm2, common } => {
            let config =
                cli::effective_config(common.config.as_deref(), &common.delta_lambda, common.mu)?;
            cli::cmd_ingest(&arm1, &arm2, &config, &cli::resolve_out_dir(common.out))
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
