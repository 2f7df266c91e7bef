mod commands;
mod config;
mod output;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use commands::Preset;
use config::{parse_config, ConfigError, RunConfig};
use report::CompareFailed;

const EXIT_VALIDATION: u8 = 1;
const EXIT_COMPARE: u8 = 2;
const EXIT_IO: u8 = 3;

/// Particle spectra and two-point correlators for a waveguide whose
/// propagation speed changes in time.
#[derive(Debug, Parser)]
#[command(name = "qwave", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (QWAVE_OUT takes precedence).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Grid points per axis.
    #[arg(long, global = true)]
    resolution: Option<usize>,
    /// Highest mode in spectra and mode sums.
    #[arg(long, global = true)]
    nmax: Option<u32>,
    /// Abel regulator p in (0, 1).
    #[arg(long, global = true)]
    regulator: Option<f64>,
    /// Reserved; all computations are deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Particle number per mode.
    Spectrum,
    /// Correlator heatmap (CSV and SVG) at the configured times.
    Grid,
    /// Integrate mode equations and compare against analytic values.
    Compare {
        /// Fixed integration step for every mode.
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Singular and feature lines at the configured times.
    Singularities,
    /// Built-in figure presets.
    Figure {
        #[arg(value_enum)]
        preset: Preset,
    },
}

fn load(cli: &Cli) -> Result<RunConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| ConfigError::Invalid {
            path: "--config".into(),
            reason: "this subcommand needs a configuration file".into(),
        })?;
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg = parse_config(&text).with_context(|| format!("in {}", path.display()))?;
    Ok(cfg)
}

fn apply_overrides(cli: &Cli, cfg: &mut RunConfig) -> Result<()> {
    if let Some(r) = cli.resolution {
        cfg.resolution = r;
    }
    if let Some(n) = cli.nmax {
        cfg.n_max = n;
    }
    if let Some(p) = cli.regulator {
        cfg.regulator = p;
    }
    cfg.revalidate()?;
    for w in &cfg.warnings {
        log::warn!("{w}");
    }
    Ok(())
}

fn output_dir(cli: &Cli, cfg: &RunConfig) -> PathBuf {
    std::env::var_os("QWAVE_OUT")
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .or_else(|| cli.out.clone())
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

fn run(cli: &Cli) -> Result<()> {
    let mut cfg = match &cli.command {
        Command::Figure { preset } => {
            if cli.config.is_some() {
                log::warn!("--config is ignored by figure presets");
            }
            preset.config()
        }
        _ => load(cli)?,
    };
    apply_overrides(cli, &mut cfg)?;
    let out = output_dir(cli, &cfg);
    match &cli.command {
        Command::Spectrum => commands::cmd_spectrum(&cfg, &out),
        Command::Grid => commands::cmd_grid(&cfg, &out, "grid", &commands::grid_title(&cfg)),
        Command::Compare { dt } => commands::cmd_compare(&cfg, &out, *dt),
        Command::Singularities => commands::cmd_singularities(&cfg, &out),
        Command::Figure { preset } => commands::cmd_grid(&cfg, &out, preset.stem(), &commands::grid_title(&cfg)),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<CompareFailed>().is_some() {
        EXIT_COMPARE
    } else if err.chain().any(|e| e.is::<std::io::Error>()) {
        EXIT_IO
    } else {
        EXIT_VALIDATION
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
