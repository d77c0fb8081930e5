//! `wgqed`: runs waveguide scattering scenarios and writes CSV tables.

mod commands;
mod config;
mod error;
mod figures;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wgqed_core::observables::ScanAxis;

use crate::config::{GridOverride, RunConfig};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "wgqed",
    version,
    about = "Single-photon scattering off atoms in a waveguide"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Worker thread cap.
    #[arg(long, global = true, env = "WGQED_THREADS")]
    threads: Option<usize>,

    /// k-grid point count (even), overrides the scenario file.
    #[arg(long, global = true)]
    grid_points: Option<usize>,

    /// k-grid half-width in pulse widths, overrides the scenario file.
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid_extent: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Atomic amplitudes in time.
    Dynamics,
    /// Stationary outgoing spectra and transport summary.
    Spectrum,
    /// Reflectivity along one parameter axis.
    Scan {
        /// detuning, spacing, coupling or n_atoms
        #[arg(long)]
        axis: String,
        /// start:stop:count
        #[arg(long, allow_hyphen_values = true)]
        range: String,
    },
    /// Dataset of one figure, e.g. 2b or 7a.
    Figure { id: String },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // only fails if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let grid = GridOverride {
        points: cli.grid_points,
        extent: cli.grid_extent,
    };

    if let Command::Figure { id } = &cli.command {
        if !figures::is_known(id) {
            return Err(CliError::Usage(format!(
                "unknown figure `{id}`; known: {}",
                figures::FIGURE_IDS.join(", ")
            )));
        }
        if cli.config.is_some() {
            log::warn!("figure presets ignore --config");
        }
        let hash = output::scenario_hash(&format!("command=figure\nid={id}\n{grid:?}"));
        create_dir(&cli.out)?;
        return figures::run(id, grid, &cli.out, &hash);
    }

    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.apply(grid);
    let (name, extra, scan) = match &cli.command {
        Command::Dynamics => ("dynamics", String::new(), None),
        Command::Spectrum => ("spectrum", String::new(), None),
        Command::Scan { axis, range } => {
            let axis = ScanAxis::parse(axis).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown axis `{axis}`; expected detuning, spacing, coupling or n_atoms"
                ))
            })?;
            let values = commands::parse_range(range)?;
            let extra = format!("axis={}\nvalues={values:?}", axis.name());
            ("scan", extra, Some((axis, values)))
        }
        Command::Figure { .. } => unreachable!("handled above"),
    };
    let hash = output::scenario_hash(&format!("command={name}\n{extra}\n{cfg:?}"));
    create_dir(&cli.out)?;
    match scan {
        Some((axis, values)) => commands::scan(&cfg, axis, &values, &cli.out, &hash),
        None if name == "dynamics" => commands::dynamics(&cfg, &cli.out, &hash),
        None => commands::spectrum(&cfg, &cli.out, &hash),
    }
}

fn create_dir(dir: &std::path::Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}
