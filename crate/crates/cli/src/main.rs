mod commands;
mod config;
mod error;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lhsl_core::Band;

use commands::Artifact;
use config::{Format, RunConfig};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "lhsl", version, about = "Spectrum and qubit renormalization of a left-handed superlattice line")]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Use the built-in parameter set instead of a config file.
    #[arg(long, global = true)]
    paper_defaults: bool,

    /// Output directory (overrides output.dir).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Output format (overrides output.format).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Accepted for scripting symmetry; every computation is deterministic.
    #[arg(long, global = true)]
    seedless: bool,

    /// Override superlattice.epsilon.
    #[arg(long, global = true, allow_negative_numbers = true)]
    epsilon: Option<f64>,

    /// Override superlattice.supercells.
    #[arg(long, global = true)]
    supercells: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Superlattice dispersion on a uniform k grid.
    Dispersion {
        /// Number of k points in (0, π/Δz] (overrides solver.k_points).
        #[arg(long)]
        k_points: Option<usize>,
    },
    /// Band edges, gap and right-handed cutoff.
    BandEdges,
    /// Eigenfrequencies of the hybrid line.
    Modes {
        /// Restrict to one band (band1 or band2).
        #[arg(long)]
        band: Option<Band>,
    },
    /// Voltage and current profile of one mode.
    Profile {
        #[arg(long, default_value = "band1")]
        band: Band,
        /// Mode index within the band, counting from 0.
        #[arg(long)]
        index: usize,
    },
    /// Numerical, analytical and fitted density of modes.
    Dom,
    /// Effective tunneling over the qubit grid, discrete and continuum.
    Renormalize,
    /// (Δ₀, g) phase diagram with jump detection.
    PhaseDiagram,
}

fn load_config(common: &Common) -> Result<RunConfig, CliError> {
    let mut config = match (&common.config, common.paper_defaults) {
        (Some(_), true) => {
            return Err(CliError::Usage("--config and --paper-defaults are mutually exclusive".into()));
        }
        (Some(path), false) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            RunConfig::from_toml(&text)?
        }
        (None, true) => RunConfig::paper_defaults(),
        (None, false) => {
            return Err(CliError::Usage("no configuration: pass --config PATH or --paper-defaults".into()));
        }
    };
    if let Some(e) = common.epsilon {
        config.superlattice.epsilon = e;
    }
    if let Some(n) = common.supercells {
        config.superlattice.supercells = n;
    }
    if let Some(dir) = &common.out {
        config.output.dir = dir.clone();
    }
    if let Some(f) = common.format {
        config.output.format = f;
    }
    config.validate()?;
    Ok(config)
}

fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<(), CliError> {
    let io = |path: &Path, e: std::io::Error| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    for a in artifacts {
        let path = dir.join(&a.name);
        fs::write(&path, &a.contents).map_err(|e| io(&path, e))?;
        println!("{}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = load_config(&cli.common)?;
    let mut artifacts = match cli.command {
        Command::Dispersion { k_points } => {
            let n = k_points.unwrap_or(config.solver.k_points);
            if n == 0 {
                return Err(CliError::Usage("--k-points must be at least 1".into()));
            }
            commands::dispersion(&config, n)?
        }
        Command::BandEdges => commands::band_edges_cmd(&config)?,
        Command::Modes { band } => commands::modes(&config, band)?,
        Command::Profile { band, index } => commands::profile(&config, band, index)?,
        Command::Dom => commands::dom(&config)?,
        Command::Renormalize => commands::renormalize(&config)?,
        Command::PhaseDiagram => commands::phase_diagram(&config)?,
    };
    artifacts.push(Artifact {
        name: "config.toml".into(),
        contents: config.to_toml(),
    });
    write_artifacts(&config.output.dir, &artifacts)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Usage(e.to_string().trim_end().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
