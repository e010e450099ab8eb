//! `trionpol`: spectra, photon statistics, scans and material estimates for
//! the trion-polariton cavity model.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 solver failure,
//! 4 truncation failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] trion_polariton::Error),
    #[error("{path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
    /// Some scan rows failed; files were still written.
    #[error("{failed} of {total} scan points failed (worst status: {status})")]
    Rows { failed: usize, total: usize, status: &'static str },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use trion_polariton::Error as E;
        match self {
            CliError::Config(_) | CliError::Output { .. } => 2,
            CliError::Model(e) => match e {
                E::InvalidParams(_)
                | E::MissingDrive(_)
                | E::InvalidGrid(_)
                | E::GridCoverage { .. }
                | E::Parse { .. }
                | E::DimensionMismatch { .. }
                | E::Io(_) => 2,
                E::Truncation { .. } => 4,
                _ => 3,
            },
            CliError::Rows { status, .. } => {
                if *status == "truncation" {
                    4
                } else {
                    3
                }
            }
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "trionpol", version, about = "Trion-polariton cavity QED simulator")]
struct Cli {
    /// Sectioned key = value configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides [output] dir).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for scans and spectra.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Print the fully resolved configuration and exit.
    #[arg(long, global = true)]
    dump_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Transition spectra after coherent pulses, plus the peak track.
    Spectrum {
        /// Mean photon numbers |α|², comma separated (overrides [spectrum]).
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        alpha_sq: Option<Vec<f64>>,
    },
    /// Steady-state g²(0) and n_cav along one axis ([g2scan]).
    G2scan,
    /// g²(τ) at the configured detuning ([g2tau]).
    G2tau {
        #[arg(long)]
        tau_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Model parameters from material constants.
    Materials,
    /// Minimal g²(0) over Δ along one axis ([sweep]).
    Sweep,
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            RunConfig::parse(&text).map_err(|e| match e {
                CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
                other => other,
            })?
        }
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.output.dir = out.to_string_lossy().into_owned();
    }
    match &cli.command {
        Some(Command::Spectrum { alpha_sq: Some(a) }) => cfg.spectrum.alpha_sq = a.clone(),
        Some(Command::G2tau { tau_max, points }) => {
            if let Some(t) = tau_max {
                cfg.g2tau.tau_max = *t;
            }
            if let Some(n) = points {
                cfg.g2tau.points = *n;
            }
        }
        _ => {}
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = load(&cli)?;
    if cli.dump_config {
        print!("{}", cfg.dump());
        return Ok(());
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        None => Err(CliError::Config("no subcommand given (see --help)".into())),
        Some(Command::Spectrum { .. }) => commands::spectrum(&cfg),
        Some(Command::G2scan) => commands::scan(&cfg, &cfg.g2scan, "g2scan"),
        Some(Command::Sweep) => commands::scan(&cfg, &(&cfg.sweep).into(), "sweep"),
        Some(Command::G2tau { .. }) => commands::g2tau(&cfg),
        Some(Command::Materials) => commands::materials(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("trionpol: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
