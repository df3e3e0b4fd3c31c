//! `decay`: survival amplitudes, self-energies and weak-coupling scaling
//! for a two-level system coupled to a continuum.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use decay_core::selfenergy::Sheet;
use decay_core::DecayError;
use thiserror::Error;

use commands::EnergyRange;
use config::{config_err, Flags, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(DecayError),
    #[error("output: {0}")]
    Io(String),
}

impl From<DecayError> for CliError {
    fn from(e: DecayError) -> Self {
        match e {
            DecayError::InvalidParameter(m) => CliError::Config(m),
            other => CliError::Numerical(other),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "decay", version, about = "Quantum decay of an unstable level coupled to a continuum")]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coupling, cutoff, level energy and the derived time scales
    Constants,
    /// Self-energy along a line in the complex energy plane (internal units)
    Selfenergy {
        #[arg(long)]
        emin: Option<f64>,
        #[arg(long)]
        emax: Option<f64>,
        #[arg(long)]
        ecount: Option<usize>,
        /// imaginary part of the energy
        #[arg(long)]
        eim: Option<f64>,
        /// first | second
        #[arg(long)]
        sheet: Option<String>,
    },
    /// Resonance pole on the second sheet
    Pole,
    /// Survival amplitude on a time grid
    Survival,
    /// Long-time coefficients and the power-law crossover time
    Asymptotics,
    /// Rescaled time scales and deviation from the exponential over couplings
    VanhoveSweep {
        /// comma-separated, strictly decreasing couplings
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
        /// write the fitted exponents as JSON here
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Memory-kernel solution against the exponential law
    KernelCompare {
        /// dispersive | markovian
        #[arg(long)]
        kernel: Option<String>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Ok(v) = std::env::var("DECAY_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| config_err(format!("DECAY_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| config_err(e.to_string()))?;
    }
    let flags = &cli.flags;
    match cli.command {
        Command::Constants => commands::constants(&RunConfig::build(flags, &[])?),
        Command::Selfenergy {
            emin,
            emax,
            ecount,
            eim,
            sheet,
        } => {
            let cfg = RunConfig::build(flags, &["emin", "emax", "ecount", "eim", "sheet"])?;
            let sheet = match cfg.extra(sheet, "sheet")?.as_deref().unwrap_or("first") {
                "first" => Sheet::First,
                "second" => Sheet::Second,
                other => return Err(config_err(format!("unknown sheet {other:?}"))),
            };
            let w0 = cfg.params.omega0_internal();
            let range = EnergyRange {
                emin: cfg.extra(emin, "emin")?.unwrap_or(0.0),
                emax: cfg.extra(emax, "emax")?.unwrap_or(4.0 * w0),
                count: cfg.extra(ecount, "ecount")?.unwrap_or(201),
                imag: cfg.extra(eim, "eim")?.unwrap_or(0.0),
                sheet,
            };
            commands::selfenergy(&cfg, &range)
        }
        Command::Pole => commands::pole(&RunConfig::build(flags, &[])?),
        Command::Survival => commands::survival_cmd(&RunConfig::build(flags, &[])?),
        Command::Asymptotics => commands::asymptotics(&RunConfig::build(flags, &[])?),
        Command::VanhoveSweep { lambdas, summary } => {
            let cfg = RunConfig::build(flags, &["lambdas", "summary"])?;
            let lambdas = match lambdas {
                Some(l) => l,
                None => match cfg.extra.get("lambdas") {
                    Some(s) => s
                        .split(',')
                        .map(|x| x.trim().parse::<f64>())
                        .collect::<Result<_, _>>()
                        .map_err(|_| config_err(format!("cannot parse lambdas {s:?}")))?,
                    None => vec![3e-2, 1e-2, 3e-3, 1e-3],
                },
            };
            let summary = cfg.extra(summary.map(|p| p.display().to_string()), "summary")?;
            commands::vanhove_sweep(&cfg, &lambdas, summary.as_deref().map(std::path::Path::new))
        }
        Command::KernelCompare { kernel } => {
            let cfg = RunConfig::build(flags, &["kernel"])?;
            let markovian = match cfg.extra(kernel, "kernel")?.as_deref().unwrap_or("dispersive") {
                "dispersive" => false,
                "markovian" => true,
                other => return Err(config_err(format!("unknown kernel {other:?}"))),
            };
            commands::kernel_compare(&cfg, markovian)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("decay: {e}");
            ExitCode::from(e.code())
        }
    }
}
