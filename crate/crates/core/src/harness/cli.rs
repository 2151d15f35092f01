//! Command-line front end of the `pam` binary.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::checks::{run_correction, run_first_order_check, run_k_convergence};
use super::config::{parse_list, ExperimentConfig, PhiSpec};
use super::ladder::run_ladder;
use super::report::{emit, Format};
use crate::error::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "pam",
    version,
    about = "Wick vs Stratonovich spectral experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// ε-ladder of Wick and Stratonovich solutions.
    Ladder(Common),
    /// Agreement of the three first-order computations.
    FirstOrder(Common),
    /// Stratonovich solution at K, 2K, 4K modes.
    KConvergence(Common),
    /// Correction field at t = T.
    Correction(Common),
}

#[derive(Args, Debug, Default)]
pub struct Common {
    /// JSON config file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long)]
    pub diag_modes: Option<usize>,
    #[arg(long)]
    pub chaos_order: Option<usize>,
    /// Horizon T; also the only reporting time.
    #[arg(long)]
    pub time: Option<f64>,
    /// Comma-separated points in [0, π].
    #[arg(long)]
    pub x_grid: Option<String>,
    /// Comma-separated, strictly decreasing.
    #[arg(long)]
    pub eps: Option<String>,
    /// Comma-separated seeds.
    #[arg(long)]
    pub seeds: Option<String>,
    /// `sin`, `bump` or `coeffs:a,b,...`.
    #[arg(long)]
    pub phi: Option<String>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// `csv` or `json`.
    #[arg(long, default_value = "csv")]
    pub format: String,
    /// Output file; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Common {
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                ExperimentConfig::from_json(&text)?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.modes {
            c.modes = v;
        }
        if let Some(v) = self.diag_modes {
            c.diag_modes = v;
        }
        if let Some(v) = self.chaos_order {
            c.chaos_order = v;
        }
        if let Some(v) = self.time {
            c.horizon = v;
            c.t_report = vec![v];
        }
        if let Some(v) = &self.x_grid {
            c.x_grid = parse_list(v)?;
        }
        if let Some(v) = &self.eps {
            c.eps_ladder = parse_list(v)?;
        }
        if let Some(v) = &self.seeds {
            c.seeds = parse_list(v)?;
        }
        if let Some(v) = &self.phi {
            c.phi = PhiSpec::parse(v)?;
        }
        if let Some(v) = self.steps {
            c.steps_per_interval = v;
        }
        if let Some(v) = self.gamma {
            c.gamma = v;
        }
        c.validate()?;
        Ok(c)
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Usage(_) => EXIT_CONFIG,
        Error::Io { .. } | Error::Serde(_) => EXIT_IO,
        _ => EXIT_NUMERICAL,
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let common = match &cli.command {
        Command::Ladder(c)
        | Command::FirstOrder(c)
        | Command::KConvergence(c)
        | Command::Correction(c) => c,
    };
    let format: Format = common.format.parse()?;
    let config = common.resolve()?;
    let out = common.out.as_deref();
    match &cli.command {
        Command::Ladder(_) => {
            let report = run_ladder(&config)?;
            emit(&report, format, out)?;
            if report.failures() > 0 {
                return Ok(EXIT_NUMERICAL);
            }
        }
        Command::FirstOrder(_) => emit(&run_first_order_check(&config)?, format, out)?,
        Command::KConvergence(_) => emit(&run_k_convergence(&config)?, format, out)?,
        Command::Correction(_) => emit(&run_correction(&config)?, format, out)?,
    }
    Ok(EXIT_OK)
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn main_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("pam: {e}");
            exit_code(&e)
        }
    }
}
