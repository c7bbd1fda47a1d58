//! Command-line frontend for the `nobind` library.
//!
//! [`run`] is the whole program; `main` only forwards the process arguments
//! and exit status, so the tests drive it in-process.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use config::{Format, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(#[from] nobind::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => EXIT_IO,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "nobind", version, about = "Critical masses, bound-state counts and binding phase diagrams")]
pub struct Cli {
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags that override fields of the loaded config.
#[derive(Debug, Default, Clone, Args)]
pub struct Overrides {
    /// TOML config file (the built-in default is used when absent).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Particle mass.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub m: Option<f64>,
    /// Field coupling.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Energy gap ε > 0 used for m_ε and α_ε.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub eps: Option<f64>,
    /// Target coupling gap for `design`.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    #[arg(long = "D", global = true, allow_negative_numbers = true)]
    pub d_const: Option<f64>,
    #[arg(long = "eps-var", global = true, allow_negative_numbers = true)]
    pub eps_var: Option<f64>,
    /// Spectral parameter E ≤ 0 for `count`.
    #[arg(long = "E", global = true, allow_negative_numbers = true)]
    pub energy: Option<f64>,
    /// Write the table here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// m_c and m_ε with error estimates.
    CriticalMass,
    /// Verdict grid over the configured masses and couplings.
    PhaseDiagram,
    /// Birman–Schwinger and ODE oracle eigenvalue counts per sector.
    Count,
    /// m_eff, g, Φ, cutoff norms and the cutoff validation report.
    FieldConstants,
    /// Potential scaling κ that closes the coupling gap below δ.
    Design,
    /// Runs the invariant suite on the configured potential and cutoff.
    Verify,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        let p = &mut cfg.params;
        if let Some(v) = self.m {
            p.m = v;
        }
        if let Some(v) = self.alpha {
            p.alpha = v;
        }
        if let Some(v) = self.eps {
            p.eps = v;
        }
        if let Some(v) = self.energy {
            p.energy = v;
        }
        if let Some(v) = self.delta {
            cfg.design.delta = v;
        }
        if let Some(v) = self.d_const {
            cfg.design.d_const = v;
        }
        if let Some(v) = self.eps_var {
            cfg.design.eps_var = v;
        }
        if let Some(v) = &self.out {
            cfg.output.path = Some(v.clone());
        }
        if let Some(v) = self.format {
            cfg.output.format = v;
        }
        if let Some(v) = self.workers {
            cfg.output.workers = Some(v);
        }
    }

    /// Loads the config (or the built-in default), applies the flags and validates.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default_config(),
        };
        self.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = cli.overrides.resolve()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.output.workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("output.workers: {e}")))?;
    let (table, code) = pool.install(|| commands::dispatch(cli.command, &cfg))?;
    match &cfg.output.path {
        Some(path) => {
            let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
            table.write(cfg.output.format, &mut file)?;
            file.flush()?;
        }
        None => table.write(cfg.output.format, out)?,
    }
    Ok(code)
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Tables go to `out` (or the configured file), diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "nobind: {e}");
            e.exit_code()
        }
    }
}
