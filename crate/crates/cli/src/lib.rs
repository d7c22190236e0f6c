//! Command-line front-end for `kgcoherent`.
//!
//! Exit codes: 0 on success, 1 when a verification fails or a computation
//! errors, 2 for usage and validation errors.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use kgcoherent::Complex64;

pub mod commands;
pub mod config;
pub mod figures;
pub mod output;
pub mod verify;

use config::{Branch, Method, ModelSelector, OutputFormat, Overrides, RunConfig};
use figures::FigureSelection;
use verify::Suite;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<kgcoherent::Error> for CliError {
    fn from(e: kgcoherent::Error) -> Self {
        use kgcoherent::Error as E;
        match e {
            E::InvalidArgument(msg) | E::Configuration(msg) => CliError::Usage(msg),
            E::Domain(msg) => CliError::Usage(format!("domain error: {msg}")),
            other => CliError::Failure(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "kgcoherent",
    version,
    about = "Coherent states of a Klein-Gordon particle in linear and Pöschl-Teller scalar potentials",
    allow_negative_numbers = true
)]
pub struct Cli {
    #[command(flatten)]
    pub flags: Flags,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy levels E_n and Schrödinger eigenvalues ε_n.
    Spectrum,
    /// Coherent-state expansion coefficients.
    State,
    /// Time series of Δx, Δp, their product, ⟨x⟩ and ⟨p⟩.
    Evolve,
    /// Regenerate figure data (fig1..fig11 or all) as CSV plus metadata.
    Figures {
        #[arg(value_parser = parse_figure)]
        figure: FigureSelection,
    },
    /// Run an invariant suite (spectra, coherence, measure, oracle, all).
    Verify {
        #[arg(value_parser = parse_suite)]
        suite: Suite,
    },
    /// Check the moments of the Pöschl-Teller measure weight.
    MeasureCheck,
    /// Compare finite-difference and analytic spectra.
    Oracle,
}

fn parse_figure(s: &str) -> Result<FigureSelection, String> {
    s.parse()
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse()
}

fn parse_alpha(s: &str) -> Result<Complex64, String> {
    config::parse_complex(s)
}

/// Options shared by every subcommand. Each one can also be set in the
/// `--config` file under the same name.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// key=value file with defaults for any of the options below.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print the effective configuration as a config file and exit.
    #[arg(long, global = true)]
    pub dump_config: bool,
    #[arg(long, global = true, value_enum)]
    pub model: Option<ModelSelector>,
    /// Particle mass.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub m: Option<f64>,
    /// Linear-potential coupling.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub k: Option<f64>,
    /// Pöschl-Teller frequency.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub branch: Option<Branch>,
    /// Coherent-state label, e.g. 0.1+0.2i.
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = parse_alpha)]
    pub alpha: Option<Complex64>,
    /// Truncation order (state, evolve) or number of levels (spectrum, oracle).
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Start time.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub t0: Option<f64>,
    /// End time.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub t1: Option<f64>,
    /// Time step.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub dt: Option<f64>,
    /// Grid point count for quadrature or the finite-difference oracle.
    #[arg(long, global = true)]
    pub grid_points: Option<usize>,
    /// Left edge of the quadrature grid.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub x_min: Option<f64>,
    /// Right edge of the quadrature grid.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub x_max: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Directory for `figures` output.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long, global = true, value_enum)]
    pub method: Option<Method>,
    /// Highest moment order for measure checks.
    #[arg(long, global = true)]
    pub n_max: Option<usize>,
    /// Relative tolerance for measure checks.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tol: Option<f64>,
}

impl Flags {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            model: self.model,
            m: self.m,
            k: self.k,
            omega: self.omega,
            branch: self.branch,
            alpha: self.alpha,
            n: self.n,
            t0: self.t0,
            t1: self.t1,
            dt: self.dt,
            grid_points: self.grid_points,
            x_min: self.x_min,
            x_max: self.x_max,
            output: self.output.clone(),
            output_dir: self.output_dir.clone(),
            format: self.format,
            method: self.method,
            n_max: self.n_max,
            tol: self.tol,
        }
    }
}

/// Effective configuration for parsed arguments.
pub fn effective_config(flags: &Flags) -> Result<RunConfig, CliError> {
    let file = flags.config.as_deref().map(Overrides::from_config_file).transpose()?;
    let env_dir = std::env::var_os(config::OUTPUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
    let config = RunConfig::resolve(file.as_ref(), env_dir, &flags.overrides());
    config.validate()?;
    Ok(config)
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs the parsed command; `Ok(false)` signals a failed verification.
pub fn execute(cli: &Cli) -> Result<bool, CliError> {
    let config = effective_config(&cli.flags)?;
    if cli.flags.dump_config {
        print!("{}", config.to_config_text());
        return Ok(true);
    }
    commands::dispatch(&cli.command, &config)
}
