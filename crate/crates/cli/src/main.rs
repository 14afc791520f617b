//! `gaplab`: command-line laboratory for the entropy-gap model.
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical failure,
//! 4 invariant-suite failure. Diagnostics go to stderr, data to stdout.

mod commands;
mod emit;

use clap::{Parser, Subcommand};
use commands::{CurveOpts, Fig1Opts, OracleOpts, SweepOpts};
use emit::OutputFormat;
use gaplab_core::check::FaultInjection;
use gaplab_core::critical_times::{SolveError, DEFAULT_DECOUPLING_TIME_YEARS};
use gaplab_core::gap_model::GapError;
use gaplab_core::spectral_oracle::SpectralError;
use gaplab_core::{ModelParams, ParamError, ParamOverrides};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "gaplab",
    version,
    about = "Entropy gap of an expanding matter-radiation system: evaluation, critical times, curves, sweeps, and exact spectral verification",
    after_help = "Parameters resolve in order: fiducial defaults, then --config, then flags.\n\
                  Config keys: temp_nr_kelvin, t_nr_years, t_0_years, temp_0_kelvin.\n\
                  Exit codes: 0 ok, 2 validation error, 3 numerical failure, 4 failed checks."
)]
struct Cli {
    /// Plain-text key=value parameter file
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Characteristic nuclear energy as a temperature, Kelvin
    #[arg(long, global = true, value_name = "KELVIN")]
    temp_nr: Option<f64>,

    /// Mean nuclear lifetime, years
    #[arg(long, global = true, value_name = "YEARS")]
    t_nr: Option<f64>,

    /// Age of the universe, years
    #[arg(long = "t0", global = true, value_name = "YEARS")]
    t_0: Option<f64>,

    /// Present radiation temperature, Kelvin
    #[arg(long = "temp0", global = true, value_name = "KELVIN")]
    temp_0: Option<f64>,

    /// Decoupling time: roots earlier than this are flagged invalid
    #[arg(long, global = true, value_name = "YEARS", default_value_t = DEFAULT_DECOUPLING_TIME_YEARS)]
    t_dec: f64,

    /// Stream format for tabular commands
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate temperature, relative log gap, rate, and phase at one time
    Eval {
        /// Evaluation time, years
        #[arg(long, value_name = "YEARS")]
        t: f64,
    },
    /// Solve for the critical times and compare with the asymptotic forms
    Crit,
    /// Sample the gap evolution curve over a log time grid
    Curve {
        #[arg(long, value_name = "YEARS", default_value_t = 1e3)]
        t_min: f64,
        #[arg(long, value_name = "YEARS", default_value_t = 1e16)]
        t_max: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
        /// Reference time for the relative log gap (defaults to t_0)
        #[arg(long, value_name = "YEARS")]
        t_ref: Option<f64>,
    },
    /// Maximum-vs-actual entropy backdrop with a normalized dip
    Fig1 {
        /// Dip depth at the late critical time, in (0, 1)
        #[arg(long, default_value_t = 0.1)]
        epsilon_plot: f64,
        #[arg(long, value_name = "YEARS", default_value_t = 1e3)]
        t_min: f64,
        #[arg(long, value_name = "YEARS", default_value_t = 1e16)]
        t_max: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
    /// Critical-time report over a log grid of nuclear parameters
    Sweep {
        #[arg(long, value_name = "KELVIN", default_value_t = 1e6)]
        temp_nr_min: f64,
        #[arg(long, value_name = "KELVIN", default_value_t = 1e8)]
        temp_nr_max: f64,
        #[arg(long, value_name = "YEARS", default_value_t = 1e6)]
        t_nr_min: f64,
        #[arg(long, value_name = "YEARS", default_value_t = 1e9)]
        t_nr_max: f64,
        /// Points per axis
        #[arg(long, default_value_t = 10)]
        points: usize,
    },
    /// Exact spectral verification table with the measured scaling exponent
    Oracle {
        /// Deviation amplitude before decay
        #[arg(long, default_value_t = 0.1)]
        amplitude: f64,
        #[arg(long, default_value_t = 2048)]
        grid_points: usize,
        /// Number of time samples (the effective amplitude decays through
        /// three decades across them)
        #[arg(long, default_value_t = 25)]
        points: usize,
        /// Report the quadratic column in the first-order decay convention
        #[arg(long)]
        paper_literal: bool,
    },
    /// Run the full invariant suite; exit 0 only if everything passes
    Check {
        /// Deliberately inject a documented defect to prove the suite fails
        #[arg(long, value_enum)]
        inject_fault: Option<FaultArg>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum FaultArg {
    MisprintExponent,
    DropQuadraticHalf,
}

impl From<FaultArg> for FaultInjection {
    fn from(value: FaultArg) -> Self {
        match value {
            FaultArg::MisprintExponent => FaultInjection::MisprintExponent,
            FaultArg::DropQuadraticHalf => FaultInjection::DropQuadraticHalf,
        }
    }
}

/// Application-level failure with its exit code.
#[derive(Debug)]
pub enum AppError {
    Validation(String),
    Numerical(String),
    CheckFailed(String),
    Io(String),
}

impl AppError {
    fn message(&self) -> String {
        match self {
            AppError::Validation(m) => format!("validation error: {m}"),
            AppError::Numerical(m) => format!("numerical failure: {m}"),
            AppError::CheckFailed(names) => format!("failing checks: {names}"),
            AppError::Io(m) => format!("io error: {m}"),
        }
    }

    fn code(&self) -> u8 {
        match self {
            AppError::Validation(_) => 2,
            AppError::Numerical(_) => 3,
            AppError::CheckFailed(_) => 4,
            AppError::Io(_) => 3,
        }
    }
}

impl From<ParamError> for AppError {
    fn from(e: ParamError) -> Self {
        AppError::Validation(e.to_string())
    }
}

impl From<SolveError> for AppError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::InvalidDecouplingTime { .. } => AppError::Validation(e.to_string()),
            SolveError::NoConvergence { .. } => AppError::Numerical(e.to_string()),
        }
    }
}

impl From<GapError> for AppError {
    fn from(e: GapError) -> Self {
        match e {
            GapError::ExpRangeExceeded { .. } => AppError::Numerical(e.to_string()),
            GapError::Solve(inner) => inner.into(),
            _ => AppError::Validation(e.to_string()),
        }
    }
}

impl From<SpectralError> for AppError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::DegenerateState
            | SpectralError::InfiniteDivergence { .. }
            | SpectralError::WienOverflow { .. } => AppError::Numerical(e.to_string()),
            _ => AppError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e.to_string())
    }
}

fn resolve_params(cli: &Cli) -> Result<ModelParams, AppError> {
    let mut overrides = ParamOverrides::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| {
            AppError::Validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        overrides = ParamOverrides::from_config_str(&text)?;
    }
    let flags = ParamOverrides {
        temp_nr: cli.temp_nr,
        t_nr: cli.t_nr,
        t_0: cli.t_0,
        temp_0: cli.temp_0,
    };
    Ok(overrides.merged_with(flags).resolve()?)
}

fn run(cli: &Cli, w: &mut impl Write) -> Result<(), AppError> {
    match &cli.command {
        Command::Eval { t } => {
            let p = resolve_params(cli)?;
            commands::run_eval(w, &p, *t, cli.t_dec)
        }
        Command::Crit => {
            let p = resolve_params(cli)?;
            commands::run_crit(w, &p, cli.t_dec)
        }
        Command::Curve {
            t_min,
            t_max,
            points,
            t_ref,
        } => {
            let p = resolve_params(cli)?;
            commands::run_curve(
                w,
                &p,
                &CurveOpts {
                    t_min: *t_min,
                    t_max: *t_max,
                    points: *points,
                    reference_time: *t_ref,
                    t_dec: cli.t_dec,
                    format: cli.format,
                },
            )
        }
        Command::Fig1 {
            epsilon_plot,
            t_min,
            t_max,
            points,
        } => {
            let p = resolve_params(cli)?;
            commands::run_fig1(
                w,
                &p,
                &Fig1Opts {
                    epsilon_plot: *epsilon_plot,
                    t_min: *t_min,
                    t_max: *t_max,
                    points: *points,
                    format: cli.format,
                },
            )
        }
        Command::Sweep {
            temp_nr_min,
            temp_nr_max,
            t_nr_min,
            t_nr_max,
            points,
        } => {
            let p = resolve_params(cli)?;
            commands::run_sweep(
                w,
                &p,
                &SweepOpts {
                    temp_nr_min: *temp_nr_min,
                    temp_nr_max: *temp_nr_max,
                    t_nr_min: *t_nr_min,
                    t_nr_max: *t_nr_max,
                    points_per_axis: *points,
                    t_dec: cli.t_dec,
                    format: cli.format,
                },
            )
        }
        Command::Oracle {
            amplitude,
            grid_points,
            points,
            paper_literal,
        } => {
            let p = resolve_params(cli)?;
            commands::run_oracle(
                w,
                &p,
                &OracleOpts {
                    amplitude: *amplitude,
                    grid_points: *grid_points,
                    t_points: *points,
                    paper_literal: *paper_literal,
                    format: cli.format,
                },
            )
        }
        Command::Check { inject_fault } => {
            commands::run_check(w, inject_fault.map(FaultInjection::from))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    let result = run(&cli, &mut out);
    if let Err(e) = out.flush() {
        eprintln!("gaplab: io error: {e}");
        return ExitCode::from(3);
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gaplab: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
