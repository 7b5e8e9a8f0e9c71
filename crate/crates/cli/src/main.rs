//! `tiltbell`: single-point reports, strategies, NPA bounds, figure-ready
//! grid scans and the acceptance suite for the doubly-tilted CHSH family.

mod commands;
mod output;
mod params;
mod scan;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::output::{Format, FormatArgs};
use crate::params::PointArgs;

/// Exit status for invalid flag values and other usage errors.
pub const EXIT_USAGE: u8 = 2;
/// Exit status when a computation fails numerically.
pub const EXIT_NUMERIC: u8 = 3;
/// Exit status when `verify` finds a failing criterion.
pub const EXIT_ACCEPTANCE: u8 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "tiltbell",
    version,
    about = "Maximal loophole-free CHSH nonlocality under detector inefficiency",
    long_about = "Computes the doubly-tilted CHSH functional for a pair of detector efficiencies, its \
                  maximal quantum value and optimal two-qubit strategy in closed form, NPA upper bounds, \
                  and figure-ready grid scans.\n\n\
                  Parameters are given either as efficiencies (--etaA/--etaB, each defaulting to 1) or as \
                  tilts (--alpha/--beta, each defaulting to 0); the two pairs are mutually exclusive.\n\n\
                  Exit codes: 0 ok, 2 usage error, 3 numeric failure, 4 acceptance failure."
)]
struct Cli {
    /// Write output to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Everything about one parameter point: bounds, maximal value, strategy and effective CHSH values.
    Report(PointCmd),
    /// Maximal quantum value of the tilted functional with the optimal cosines.
    Qvalue(PointCmd),
    /// Optimal two-qubit strategy: cosines, state, Schmidt coefficient, eigenvalue and spectral gap.
    Strategy(PointCmd),
    /// The tilted functional for one deterministic assignment, with its coefficient tensor.
    Tilt(TiltCmd),
    /// All 16 deterministic assignments with their tilted bounds and effective CHSH values.
    Assignments(PointCmd),
    /// NPA upper bound on the maximal quantum value at one hierarchy level.
    Npa(NpaCmd),
    /// Minimum tight NPA level over a grid of tilts (CSV: alpha, beta, minTightLevel, status).
    NpaMap(scan::NpaMapCmd),
    /// Grid scan over the efficiency or tilt plane (CSV, one row per point, row-major).
    Scan(scan::ScanCmd),
    /// Run the acceptance suite and print one pass/fail line per criterion.
    Verify(VerifyCmd),
}

#[derive(Debug, Args)]
struct PointCmd {
    #[command(flatten)]
    point: PointArgs,
    #[command(flatten)]
    format: FormatArgs,
}

#[derive(Debug, Args)]
struct TiltCmd {
    #[command(flatten)]
    point: PointArgs,
    /// Assignment bits s_A,s_B,r_A,r_B: Alice outputs (-1)^(s_A + r_A x), Bob (-1)^(s_B + r_B y).
    #[arg(long, value_name = "BITS", default_value = "0,0,0,0")]
    assignment: String,
    #[command(flatten)]
    format: FormatArgs,
}

#[derive(Debug, Args)]
struct NpaCmd {
    #[command(flatten)]
    point: PointArgs,
    /// Hierarchy level: 1, 1+AB, 2, 3, ...
    #[arg(long, default_value = "1+AB")]
    level: String,
    /// Relative duality-gap tolerance of the SDP solver (at least 1e-10).
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Allow full levels above 3 (results below ~1e-8 are not resolvable in double precision).
    #[arg(long)]
    allow_high_level: bool,
    #[command(flatten)]
    format: FormatArgs,
}

#[derive(Debug, Args)]
struct VerifyCmd {
    /// Add this amount to the lambda^4 coefficient of the general sextic (mutation test).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    tamper_tau4: f64,
    /// SDP solver tolerance used by the NPA criteria.
    #[arg(long, default_value_t = 1e-9)]
    npa_tol: f64,
    /// Grid size of the brute-force oracle (at least 32).
    #[arg(long, default_value_t = 32)]
    oracle_grid: usize,
    /// Do not fail criteria for exceeding their runtime budgets.
    #[arg(long)]
    no_time_limits: bool,
    /// Run only these criteria (comma-separated ids, default all).
    #[arg(long, value_delimiter = ',', value_name = "IDS")]
    only: Vec<u8>,
    /// Emit a JSON document instead of the table.
    #[arg(long)]
    json: bool,
}

/// A failed command, mapped to an exit status by [`CliError::exit_code`].
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{passed}/{total} acceptance criteria passed")]
    Acceptance { passed: usize, total: usize },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numeric(_) | CliError::Io(_) | CliError::Csv(_) => EXIT_NUMERIC,
            CliError::Acceptance { .. } => EXIT_ACCEPTANCE,
        }
    }
}

impl From<tiltbell::Error> for CliError {
    fn from(e: tiltbell::Error) -> Self {
        use tiltbell::Error as E;
        match e {
            E::EfficiencyOutOfRange { .. }
            | E::ZeroEfficiency { .. }
            | E::TiltOutOfRange { .. }
            | E::CosineOutOfRange { .. }
            | E::BelowHalf(_)
            | E::LevelTooLarge(_)
            | E::InvalidArgument(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn run(cli: Cli) -> CliResult<()> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::Report(c) => commands::report(&c.point, c.format.format(Format::Json), out),
        Command::Qvalue(c) => commands::qvalue(&c.point, c.format.format(Format::Text), out),
        Command::Strategy(c) => commands::strategy(&c.point, c.format.format(Format::Json), out),
        Command::Tilt(c) => commands::tilt(&c.point, &c.assignment, c.format.format(Format::Json), out),
        Command::Assignments(c) => commands::assignments(&c.point, c.format.format(Format::Text), out),
        Command::Npa(c) => commands::npa(
            &c.point,
            &c.level,
            c.tol,
            c.allow_high_level,
            c.format.format(Format::Json),
            out,
        ),
        Command::NpaMap(c) => scan::npa_map(&c, out),
        Command::Scan(c) => scan::scan(&c, out),
        Command::Verify(c) => commands::verify(
            &tiltbell::acceptance::VerifyConfig {
                tau4_perturbation: c.tamper_tau4,
                npa_tol: c.npa_tol,
                oracle_grid: c.oracle_grid,
                enforce_time_limits: !c.no_time_limits,
            },
            &c.only,
            c.json,
            out,
        ),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tiltbell: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
