//! Command-line front end: wires game files, the three integrators, the
//! equilibrium and entropy analyzers and the coarsening model to JSON and CSV.
//!
//! Exit codes: 0 on success, 2 for invalid input, 3 when a run aborts on a
//! numerical invariant.

pub mod commands;
pub mod config;
pub mod error;
pub mod game_file;
pub mod table;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{Form, RunConfig};
pub use error::{CliError, CliResult, EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK};
pub use game_file::{load_game, parse_game};

#[derive(Debug, Parser)]
#[command(name = "evoquant", version, about = "Replicator dynamics in vector, Lax-matrix and density-operator form")]
pub struct Cli {
    /// Seed for every random choice (ESS mutant sampling).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one form and write its trajectory as CSV.
    Simulate(SimulateArgs),
    /// Enumerate symmetric Nash equilibria and print them as JSON.
    Equilibria(EquilibriaArgs),
    /// Run all three forms and report their divergence and invariant drift.
    Compare(CompareArgs),
    /// Append entropy columns to a trajectory CSV.
    Entropy(EntropyArgs),
    /// Run the cluster coarsening model.
    Thermalize(ThermalizeArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Game JSON file.
    #[arg(long)]
    pub game: PathBuf,
    /// Initial mixed strategy, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: String,
    #[arg(long)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Record every `stride`-th step (the final step is always recorded).
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// Reduced Planck constant for the density-operator form.
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_enum, default_value_t = Form::Vector)]
    pub form: Form,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EquilibriaArgs {
    #[arg(long)]
    pub game: PathBuf,
    #[arg(long, default_value_t = evoquant_core::game::DEFAULT_TOL)]
    pub tol: f64,
    /// Random mixed mutants tried per ESS check.
    #[arg(long, default_value_t = evoquant_core::game::DEFAULT_MUTANT_SAMPLES)]
    pub mutants: usize,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    /// Trajectory CSV written by `simulate`.
    #[arg(long)]
    pub traj: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ThermalizeArgs {
    /// Initial cluster temperatures, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub temps: String,
    /// Cluster weights; all 1 when omitted.
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long)]
    pub kappa: f64,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs the CLI against the process streams.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the CLI with explicit output streams and returns the exit code.
/// `args` includes the program name.
pub fn run_cli_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_INPUT;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match commands::dispatch(&cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
