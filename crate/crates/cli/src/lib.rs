//! Command-line front-end for `clonebound`: bound curves, lemma sweeps,
//! cloner reports and tightness verification, emitted as CSV and JSON.
//!
//! The binary is a thin wrapper around [`run`]; exit codes follow [`exit`].

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod manifest;

pub use manifest::RunManifest;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 1;
    pub const IO: u8 = 2;
    pub const INVARIANT: u8 = 3;
    pub const ATTAINMENT: u8 = 4;
}

/// Largest accepted gap between a searched optimum and its bound.
pub const ATTAINMENT_TOL: f64 = 1e-5;

#[derive(Debug, Parser)]
#[command(name = "clonebound", version, about = "Error bounds for state-dependent cloning of two pure states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the bound curves to fig1.csv and fig2.csv
    Bounds(BoundsArgs),
    /// Build a cloner for a pair of states and report its errors
    Cloner(ClonerArgs),
    /// Run the randomized lemma sweeps and the equality witnesses
    Lemmas(LemmasArgs),
    /// Minimise AE and RE numerically and check them against the bounds
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, default_value_t = 0.0)]
    pub z_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub z_max: f64,
    /// Grid points, endpoints included
    #[arg(long, default_value_t = 201)]
    pub steps: usize,
    /// Output directory
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Sym,
    Asym,
    Wz,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FavoredArg {
    Phi,
    Psi,
}

#[derive(Debug, Args)]
pub struct ClonerArgs {
    #[arg(value_enum)]
    pub kind: Kind,
    /// Overlap of the canonical pair
    #[arg(long, conflicts_with = "states", required_unless_present = "states")]
    pub z: Option<f64>,
    /// JSON file holding two arrays of [re, im] pairs
    #[arg(long)]
    pub states: Option<PathBuf>,
    /// Dimension of the canonical pair
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// State copied exactly by the asymmetric cloner
    #[arg(long, value_enum, default_value_t = FavoredArg::Phi)]
    pub favored: FavoredArg,
    /// Report path; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LemmasArgs {
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Dimension range, e.g. `2-8`
    #[arg(long, default_value = "2-8")]
    pub dims: String,
    #[arg(long, env = "CLONEBOUND_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = "CLONEBOUND_TOL", default_value_t = 1e-10)]
    pub tol: f64,
    /// JSON report path
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Overlaps to verify, comma separated, each in (0, 0.99]
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.3,0.5,0.5773502691896257,0.7,0.9")]
    pub z: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, env = "CLONEBOUND_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Random realisable pairs sampled per overlap
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Nelder–Mead iterations per start
    #[arg(long, default_value_t = 400)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 4)]
    pub subspace_dim: usize,
    /// JSON report path
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: exit::USAGE, message: message.into() }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        CliError { code: exit::IO, message: format!("{}: {err}", path.display()) }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<clonebound::Error> for CliError {
    fn from(e: clonebound::Error) -> Self {
        CliError::usage(e.to_string())
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Bounds(a) => commands::bounds(&a),
        Command::Cloner(a) => commands::cloner(&a),
        Command::Lemmas(a) => commands::lemmas(&a),
        Command::Verify(a) => commands::verify(&a),
    }
}
