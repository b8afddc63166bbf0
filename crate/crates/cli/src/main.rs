use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

/// Pitchfork-coupled network dynamics toolkit.
#[derive(Debug, Parser)]
#[command(name = "pitchnet", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the dynamics and write the trajectory as CSV.
    Simulate(SimulateArgs),
    /// List all detailed-balance stationary states with stability reports.
    Enumerate(EnumerateArgs),
    /// Bifurcation data (stable branches) over a grid of r.
    Sweep(SweepArgs),
    /// Effective resistance and single-consensus verdict per link.
    Resistance(ResistanceArgs),
    /// Validate an equitable partition and lift quotient states.
    Quotient(QuotientArgs),
}

#[derive(Debug, Args)]
pub struct GraphSource {
    /// Graph JSON file: {"nodes": N, "edges": [[i, j], ...]}.
    #[arg(long, conflicts_with_all = ["family", "n"])]
    pub graph: Option<PathBuf>,
    /// Named family: k2, path, cycle, star, complete, barbell, binary-tree,
    /// wheel, parallel-paths.
    #[arg(long, requires = "n")]
    pub family: Option<String>,
    /// Size parameter of the family.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long, allow_negative_numbers = true)]
    pub r: f64,
    /// Initial state as a JSON array of node values.
    #[arg(long, conflicts_with = "seed")]
    pub x0: Option<PathBuf>,
    /// Seed for a random initial state in [-2√|r|, 2√|r|]^N.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Step size; defaults to 1e-3·min(1, 1/|r|).
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value_t = 10.0)]
    pub t_end: f64,
    /// rk4 or euler.
    #[arg(long, default_value = "rk4")]
    pub method: pitchnet::Method,
    /// Keep every k-th step in the CSV.
    #[arg(long, default_value_t = 10)]
    pub sample_every: usize,
    /// Trajectory CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary JSON; stderr when omitted.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long, allow_negative_numbers = true)]
    pub r: f64,
    /// Largest link count accepted for enumeration.
    #[arg(long, env = "PITCHNET_CAP", default_value_t = pitchnet::stationary::DEFAULT_ENUMERATION_CAP)]
    pub cap: usize,
    /// Report JSON; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// k2, complete or barbell.
    #[arg(long)]
    pub family: String,
    /// Clique size for complete and barbell.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Single value of r instead of a grid.
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["r_min", "r_max", "r_steps"])]
    pub r: Option<f64>,
    #[arg(long, allow_negative_numbers = true, default_value_t = -1.0)]
    pub r_min: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 21)]
    pub r_steps: usize,
    /// CSV output; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ResistanceArgs {
    #[command(flatten)]
    pub source: GraphSource,
    /// CSV output; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QuotientArgs {
    #[command(flatten)]
    pub source: GraphSource,
    /// Partition JSON: {"cells": [[node ids], ...]}.
    #[arg(long)]
    pub partition: PathBuf,
    /// Per-cell states to check and lift: JSON array of arrays.
    #[arg(long)]
    pub states: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    pub r: f64,
    /// Report JSON; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Enumerate(a) => commands::enumerate(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Resistance(a) => commands::resistance(a),
        Command::Quotient(a) => commands::quotient(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
