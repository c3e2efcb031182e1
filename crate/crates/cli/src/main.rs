mod commands;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "soop", version, about = "LEO signals-of-opportunity bounds, visibility and acquisition campaigns")]
pub struct Cli {
    /// Directory for CSV outputs and the run manifest.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,

    /// Master seed; overrides the seed of the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for campaigns (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Signal parameter table of the four systems.
    Catalog,
    /// Free-space loss and maximum C/N0 per system.
    Linkbudget,
    /// MCRLB sweep over C/N0 and observation time.
    Mcrlb(McrlbArgs),
    /// Visibility and GDOP campaign (needs --config).
    Scenario,
    /// OFDM acquisition Monte Carlo.
    Acqsim,
    /// Writes synthetic Walker-constellation TLE files.
    SynthTle(SynthTleArgs),
}

#[derive(Debug, Args)]
pub struct McrlbArgs {
    /// delay, phase, frequency or aoa.
    #[arg(long)]
    pub observable: Option<String>,
    /// Repeatable; default all four systems.
    #[arg(long = "system")]
    pub systems: Vec<String>,
    /// C/N0 grid in dB-Hz, `start:stop:step` or a comma list.
    #[arg(long)]
    pub cn0: Option<String>,
    /// Observation times in seconds, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub t0: Option<Vec<f64>>,
    /// AoA array element count.
    #[arg(long)]
    pub elements: Option<u32>,
    /// AoA array length in meters.
    #[arg(long)]
    pub length: Option<f64>,
    /// AoA direction of arrival in degrees from the array axis.
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SynthTleArgs {
    /// Element epoch, RFC 3339.
    #[arg(long, default_value = "2024-04-19T00:00:00Z")]
    pub epoch: String,
    /// Repeatable; default all built-in constellations.
    #[arg(long = "constellation")]
    pub constellations: Vec<String>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
