use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use orbitlab_cli::runner::{self, CommandKind, RunOptions};

/// Experiments on expanding Markov interval maps: spectra, hitting times,
/// coverage, and dimension reports, all emitted as CSV.
#[derive(Parser)]
#[command(name = "orbitlab", version, about)]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true, default_value = "config.toml")]
    config: PathBuf,
    /// Output directory (defaults to the config's [output] dir, then "out").
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the config's seed list, e.g. "1,2,3".
    #[arg(long, global = true)]
    seeds: Option<String>,
    /// Worker pool size for independent cells.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Override the step budget for hitting experiments.
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the map axioms and report the derived constants.
    Validate,
    /// Sample the multifractal spectrum curve over a q grid.
    Spectrum,
    /// Hitting-time statistics: ball exponents over seed pairs, or first
    /// hits of a whole covering (mode = cylinder).
    Hitstats,
    /// Self-hitting exponents over seeds against the measure dimension.
    Recurrence,
    /// Lebesgue measure of truncated ball unions over a delta grid.
    Coverage,
    /// Full dimension report: predictions plus region proxies per seed.
    Report,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let seeds = match cli.seeds.as_deref() {
        None => None,
        Some(s) => match s.split(',').map(|t| t.trim().parse::<u64>()).collect() {
            Ok(v) => Some(v),
            Err(e) => {
                eprintln!("error: bad --seeds list: {e}");
                return ExitCode::from(1);
            }
        },
    };
    let opts = RunOptions {
        config_path: cli.config,
        out_dir: cli.out,
        seeds,
        workers: cli.workers,
        budget: cli.budget,
    };
    let kind = match cli.command {
        Command::Validate => CommandKind::Validate,
        Command::Spectrum => CommandKind::Spectrum,
        Command::Hitstats => CommandKind::Hitstats,
        Command::Recurrence => CommandKind::Recurrence,
        Command::Coverage => CommandKind::Coverage,
        Command::Report => CommandKind::Report,
    };
    ExitCode::from(runner::run(kind, &opts) as u8)
}
