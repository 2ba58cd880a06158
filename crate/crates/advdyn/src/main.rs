use advdyn::cli::{self, CliOptions, Subcommand};
use clap::{Parser, Subcommand as ClapSubcommand};
use std::path::PathBuf;

/// Adversarial Blue/Red/Green population dynamics: trajectory simulation,
/// parameter sweeps, closed-form predictors, and numeric-vs-theory
/// comparisons. All runs are deterministic.
#[derive(Parser)]
#[command(name = "advdyn", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON configuration file (emitted summaries and sidecars are accepted)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory for emitted files
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,

    /// Worker threads for sweeps (falls back to ADVDYN_WORKERS, then the
    /// available parallelism)
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,

    /// Model selector, overriding the config file
    /// {supporter|contributor|reduced_supporter|reduced_contributor}
    #[arg(long, global = true, value_name = "MODEL")]
    model: Option<String>,

    /// End time override for the integration
    #[arg(long = "t-end", global = true, value_name = "X")]
    t_end: Option<f64>,

    /// Assert that the run involves no randomness. Always holds: every
    /// computation in this tool is deterministic.
    #[arg(long, global = true)]
    seedless: bool,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Integrate one trajectory; writes trajectory.csv and summary.json
    Simulate,
    /// Run a two-parameter grid scan; writes sweep.csv and sweep.json
    Sweep,
    /// Evaluate the closed-form predictors; writes predictions.json
    Predict,
    /// Run a numeric-vs-theory comparison; writes compare.csv and compare.json
    Compare,
}

fn main() {
    let cli = Cli::parse();
    let opts = CliOptions {
        config: cli.config,
        out: cli.out,
        workers: cli.workers,
        model: cli.model,
        t_end: cli.t_end,
        seedless: cli.seedless,
    };
    let cmd = match cli.command {
        Command::Simulate => Subcommand::Simulate,
        Command::Sweep => Subcommand::Sweep,
        Command::Predict => Subcommand::Predict,
        Command::Compare => Subcommand::Compare,
    };
    std::process::exit(cli::run(cmd, &opts));
}
