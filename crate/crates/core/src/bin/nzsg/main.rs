//! `nzsg`: command-line front end for the network zero-sum toolkit.
//!
//! Every subcommand writes fixed file names into `--out <dir>`. Exit status
//! is 0 on success, 1 on invalid input and 2 on numerical failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "nzsg", version, about = "Q-Learning dynamics and zero-sum projection for network games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a game (random zero-sum or conflict network).
    Generate(GenerateArgs),
    /// Add bounded uniform noise to every payoff entry.
    Perturb(PerturbArgs),
    /// Project onto the nearest network zero-sum game.
    Project(ProjectArgs),
    /// Maximum Pairwise Difference between two games.
    Mpd(MpdArgs),
    /// Solve for a quantal response equilibrium.
    Qre(QreArgs),
    /// Integrate the Q-Learning dynamics.
    Simulate(SimulateArgs),
    /// Integrate with payoff noise redrawn every `--period` steps.
    NoisySim(NoisySimArgs),
    /// KL surface around the QRE on the logit plane.
    Embed(EmbedArgs),
    /// Run a seeded campaign described by a JSON spec.
    Campaign(CampaignArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GameKind {
    Nzsg,
    Chain,
    Complete,
    ConflictPreset,
    ConflictRandom,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TopologyArg {
    Chain,
    Complete,
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InitArg {
    Uniform,
    Random,
}

#[derive(Debug, Args)]
struct OutArg {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SimArgs {
    /// Exploration rates: one value for all agents or one per agent.
    #[arg(long, value_delimiter = ',', default_value = "0.75")]
    temp: Vec<f64>,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    #[arg(long, default_value_t = 500.0)]
    horizon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "nzsg")]
    kind: GameKind,
    /// Generator spec file; overrides the other generator flags.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    agents: usize,
    #[arg(long, default_value_t = 2)]
    actions: usize,
    #[arg(long, value_enum, default_value = "random")]
    topology: TopologyArg,
    #[arg(long, default_value_t = 0.5)]
    edge_prob: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Entry range `lo,hi` for random zero-sum games.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-1.0, 1.0])]
    range: Vec<f64>,
    /// Upper end of the uniform cost range for random conflict networks.
    #[arg(long, default_value_t = 0.5)]
    cost_max: f64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
#[group(id = "size", required = true, multiple = false, args = ["epsilon", "delta"])]
struct NoiseSize {
    /// Entry noise bound ε.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Target entrywise certificate δ; ε is derived from it.
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Debug, Args)]
struct PerturbArgs {
    #[arg(long)]
    game: PathBuf,
    #[command(flatten)]
    size: NoiseSize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct ProjectArgs {
    #[arg(long)]
    game: PathBuf,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct MpdArgs {
    #[arg(long)]
    game: PathBuf,
    /// Second game, with the same structure.
    #[arg(long)]
    other: PathBuf,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct QreArgs {
    #[arg(long)]
    game: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0.75")]
    temp: Vec<f64>,
    #[arg(long, default_value_t = 0.5)]
    damping: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    game: PathBuf,
    #[command(flatten)]
    sim: SimArgs,
    /// Zero-sum reference game for the trap-region diagnostics; defaults to
    /// the game itself when it is zero-sum.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "random")]
    init: InitArg,
    /// Write every `stride`-th step to the CSV.
    #[arg(long, default_value_t = 100)]
    stride: usize,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct NoisySimArgs {
    /// Zero-sum base game.
    #[arg(long)]
    game: PathBuf,
    #[command(flatten)]
    sim: SimArgs,
    #[command(flatten)]
    size: NoiseSize,
    #[arg(long, default_value_t = 50)]
    period: usize,
    #[arg(long, value_enum, default_value = "random")]
    init: InitArg,
    #[arg(long, default_value_t = 100)]
    stride: usize,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct EmbedArgs {
    /// Zero-sum game with two actions per agent.
    #[arg(long)]
    game: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0.75")]
    temp: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Grid `lo,hi,n` used for both α and β.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-5.0, 5.0, 101.0])]
    grid: Vec<f64>,
    /// Seed for the base vectors `u` and `v`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct CampaignArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Run the campaign on one thread.
    #[arg(long)]
    sequential: bool,
    #[command(flatten)]
    out: OutArg,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
