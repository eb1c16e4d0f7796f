use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser)]
#[command(
    name = "deceptra",
    version,
    about = "Almost-sure winning intention-deception planning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Visible,
    Invisible,
}

#[derive(Clone, Copy, ValueEnum)]
enum BeliefArg {
    Singleton,
    ObsClass,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    User,
    Attacker,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConfigArg {
    A,
    B,
    C,
}

#[derive(Clone, Copy, ValueEnum)]
enum SensorArg {
    Boolean,
    Precise,
}

#[derive(Args)]
struct AugArgs {
    /// Model file (JSON).
    model: PathBuf,
    /// Defender's action visibility; defaults to the model's setting.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Defender's initial belief; defaults to the model's setting.
    #[arg(long, value_enum)]
    initial_belief: Option<BeliefArg>,
    /// Action-invisible mode: let the attacker play every enabled action
    /// (experimental).
    #[arg(long)]
    invisible_any_action: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model file and list every violation.
    Validate { model: PathBuf },
    /// Almost-sure winning region of one of the model's objectives.
    Asw {
        model: PathBuf,
        #[arg(long, value_enum, default_value = "user")]
        objective: ObjectiveArg,
        /// Write the base model as DOT with the region highlighted.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Build the belief-augmented model.
    BuildAug {
        #[command(flatten)]
        aug: AugArgs,
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Write the augmented model in the model-file format.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Synthesize the attacker's deceptive strategy.
    Synthesize {
        #[command(flatten)]
        aug: AugArgs,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        strategy: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Generate benchmark models.
    Scenario {
        #[command(subcommand)]
        kind: ScenarioCommand,
    },
    /// Sample runs of a stored strategy.
    Simulate {
        #[arg(long)]
        strategy: PathBuf,
        /// Model file; defaults to the one recorded in the strategy file.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        runs: usize,
        #[arg(long, env = "DECEPTRA_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        max_steps: usize,
        /// Follow the stored SSP actions instead of uniform choices.
        #[arg(long)]
        ssp: bool,
        /// Trace CSV; with several runs the seed is appended to the file stem.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Sample runs of the synthesized strategy and cross-check every prefix
    /// against the brute-force observation-equivalence oracle.
    Check {
        #[command(flatten)]
        aug: AugArgs,
        #[arg(long, default_value_t = 500)]
        runs: usize,
        /// Maximum run length checked.
        #[arg(long, default_value_t = 12)]
        depth: usize,
        #[arg(long, env = "DECEPTRA_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Run the gridworld benchmark table and compare with published values.
    Table1 {
        #[arg(long, default_value_t = 0.8)]
        p: f64,
        /// Write a Markdown comparison table.
        #[arg(long)]
        markdown: Option<PathBuf>,
        /// Append JSON-lines run reports.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Record wall-clock times (reports are then no longer reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Compare the illustrative augmented models with the golden graphs.
    ReplicateFigs {
        /// Model file; defaults to the bundled illustrative model.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, value_enum)]
        initial_belief: Option<BeliefArg>,
        #[arg(long)]
        invisible_any_action: bool,
    },
}

#[derive(Subcommand)]
enum ScenarioCommand {
    /// Slip gridworld with a scheduled sensor network.
    Grid {
        #[arg(long, value_enum, conflicts_with = "spec")]
        config: Option<ConfigArg>,
        #[arg(long, value_enum, default_value = "boolean")]
        sensor: SensorArg,
        #[arg(long, default_value_t = 0.8)]
        p: f64,
        /// Custom scenario description (TOML or JSON).
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
