//! `agcas` command-line entry point. Machine-readable outputs go to files,
//! human logs to standard error. Exit codes: 0 success, 1 runtime failure,
//! 2 argument errors.

mod commands;
mod config;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "agcas", about = "Terrain, sensing and RL pipeline for ground collision avoidance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Terrain grid tools.
    Terrain {
        #[command(subcommand)]
        command: TerrainCommand,
    },
    /// Initial-condition tools.
    Ic {
        #[command(subcommand)]
        command: IcCommand,
    },
    /// Depth-image tools.
    Lidar {
        #[command(subcommand)]
        command: LidarCommand,
    },
    /// Train a policy and write it with its training log.
    Train(commands::TrainArgs),
    /// Evaluate a saved policy over an IC list.
    Eval(commands::EvalArgs),
    /// Run a hyperparameter study.
    Hyperopt(commands::HyperoptArgs),
}

#[derive(Subcommand)]
enum TerrainCommand {
    /// Generate a terrain and write it as an ASCII grid.
    Gen(commands::TerrainGenArgs),
}

#[derive(Subcommand)]
enum IcCommand {
    /// Sweep attitudes over a terrain and write the kept ICs as CSV.
    Gen(commands::IcGenArgs),
}

#[derive(Subcommand)]
enum LidarCommand {
    /// Render one scan from a given pose as a PGM image.
    Render(commands::LidarRenderArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Terrain { command: TerrainCommand::Gen(args) } => commands::terrain_gen(&args),
        Command::Ic { command: IcCommand::Gen(args) } => commands::ic_gen(&args),
        Command::Lidar { command: LidarCommand::Render(args) } => commands::lidar_render(&args),
        Command::Train(args) => commands::train(&args),
        Command::Eval(args) => commands::eval(&args),
        Command::Hyperopt(args) => commands::hyperopt(&args),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
