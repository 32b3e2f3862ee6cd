use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use noisy_response::config::ExperimentConfig;
use noisy_response::runner::{run, Command, RunOptions};

/// Annealed transfer operators for 1D random maps with additive noise:
/// stationary densities, mixing estimates, linear response, and the
/// linear-request control problem.
#[derive(Parser)]
#[command(name = "noisy-response", version, about)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Solve the stationary density of the annealed operator
    Stationary(RunArgs),
    /// Estimate the contraction of the zero-average space, `‖Lⁿ|_V‖₁`
    Mixing(RunArgs),
    /// Compute the linear-response direction for the configured perturbation
    Respond(RunArgs),
    /// Validate the response against finite differences of stationary
    /// densities (exit 2 if the error curve fails to decrease)
    Validate(RunArgs),
    /// Seeded Monte Carlo trajectories, histogrammed against the operator
    /// stationary density
    Simulate(RunArgs),
    /// Recover the map perturbation producing a prescribed response target
    Control(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV artifacts and diagnostics.json
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Cap on worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Seed override for the simulate command
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        CliCommand::Stationary(a) => (Command::Stationary, a),
        CliCommand::Mixing(a) => (Command::Mixing, a),
        CliCommand::Respond(a) => (Command::Respond, a),
        CliCommand::Validate(a) => (Command::Validate, a),
        CliCommand::Simulate(a) => (Command::Simulate, a),
        CliCommand::Control(a) => (Command::Control, a),
    };
    ExitCode::from(run_command(command, args).min(255) as u8)
}

fn run_command(command: Command, args: RunArgs) -> i32 {
    if let Some(threads) = args.threads {
        // Build the global pool once; a failure here means it was already
        // initialized, which is fine.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let text = match std::fs::read_to_string(&args.config) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("config error: cannot read {}: {e}", args.config.display());
            return 3;
        }
    };
    let config = match ExperimentConfig::from_json(&text) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("{e}");
            return 3;
        }
    };
    let opts = RunOptions {
        out_dir: args.out.clone(),
        seed: args.seed,
    };
    match run(command, &config, &opts) {
        Ok(code) => {
            println!(
                "{}: artifacts in {} (exit {code})",
                command.name(),
                args.out.display()
            );
            code
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
