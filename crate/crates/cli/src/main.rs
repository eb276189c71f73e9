use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cepkit_cli::{CliError, NoiseSpec, DEFAULT_ACCURACY, DEFAULT_SWEEP};

#[derive(Parser)]
#[command(name = "cepkit", version, about = "Complex-event detection benchmark pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate labeled examples (clean actions plus ground-truth CE labels).
    Generate {
        /// Simulator config (TOML). Uses the bundled default when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Overrides the config's base_seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fill ae_observed by passing ae_true through a confusion-matrix channel.
    Perturb {
        #[arg(long = "in")]
        input: PathBuf,
        /// Uniform-error accuracy (default 0.91).
        #[arg(long, conflicts_with = "matrix")]
        accuracy: Option<f64>,
        /// 9x9 row-stochastic confusion matrix file.
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the streaming FSM detector over every example.
    Detect {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predictions against ground truth. Repeat --pred for one run per file.
    Evaluate {
        /// Dataset holding the ground-truth labels.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, required = true)]
        pred: Vec<PathBuf>,
        /// Value of the report's config column.
        #[arg(long, default_value = "fsm")]
        label: String,
        /// Report file; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Perturb, detect and score at several accuracies, --runs seeds each.
    Sweep {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SWEEP)]
        accuracy: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        runs: usize,
        /// Run r uses perturbation seed seed + r.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate { config, n, seed, out } => {
            let written = cepkit_cli::cmd_generate(config.as_deref(), n, seed, &out)?;
            log::info!("wrote {written} examples to {}", out.display());
        }
        Command::Perturb {
            input,
            accuracy,
            matrix,
            seed,
            out,
        } => {
            let noise = match &matrix {
                Some(path) => NoiseSpec::Matrix(path),
                None => NoiseSpec::Accuracy(accuracy.unwrap_or(DEFAULT_ACCURACY)),
            };
            let written = cepkit_cli::cmd_perturb(&input, noise, seed, &out)?;
            log::info!("perturbed {written} examples into {}", out.display());
        }
        Command::Detect { input, out } => {
            let written = cepkit_cli::cmd_detect(&input, &out)?;
            log::info!("wrote predictions for {written} examples to {}", out.display());
        }
        Command::Evaluate { input, pred, label, out } => {
            let preds: Vec<_> = pred.iter().map(PathBuf::as_path).collect();
            let (_, text) = cepkit_cli::cmd_evaluate(&input, &preds, &label, out.as_deref())?;
            if out.is_none() {
                print!("{text}");
            }
        }
        Command::Sweep {
            input,
            accuracy,
            runs,
            seed,
            out,
        } => {
            let (_, text) = cepkit_cli::cmd_sweep(&input, &accuracy, runs, seed, out.as_deref())?;
            if out.is_none() {
                print!("{text}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
