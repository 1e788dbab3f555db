use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rcgp_bench::aggregate::{aggregate, load_dir, write_csv};
use rcgp_bench::config::ExperimentConfig;
use rcgp_bench::runner::{first_failure, output_dir, run_and_save};
use rcgp_bench::{oracles, BenchError};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "rcgp-bench",
    version,
    about = "Robust GP-UCB experiment runner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (algorithm, seed) cell of a config and write CSV traces.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated seeds overriding the config.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean cumulative regret and standard error per algorithm and step.
    Aggregate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Randomized numerical checks of the posterior machinery.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, seeds, out } => run(config, seeds, out),
        Command::Aggregate { input, out } => {
            let result = load_dir(&input).and_then(|traces| {
                if traces.is_empty() {
                    return Err(BenchError::Trace(format!(
                        "no traces in {}",
                        input.display()
                    )));
                }
                let file = std::fs::File::create(&out)?;
                write_csv(&aggregate(&traces), file)
            });
            match result {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Selftest { seed } => {
            let reports = oracles::all(seed);
            for r in &reports {
                println!("{}", r.line());
            }
            if reports.iter().all(|r| r.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_NUMERICAL)
            }
        }
    }
}

fn run(config: PathBuf, seeds: Option<Vec<u64>>, out: Option<PathBuf>) -> ExitCode {
    let mut cfg = match ExperimentConfig::load(&config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(s) = seeds {
        cfg.seeds = s;
        if let Err(e) = cfg.validate() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    let dir = output_dir(&cfg, out.as_deref());
    match run_and_save(&cfg, &dir) {
        Ok(outcomes) => {
            for o in &outcomes {
                match (&o.trace, &o.error) {
                    (Some(t), _) => println!(
                        "{} seed {}: final cumulative regret {:.4}",
                        o.algorithm,
                        o.seed,
                        t.final_regret()
                    ),
                    (None, Some(e)) => eprintln!("{} seed {}: {e}", o.algorithm, o.seed),
                    _ => {}
                }
            }
            println!("wrote {}", dir.display());
            match first_failure(&outcomes) {
                None => ExitCode::SUCCESS,
                Some((_, true)) => ExitCode::from(EXIT_NUMERICAL),
                Some((_, false)) => ExitCode::FAILURE,
            }
        }
        Err(BenchError::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
