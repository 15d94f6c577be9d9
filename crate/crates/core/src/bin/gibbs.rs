//! Experiment CLI: run, validate, sample, dlr.
//!
//! Exit codes: 0 success, 2 config error, 3 sampler failure, 4 diagnostics
//! precondition failure, 1 anything else.

use clap::{Args, Parser, Subcommand};
use gibbs_core::config::{validate_text, ExperimentConfig};
use gibbs_core::runner::{self, RunOutcome};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gibbs", version = gibbs_core::VERSION)]
#[command(about = "Simulate and verify Gibbs point processes with stable interactions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample, run requested diagnostics, and write the artifact directory.
    Run(RunArgs),
    /// List config violations without running anything.
    Validate {
        /// Experiment config file.
        config: PathBuf,
    },
    /// Run only the sampler and write the sample directory.
    Sample(RunArgs),
    /// Run DLR reports against an existing sample directory.
    Dlr(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file.
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker thread cap; 0 sizes to the machine. Default 1.
    #[arg(long)]
    threads: Option<usize>,
}

fn load(args: &RunArgs) -> gibbs_core::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_file(&args.config)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
        cfg.sampler.seed = s;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    if let Some(t) = args.threads {
        cfg.threads = t;
    }
    Ok(cfg)
}

fn init_threads(threads: usize) {
    if threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
}

fn print_outcome(outcome: &RunOutcome) {
    for (k, v) in &outcome.summary {
        println!("{k} = {v}");
    }
    println!("artifacts: {}", outcome.out_dir.display());
}

fn execute(cli: Cli) -> gibbs_core::Result<i32> {
    match cli.command {
        Command::Validate { config } => {
            let text = std::fs::read_to_string(&config)?;
            let issues = validate_text(&text);
            if issues.is_empty() {
                println!("ok");
                Ok(0)
            } else {
                for issue in &issues {
                    println!("{issue}");
                }
                Ok(2)
            }
        }
        Command::Run(args) => {
            let cfg = load(&args)?;
            init_threads(cfg.threads);
            print_outcome(&runner::run_experiment(&cfg)?);
            Ok(0)
        }
        Command::Sample(args) => {
            let cfg = load(&args)?;
            init_threads(cfg.threads);
            print_outcome(&runner::sample_only(&cfg)?);
            Ok(0)
        }
        Command::Dlr(args) => {
            let cfg = load(&args)?;
            init_threads(cfg.threads);
            print_outcome(&runner::run_dlr(&cfg)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
