use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use coverlab::bounds::Verdict;
use coverlab::experiments::{self, ExperimentConfig, ExperimentKind, OUTPUT_DIR_ENV};

/// Run coverage experiments from config files.
#[derive(Parser)]
#[command(name = "coverlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment; exits with status 1 if any bound is violated.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long, env = OUTPUT_DIR_ENV)]
        output_dir: Option<PathBuf>,
        /// Overrides `threads` from the config.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Parse and check a config without running it.
    Validate { config: PathBuf },
    /// List the experiment kinds.
    ListExperiments,
}

fn load(path: &PathBuf) -> anyhow::Result<ExperimentConfig> {
    ExperimentConfig::load(path).with_context(|| format!("invalid config {}", path.display()))
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            output_dir,
            threads,
        } => {
            let mut cfg = load(&config)?;
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            if let Some(t) = threads {
                cfg.threads = t;
            }
            let result = experiments::run(&cfg).context("experiment failed")?;
            for r in &result.reports {
                let verdict = match r.verdict {
                    Verdict::Holds => "holds",
                    Verdict::HoldsWithSlack => "holds-with-slack",
                    Verdict::Violated => "VIOLATED",
                };
                println!(
                    "{verdict:>16}  {}: {:.6} vs {:.6} (se {:.2e})",
                    r.bound_name, r.lhs_empirical, r.rhs_formula, r.lhs_se
                );
            }
            println!("outputs in {}", result.output_dir.display());
            Ok(ExitCode::from(result.exit_code() as u8))
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            println!(
                "{}: ok ({}, seed {}, reps {})",
                config.display(),
                cfg.experiment.name(),
                cfg.seed,
                cfg.reps
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::ListExperiments => {
            for k in ExperimentKind::ALL {
                println!("{:<22} {}", k.name(), k.description());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
