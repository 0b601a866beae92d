//! `srfe`: fit, predict, run experiments and print diagnostics.

mod commands;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use srfe::testbed::SamplerKind;

use crate::error::CliResult;

#[derive(Parser)]
#[command(name = "srfe", version, about = "Sparse random feature expansions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sampler {
    Uniform,
    Gaussian,
    Mixture,
}

impl From<Sampler> for SamplerKind {
    fn from(s: Sampler) -> Self {
        match s {
            Sampler::Uniform => SamplerKind::Uniform,
            Sampler::Gaussian => SamplerKind::Gaussian,
            Sampler::Mixture => SamplerKind::Mixture,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model to a CSV file; writes model.json and report.json.
    Fit {
        #[arg(long)]
        config: PathBuf,
        /// CSV with a header row; the last column is the target by default.
        data: PathBuf,
        #[arg(long)]
        target_col: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Evaluate a saved model on the rows of a CSV file.
    Predict {
        #[arg(long)]
        model: PathBuf,
        data: PathBuf,
        #[arg(long)]
        target_col: Option<String>,
        /// Output CSV; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named preset or an experiment configuration file.
    Experiment {
        /// One of: table1, table1-<target>, ishigami, overfit-1d, noise-1d, order2-chain.
        preset: Option<String>,
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        sampler: Option<Sampler>,
        /// Run this single seed instead of the configured list.
        #[arg(long)]
        seed: Option<u64>,
        /// Experiments run concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Print theory bounds and, optionally, the coherence of a sampled matrix.
    Diagnose {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Fit {
            config,
            data,
            target_col,
            seed,
            out,
        } => commands::fit(&config, &data, target_col.as_deref(), seed, &out),
        Command::Predict {
            model,
            data,
            target_col,
            out,
        } => commands::predict(&model, &data, target_col.as_deref(), out.as_deref()),
        Command::Experiment {
            preset,
            config,
            sampler,
            seed,
            jobs,
            out,
        } => commands::experiment(&commands::ExperimentArgs {
            preset: preset.as_deref(),
            config: config.as_deref(),
            sampler: sampler.map(Into::into),
            seed,
            jobs,
            out: &out,
        })
        .map(|_| ()),
        Command::Diagnose { config, seed, out } => {
            commands::diagnose(&config, seed, out.as_deref()).map(|_| ())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("SRFE_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("srfe: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
