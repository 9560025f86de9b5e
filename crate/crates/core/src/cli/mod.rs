//! Experiment runner behind the `spncn` binary.

mod config;
mod experiment;
mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{parse_config, parse_config_str, ExperimentConfig, Model, Overrides, Task};
pub use experiment::{
    load_data, run_experiment, run_trial, trial_rng, DataSplits, Embeddings, TrialResult,
};
pub use output::{
    export_embeddings, format_metrics_csv, write_metrics_csv, write_summary, METRICS_HEADER,
};

#[derive(Debug, Parser)]
#[command(name = "spncn", version, about = "Spiking neural coding network experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        task: Option<Task>,
        #[arg(long, value_enum)]
        model: Option<Model>,
        #[arg(long)]
        export_embeddings: bool,
    },
}

pub fn main_with(cli: Cli) -> crate::Result<()> {
    match cli.command {
        Command::Run {
            config,
            seed,
            trials,
            out,
            task,
            model,
            export_embeddings,
        } => {
            let overrides = Overrides {
                seed,
                trials,
                out_dir: out,
                task,
                model,
                export_embeddings,
            };
            let cfg = parse_config(&config, &overrides)?;
            run_experiment(&cfg)?;
            Ok(())
        }
    }
}
