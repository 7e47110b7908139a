//! `tagphys` command-line tool.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tagphys::dataset::{load_t2p, DataFormat};
use tagphys::{T2PDataset, Vocabulary};

mod cmd;
mod config;
mod docs;
mod error;

use config::{FileConfig, CONFIG_ENV};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "tagphys", version, about = "Garment tag attributes to cloth simulation parameters")]
struct Cli {
    /// Suppress human-readable summaries.
    #[arg(long, global = true)]
    quiet: bool,
    /// JSON config file with default constants.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// Directory holding vocabulary tables (built-in tables otherwise).
    #[arg(long, global = true, env = "TAGPHYS_VOCAB_DIR")]
    vocab_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a dataset and write it in canonical JSON.
    Ingest(cmd::ingest::Args),
    /// Fit the five parameter-group forests.
    Train(cmd::train::Args),
    /// Predict simulator parameters from attribute documents.
    Predict(cmd::predict::Args),
    /// Score predictions against ground truth.
    Evaluate(cmd::evaluate::Args),
    /// Run a drape scenario and export the trajectory.
    Simulate(cmd::simulate::Args),
    /// Cross-validate retrieval modes and, optionally, forest searches.
    Crossval(cmd::crossval::Args),
    /// Sample random parameter sets within bounds.
    Baseline(cmd::baseline::Args),
}

pub struct Ctx {
    pub vocab: Vocabulary,
    pub config: FileConfig,
    pub quiet: bool,
}

impl Ctx {
    pub fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }

    pub fn seed(&self, flag: Option<u64>) -> u64 {
        config::pick(flag, self.config.seed, 0)
    }

    /// Loads a dataset, taking the format from the extension unless given.
    pub fn load_dataset(&self, path: &Path, format: Option<DataFormat>) -> Result<T2PDataset, CliError> {
        let format = format.or_else(|| DataFormat::from_path(path)).ok_or_else(|| {
            CliError::Usage(format!("cannot infer dataset format of {}; pass --format", path.display()))
        })?;
        Ok(load_t2p(&self.vocab, path, format)?)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = FileConfig::load(cli.config.as_deref())?;
    let vocab = match cli.vocab_dir.as_ref().or(config.vocab_dir.as_ref()) {
        Some(dir) => Vocabulary::from_dir(dir)?,
        None => Vocabulary::builtin(),
    };
    let ctx = Ctx { vocab, config, quiet: cli.quiet };
    match cli.command {
        Command::Ingest(a) => cmd::ingest::run(&ctx, a),
        Command::Train(a) => cmd::train::run(&ctx, a),
        Command::Predict(a) => cmd::predict::run(&ctx, a),
        Command::Evaluate(a) => cmd::evaluate::run(&ctx, a),
        Command::Simulate(a) => cmd::simulate::run(&ctx, a),
        Command::Crossval(a) => cmd::crossval::run(&ctx, a),
        Command::Baseline(a) => cmd::baseline::run(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
