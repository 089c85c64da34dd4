mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use seld_core::features::ClipFormat;
use seld_core::SeldError;

#[derive(Parser)]
#[command(name = "seld", version, about = "Sound event localization and detection toolkit")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
pub struct Common {
    /// key=value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Single worker thread and no cross-clip parallelism.
    #[arg(long, global = true)]
    deterministic: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Foa,
    Mic,
}

impl From<FormatArg> for ClipFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Foa => ClipFormat::Foa,
            FormatArg::Mic => ClipFormat::Mic,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset (wav + label csv + manifest).
    SynthData,
    /// Compute feature tensors for a dataset directory or wav files.
    Featurize(commands::featurize::FeaturizeArgs),
    /// Finite-difference check of every op and the desk model.
    GradCheck,
    /// Train on a dataset directory.
    Train(commands::train::TrainArgs),
    /// Score a checkpoint on one split of a dataset.
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Write per-frame event predictions for wav files or a dataset split.
    Infer(commands::infer::InferArgs),
    /// Train with each loss on identical data and seeds and compare curves.
    CompareLosses,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.common.deterministic {
        // ignore the error if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(1).build_global();
    }
    let result = match cli.command {
        Command::SynthData => commands::synth::run(&cli.common),
        Command::Featurize(a) => commands::featurize::run(&cli.common, &a),
        Command::GradCheck => commands::gradcheck::run(&cli.common),
        Command::Train(a) => commands::train::run(&cli.common, &a),
        Command::Evaluate(a) => commands::evaluate::run(&cli.common, &a),
        Command::Infer(a) => commands::infer::run(&cli.common, &a),
        Command::CompareLosses => commands::compare::run(&cli.common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                SeldError::Divergence(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
