//! `chartcn` command-line front end.
//!
//! Exit codes: 0 on success, 1 on an internal error, 2 on a usage or data
//! error.

mod commands;
mod overrides;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use overrides::{AllKeys, DatasetKeys, Overrides};

#[derive(Debug, Parser)]
#[command(name = "chartcn", version, about = "Character-level ConvNets for text classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a model on a labeled CSV corpus.
    Train(TrainArgs),
    /// Report accuracy (and optionally a confusion matrix) on labeled data.
    Eval(EvalArgs),
    /// Classify texts given with --text or one per line on stdin.
    Predict(PredictArgs),
    /// Rewrite the text fields of a CSV corpus with thesaurus synonyms.
    Augment(AugmentArgs),
    /// Train and evaluate a word-level logistic regression baseline.
    Baseline(BaselineArgs),
    /// Render first-layer kernels as a binary PGM image.
    VizWeights(VizArgs),
    /// Convert a MyThes data file to the thesaurus TSV format.
    ConvertThesaurus(ConvertArgs),
}

#[derive(Debug, clap::Args)]
struct TrainArgs {
    /// Training CSV.
    #[arg(long, value_name = "CSV")]
    data: PathBuf,
    /// Checkpoint written after every epoch.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Held-out CSV evaluated after every epoch.
    #[arg(long, value_name = "CSV")]
    test: Option<PathBuf>,
    /// Continue from this checkpoint.
    #[arg(long, value_name = "FILE")]
    resume: Option<PathBuf>,
    /// Thesaurus TSV; enables on-the-fly augmentation.
    #[arg(long, value_name = "TSV")]
    thesaurus: Option<PathBuf>,
    /// Append epoch records to this file as well as stdout.
    #[arg(long, value_name = "FILE")]
    log: Option<PathBuf>,
    #[command(flatten)]
    config: Overrides<AllKeys>,
}

#[derive(Debug, clap::Args)]
struct EvalArgs {
    #[arg(long, value_name = "FILE")]
    checkpoint: PathBuf,
    #[arg(long, value_name = "CSV")]
    data: PathBuf,
    /// Write the confusion matrix (rows = true class) as CSV.
    #[arg(long, value_name = "CSV")]
    confusion: Option<PathBuf>,
    #[command(flatten)]
    config: Overrides<DatasetKeys>,
}

#[derive(Debug, clap::Args)]
struct PredictArgs {
    #[arg(long, value_name = "FILE")]
    checkpoint: PathBuf,
    /// Text to classify; without it every stdin line is classified.
    #[arg(long)]
    text: Option<String>,
}

#[derive(Debug, clap::Args)]
struct AugmentArgs {
    #[arg(long, value_name = "CSV")]
    data: PathBuf,
    #[arg(long, value_name = "TSV")]
    thesaurus: PathBuf,
    #[arg(long, value_name = "CSV")]
    out: PathBuf,
    /// Replacement-count parameter.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Synonym-rank parameter.
    #[arg(long, default_value_t = 0.5)]
    q: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BaselineKind {
    Bow,
    Centroids,
}

#[derive(Debug, clap::Args)]
struct BaselineArgs {
    #[arg(long, value_enum)]
    kind: BaselineKind,
    #[arg(long, value_name = "CSV")]
    data: PathBuf,
    /// Held-out CSV; accuracy is reported on it when given.
    #[arg(long, value_name = "CSV")]
    test: Option<PathBuf>,
    /// Word vectors (`word v1 ... vd` per line); required for centroids.
    #[arg(long, value_name = "FILE")]
    embeddings: Option<PathBuf>,
    /// Number of k-means centroids.
    #[arg(long, default_value_t = 5000)]
    k: usize,
    #[arg(long, default_value_t = 100)]
    kmeans_iters: usize,
    /// Bag-of-words vocabulary size.
    #[arg(long, default_value_t = 5000)]
    vocab_size: usize,
    /// Use 0/1 presence instead of counts.
    #[arg(long)]
    binary: bool,
    #[arg(long, default_value_t = 10)]
    train_epochs: usize,
    #[arg(long, default_value_t = 0.01)]
    learning_rate: f64,
    #[arg(long, default_value_t = 32)]
    minibatch: usize,
    #[arg(long, default_value_t = 0)]
    baseline_seed: u64,
    #[arg(long, value_name = "CSV")]
    confusion: Option<PathBuf>,
    #[command(flatten)]
    config: Overrides<DatasetKeys>,
}

#[derive(Debug, clap::Args)]
struct VizArgs {
    #[arg(long, value_name = "FILE")]
    checkpoint: PathBuf,
    #[arg(long, value_name = "PGM")]
    out: PathBuf,
    /// Kernels to draw.
    #[arg(long, default_value_t = 64)]
    count: usize,
    /// Kernels per image row.
    #[arg(long, default_value_t = 8)]
    columns: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, clap::Args)]
struct ConvertArgs {
    /// MyThes `.dat` file.
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    #[arg(long, value_name = "TSV")]
    out: PathBuf,
}

/// A failure and the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<chartcn::Error> for Failure {
    fn from(e: chartcn::Error) -> Self {
        Failure {
            code: if e.is_user_error() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => commands::train(a),
        Command::Eval(a) => commands::eval(a),
        Command::Predict(a) => commands::predict(a),
        Command::Augment(a) => commands::augment(a),
        Command::Baseline(a) => commands::baseline(a),
        Command::VizWeights(a) => commands::viz_weights(a),
        Command::ConvertThesaurus(a) => commands::convert_thesaurus(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("chartcn: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
