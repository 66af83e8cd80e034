//! `cfspan`: counterfactual detection and span extraction pipeline.

mod commands;
mod config;
mod failure;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cfspan::ensemble::TiePolicy;
use cfspan::span_codec::{MergeStrategy, RunSelection};
use failure::{Failure, EXIT_INTERNAL, EXIT_USAGE};

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Flat `key = value` configuration file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random choice
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct TrainFlags {
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Tokens kept per sentence
    #[arg(long)]
    pub max_length: Option<usize>,
    /// Loss weight of positive examples (detector only)
    #[arg(long)]
    pub positive_class_weight: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert a span CSV into a word-per-line tag file
    Convert {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Write a third POS column taken from --pos
        #[arg(long)]
        include_pos: bool,
        /// CSV of `sentenceID,pos` with space-separated tags, one per token
        #[arg(long)]
        pos: Option<PathBuf>,
    },
    /// Stratified train/validation split into OUTPUT/train.csv and OUTPUT/validation.csv
    Split {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        task: u8,
        #[arg(long)]
        input: PathBuf,
        /// Output directory
        #[arg(long)]
        output: PathBuf,
        /// Held-out fraction (default 0.05 for task 1, 0.10 for task 2)
        #[arg(long)]
        holdout: Option<f64>,
    },
    /// Train the sentence detector on a detection CSV
    TrainDetector {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        train: TrainFlags,
    },
    /// Train the span tagger on a tag file
    TrainTagger {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        train: TrainFlags,
    },
    /// Apply a trained model to the sentences of a CSV
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Turn a tag file back into span indexes of the original sentences
    Decode {
        #[arg(long)]
        input: PathBuf,
        /// CSV whose first two columns are sentence id and text
        #[arg(long)]
        sentences: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum)]
        run_selection: Option<RunSelectionArg>,
        #[arg(long)]
        max_bridge_gap: Option<usize>,
        /// Drop punctuation tokens from the ends of decoded runs
        #[arg(long)]
        trim_boundary_punctuation: bool,
        /// How subword piece tags collapse onto tokens
        #[arg(long, value_enum)]
        merge: Option<MergeArg>,
    },
    /// Score predictions against gold labels or spans
    Eval {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        task: u8,
        #[arg(long)]
        gold: PathBuf,
        /// Prediction file
        #[arg(long)]
        input: PathBuf,
        /// Machine-readable `metric=value` report
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Majority vote over detection prediction files, strongest model first
    Ensemble {
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum)]
        tie_policy: Option<TiePolicyArg>,
    },
    /// Clean detection sentences
    Clean {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        task: u8,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        strip_punctuation: bool,
        #[arg(long)]
        strip_rare: bool,
        #[arg(long)]
        strip_hashtags: bool,
    },
    /// Append augmentation rows to a detection CSV
    Augment {
        #[arg(long)]
        input: PathBuf,
        /// Detection CSV of augmentation rows
        #[arg(long)]
        augment: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Keep rows whose cleaned text is already present
        #[arg(long)]
        no_dedup: bool,
    },
    /// Class balance and length statistics of a detection CSV
    Stats {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Length threshold in code points
        #[arg(long)]
        max_length: Option<usize>,
    },
    /// Generate a templated synthetic corpus into OUTPUT/task1.csv and OUTPUT/task2.csv
    Synth {
        /// Output directory
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 400)]
        count: usize,
        /// Number of counterfactual sentences (default: half)
        #[arg(long)]
        positives: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RunSelectionArg {
    Longest,
    First,
}

impl From<RunSelectionArg> for RunSelection {
    fn from(value: RunSelectionArg) -> Self {
        match value {
            RunSelectionArg::Longest => RunSelection::LongestRun,
            RunSelectionArg::First => RunSelection::FirstRun,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TiePolicyArg {
    First,
    Mean,
    Positive,
}

impl From<TiePolicyArg> for TiePolicy {
    fn from(value: TiePolicyArg) -> Self {
        match value {
            TiePolicyArg::First => TiePolicy::FirstModel,
            TiePolicyArg::Mean => TiePolicy::MeanScore,
            TiePolicyArg::Positive => TiePolicy::Positive,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MergeArg {
    First,
    Majority,
}

impl From<MergeArg> for MergeStrategy {
    fn from(value: MergeArg) -> Self {
        match value {
            MergeArg::First => MergeStrategy::FirstPiece,
            MergeArg::Majority => MergeStrategy::Majority,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "cfspan", version, about = "Counterfactual detection and antecedent/consequent span extraction")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    use commands as c;
    let common = cli.common;
    match cli.command {
        Command::Convert {
            input,
            output,
            include_pos,
            pos,
        } => c::convert(&common, &input, &output, include_pos, pos.as_deref()),
        Command::Split {
            task,
            input,
            output,
            holdout,
        } => c::split(&common, task, &input, &output, holdout),
        Command::TrainDetector { input, output, train } => c::train_detector(&common, &input, &output, &train),
        Command::TrainTagger { input, output, train } => c::train_tagger(&common, &input, &output, &train),
        Command::Predict { model, input, output } => c::predict(&common, &model, &input, &output),
        Command::Decode {
            input,
            sentences,
            output,
            run_selection,
            max_bridge_gap,
            trim_boundary_punctuation,
            merge,
        } => c::decode(
            &common,
            c::DecodeArgs {
                input: &input,
                sentences: &sentences,
                output: &output,
                run_selection,
                max_bridge_gap,
                trim_boundary_punctuation,
                merge,
            },
        ),
        Command::Eval {
            task,
            gold,
            input,
            output,
        } => c::eval(&common, task, &gold, &input, output.as_deref()),
        Command::Ensemble {
            input,
            output,
            tie_policy,
        } => c::ensemble(&common, &input, &output, tie_policy),
        Command::Clean {
            task,
            input,
            output,
            strip_punctuation,
            strip_rare,
            strip_hashtags,
        } => c::clean(&common, task, &input, &output, [strip_punctuation, strip_rare, strip_hashtags]),
        Command::Augment {
            input,
            augment,
            output,
            no_dedup,
        } => c::augment(&common, &input, &augment, &output, no_dedup),
        Command::Stats {
            input,
            output,
            max_length,
        } => c::stats(&common, &input, output.as_deref(), max_length),
        Command::Synth {
            output,
            count,
            positives,
        } => c::synth(&common, &output, count, positives),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match std::panic::catch_unwind(|| dispatch(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(failure)) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
        Err(_) => ExitCode::from(EXIT_INTERNAL),
    }
}
