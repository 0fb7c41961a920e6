mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Analytics for diagnostic multiple-choice questions.
#[derive(Parser, Debug)]
#[command(name = "diagq", version, about)]
pub struct Cli {
    /// TOML file with default values; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Seed for every random choice in the run.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Directory for output files.
    #[arg(long, global = true)]
    pub outdir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Split a response table into train, public-test and private-test files.
    Split(SplitArgs),
    /// Fit a model on a response table and save a checkpoint.
    Train(TrainArgs),
    /// Rank questions by quality and write a ranking CSV.
    Rank(RankArgs),
    /// Score correctness predictions (column IsCorrect).
    EvalTask1(EvalPairArgs),
    /// Score answer-choice predictions (column AnswerValue).
    EvalTask2(EvalPairArgs),
    /// Score a quality ranking against expert pairwise judgments.
    EvalTask3(EvalRankingArgs),
    /// Run an adaptive question-selection episode.
    Episode(EpisodeArgs),
    /// Fill a submission template with predictions or ranks.
    Submit(SubmitArgs),
    /// Generate a synthetic dataset with known ground truth.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
pub struct SplitArgs {
    /// Response table (QuestionId, UserId, AnswerId, IsCorrect, CorrectAnswer, AnswerValue).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// `records` splits rows; `students` keeps each student's rows together.
    #[arg(long)]
    pub mode: Option<String>,
    /// Train, public-test and private-test fractions, e.g. `0.8,0.1,0.1`.
    #[arg(long)]
    pub fractions: Option<String>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// `majority`, `irt` or `mf`.
    #[arg(long)]
    pub model: Option<String>,
    /// `binary` or `categorical`.
    #[arg(long)]
    pub mode: Option<String>,
    /// Checkpoint file name inside the output directory.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Args, Debug)]
pub struct RankArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Answer metadata (AnswerId, DateAnswered, Confidence, GroupId, QuizId, SchemeOfWorkId).
    #[arg(long)]
    pub answers: PathBuf,
    /// choice-entropy, correctness-entropy, conditional-entropy, confidence, mean-rank or weighted.
    #[arg(long)]
    pub method: Option<String>,
    /// Conditioning key for conditional entropy: `group` or `quiz`.
    #[arg(long)]
    pub condition: Option<String>,
    /// Weights for choice entropy, correctness entropy, conditional entropy and confidence.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
pub struct EvalPairArgs {
    #[arg(long)]
    pub predictions: PathBuf,
    /// Response table holding the true answers.
    #[arg(long)]
    pub truth: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvalRankingArgs {
    /// Ranking CSV with columns QuestionId and ranking.
    #[arg(long)]
    pub ranking: PathBuf,
    /// Judgments CSV (PairId, LeftQuestionId, RightQuestionId, ExpertId, Choice).
    #[arg(long)]
    pub judgments: PathBuf,
}

#[derive(Args, Debug)]
pub struct EpisodeArgs {
    /// Checkpoint file, or a directory holding one named `model_task_4_*`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Response table for the episode students.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// `random`, `max_uncertainty` or `fisher_information`.
    #[arg(long)]
    pub policy: Option<String>,
    #[arg(long)]
    pub budget: Option<usize>,
    /// Share of each student's answered questions held out as targets.
    #[arg(long)]
    pub target_fraction: Option<f64>,
    /// Print target accuracy after every step.
    #[arg(long)]
    pub track_steps: bool,
}

#[derive(Args, Debug)]
pub struct SubmitArgs {
    /// 1 (IsCorrect), 2 (AnswerValue) or 3 (ranking).
    #[arg(long)]
    pub task: u8,
    /// Checkpoint for tasks 1 and 2.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Ranking CSV for task 3.
    #[arg(long)]
    pub ranking: Option<PathBuf>,
    /// Template listing the required pairs or questions.
    #[arg(long)]
    pub template: PathBuf,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub students: Option<usize>,
    #[arg(long)]
    pub questions: Option<usize>,
    #[arg(long)]
    pub density: Option<f64>,
    #[arg(long)]
    pub confidence_noise: Option<f64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DIAGQ_LOG", "warn")).init();
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
