//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hoplink_core::hopfield::{LearningRule, RecallConfig, UpdateMode};
use hoplink_core::pipeline::ThresholdSpec;

#[derive(Parser, Debug)]
#[command(
    name = "hoplink",
    version,
    about = "Associative-memory pipeline over dataset co-usage patterns",
    propagate_version = true
)]
pub struct Cli {
    /// Base seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output file or directory (each command has its own default).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Output format for experiment summaries.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleArg {
    Hebbian,
    Oja,
}

impl From<RuleArg> for LearningRule {
    fn from(value: RuleArg) -> Self {
        match value {
            RuleArg::Hebbian => LearningRule::Hebbian,
            RuleArg::Oja => LearningRule::Oja,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeArg {
    Sync,
    Async,
}

impl From<ModeArg> for UpdateMode {
    fn from(value: ModeArg) -> Self {
        match value {
            ModeArg::Sync => UpdateMode::Sync,
            ModeArg::Async => UpdateMode::Async,
        }
    }
}

/// Recall flags shared by the commands that run the dynamics.
#[derive(Args, Debug, Clone)]
pub struct RecallFlags {
    /// Update schedule.
    #[arg(long, value_enum, default_value_t = ModeArg::Async)]
    pub mode: ModeArg,

    /// Activation threshold of the update rule.
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,

    /// Full passes before declaring non-convergence.
    #[arg(long, default_value_t = 100)]
    pub max_sweeps: usize,
}

impl RecallFlags {
    pub fn to_config(&self, seed: u64) -> RecallConfig {
        RecallConfig {
            mode: self.mode.into(),
            theta: self.theta,
            max_sweeps: self.max_sweeps,
            seed,
        }
    }
}

/// Binarisation threshold flags.
#[derive(Args, Debug, Clone)]
pub struct ThresholdFlags {
    /// Absolute binarisation threshold on normalised counts.
    #[arg(long, conflicts_with = "te_quantile")]
    pub theta_te: Option<f64>,

    /// Quantile of the nonzero links used as the threshold
    /// (default: 0.5, the median).
    #[arg(long)]
    pub te_quantile: Option<f64>,
}

impl ThresholdFlags {
    pub fn to_spec(&self) -> ThresholdSpec {
        match (self.theta_te, self.te_quantile) {
            (Some(t), _) => ThresholdSpec::Absolute(t),
            (None, Some(q)) => ThresholdSpec::Quantile(q),
            (None, None) => ThresholdSpec::default(),
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic co-usage workload as shard files plus a
    /// manifest of output hashes.
    Generate(GenerateArgs),
    /// Train a network over shard files with parallel map workers and a
    /// deterministic merge; write the weight state.
    Train(TrainArgs),
    /// Recall a pattern from a trained network given a probe.
    Recall(RecallArgs),
    /// Compare stored/test/result patterns and emit a stage report.
    Evaluate(EvaluateArgs),
    /// Multi-stage experiments.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

#[derive(Subcommand, Debug)]
pub enum ExperimentCommand {
    /// Staged forgetting: train one pattern, keep probing it while
    /// dissimilar patterns accumulate, and track recovery decay.
    Forgetting(ForgettingArgs),
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Dataset count.
    #[arg(long)]
    pub k: usize,

    /// Number of usage patterns to generate.
    #[arg(long)]
    pub p: usize,

    /// Comma-separated dataset labels forming a high-usage clique
    /// (e.g. `k1,k2,k5`); repeat the flag for multiple cliques.
    #[arg(long = "cliques", value_name = "LABELS")]
    pub cliques: Vec<String>,

    /// Smallest clique co-usage count.
    #[arg(long, default_value_t = 50.0)]
    pub count_min: f64,

    /// Largest clique co-usage count.
    #[arg(long, default_value_t = 100.0)]
    pub count_max: f64,

    /// Probability of a low-frequency background link per free pair.
    #[arg(long, default_value_t = 0.0)]
    pub background_rate: f64,

    /// Flip probability recorded in the spec for probe derivation.
    #[arg(long, default_value_t = 0.1)]
    pub noise_flip_prob: f64,

    /// Number of shard files to split the patterns across.
    #[arg(long, default_value_t = 1)]
    pub shards: usize,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Shard files (.jsonl), usage CSVs, or directories of either.
    #[arg(long = "input", value_name = "PATH", required_unless_present = "job")]
    pub inputs: Vec<PathBuf>,

    /// Map partitions to split the records across.
    #[arg(long, default_value_t = 1)]
    pub shards: usize,

    #[arg(long, value_enum, default_value_t = RuleArg::Hebbian)]
    pub rule: RuleArg,

    /// Oja learning rate (only used with --rule oja).
    #[arg(long, default_value_t = 0.01)]
    pub oja_rate: f64,

    #[command(flatten)]
    pub threshold: ThresholdFlags,

    /// Full job spec JSON; replaces the flags above.
    #[arg(long, conflicts_with_all = ["inputs", "shards", "rule", "oja_rate"])]
    pub job: Option<PathBuf>,

    /// Probe pattern files to predict once training finishes.
    #[arg(long = "test-pattern", value_name = "PATH")]
    pub test_patterns: Vec<PathBuf>,

    #[command(flatten)]
    pub recall: RecallFlags,
}

#[derive(Args, Debug)]
pub struct RecallArgs {
    /// Trained weight-state file.
    #[arg(long)]
    pub weights: PathBuf,

    /// Probe pattern file ({"k", "bits"}).
    #[arg(long)]
    pub probe: PathBuf,

    #[command(flatten)]
    pub recall: RecallFlags,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Originally stored pattern (.json pattern or .txt association list).
    #[arg(long)]
    pub stored: PathBuf,

    /// Test pattern the result is judged against.
    #[arg(long)]
    pub test: PathBuf,

    /// Recall result pattern.
    #[arg(long)]
    pub result: PathBuf,

    /// Dataset count; required when any input is an association list.
    #[arg(long)]
    pub k: Option<usize>,

    /// Stage index recorded in the report.
    #[arg(long, default_value_t = 0)]
    pub stage: usize,
}

#[derive(Args, Debug)]
pub struct ForgettingArgs {
    #[arg(long, default_value_t = 10)]
    pub k: usize,

    /// Stage count, including the initial stage.
    #[arg(long, default_value_t = 6)]
    pub stages: usize,

    /// Dissimilar patterns trained in at each later stage.
    #[arg(long, default_value_t = 1)]
    pub patterns_per_stage: usize,

    /// Minimum normalised distance of interference patterns.
    #[arg(long, default_value_t = 0.5)]
    pub dissimilarity: f64,

    /// Per-bit flip probability deriving the probe.
    #[arg(long, default_value_t = 0.1)]
    pub noise_flip_prob: f64,

    /// Independent seeded repeats behind the summary statistics.
    #[arg(long, default_value_t = 20)]
    pub repeats: usize,

    #[command(flatten)]
    pub recall: RecallFlags,

    #[command(flatten)]
    pub threshold: ThresholdFlags,
}
