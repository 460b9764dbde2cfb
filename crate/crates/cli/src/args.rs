use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "stackdet", version, about = "Stacked machine-generated text detection")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML file with default values for any long flag (keys use the flag names).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// off, error, warn, info, debug or trace.
    #[arg(long, global = true)]
    pub log_level: Option<String>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// E-step / filtering threshold r_e.
    #[arg(long = "re", global = true)]
    pub r_e: Option<f64>,
    /// Maximum filtered fraction of subsequences.
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    /// Sentences per subsequence.
    #[arg(long, global = true)]
    pub k: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split a labelled corpus 2:1:1 and train a detector.
    Train(TrainArgs),
    /// Score documents, one JSON line per document.
    Detect(DetectArgs),
    /// AUROC and TPR at fixed FPR on a labelled corpus.
    Eval(EvalArgs),
    /// Monte Carlo sweep of the likelihood-ratio detector.
    Simulate(SimulateArgs),
    /// Share of machine sentences that also occur in human text.
    Overlap(OverlapArgs),
    /// Wall time of stacked inference relative to the base detector.
    Bench(BenchArgs),
    /// Generate a synthetic labelled corpus.
    Synth(SynthArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct DetectorArgs {
    /// Saved model file (logistic regression or n-gram language model).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Program implementing the external scoring protocol.
    #[arg(long)]
    pub external: Option<String>,
    /// Argument passed to the external program (repeatable).
    #[arg(long = "external-arg", allow_hyphen_values = true)]
    pub external_args: Vec<String>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Directory for the model, training trace and validation report.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// logreg (hard-EM trained) or lm (count-based language models).
    #[arg(long)]
    pub detector: Option<String>,
    /// n-gram order.
    #[arg(long)]
    pub order: Option<usize>,
    /// word or char.
    #[arg(long)]
    pub feature_mode: Option<String>,
    #[arg(long)]
    pub buckets: Option<usize>,
    /// Add-lambda smoothing for the language models.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Train on full texts, without the retention step.
    #[arg(long)]
    pub plain: bool,
    /// train:val:test ratios.
    #[arg(long, value_delimiter = ',')]
    pub split: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub detector: DetectorArgs,
    /// JSONL corpus; `-` reads stdin.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// JSONL scores; `-` writes stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Wrap the detector without any training.
    #[arg(long)]
    pub training_free: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub detector: DetectorArgs,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// all, train, val or test.
    #[arg(long = "eval-split")]
    pub eval_split: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub split: Option<Vec<f64>>,
    /// Score full texts with the base detector only.
    #[arg(long)]
    pub base: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// categorical or gaussian.
    #[arg(long)]
    pub world: Option<String>,
    /// Gaussian dimension.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub delta: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,
    #[arg(long = "alpha-s", value_delimiter = ',')]
    pub alpha_s: Option<Vec<f64>>,
    #[arg(long = "alpha-h", value_delimiter = ',')]
    pub alpha_h: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub rho: Option<Vec<f64>>,
    /// Independent sequences per text when rho > 0.
    #[arg(long)]
    pub sequences: Option<usize>,
    /// Texts per class and grid point.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Repetitions for mean and standard deviation columns.
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub bootstrap: Option<usize>,
    /// exact or per-sentence.
    #[arg(long)]
    pub scoring: Option<String>,
    /// CSV table; `-` writes stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Optional JSON summary of the sweep.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OverlapArgs {
    #[arg(long)]
    pub human: Option<PathBuf>,
    #[arg(long)]
    pub machine: Option<PathBuf>,
    /// One labelled corpus instead of --human and --machine.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub detector: DetectorArgs,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Timed repetitions; the fastest of each is reported.
    #[arg(long)]
    pub repeats: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub n_human: Option<usize>,
    #[arg(long)]
    pub n_machine: Option<usize>,
    /// Replace this many sentences of each machine document with human ones.
    #[arg(long)]
    pub inject: Option<usize>,
}
