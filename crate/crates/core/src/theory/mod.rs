//! Monte Carlo simulator for the sentence-complexity argument.
//!
//! Texts are sequences of abstract sentences drawn from a human
//! distribution `h` and a machine distribution `m` with known total
//! variation distance. Machine texts hide a proportion `alpha` of
//! human-like sentences at random positions; the optimal detector is the
//! likelihood ratio that marginalizes those positions.

pub mod experiment;
pub mod filter;
pub mod lr;
pub mod sample;
pub mod world;

pub use experiment::{
    bootstrap_auroc, run_experiment, run_point, simulate_scores, write_csv, AurocEstimate, ExperimentOptions,
    SimConfig, SweepGrid, SweepRow, WorldKind,
};
pub use filter::{apply_theory_filter, FilterCondition, FilterSpec};
pub use lr::{iid_log_ratio, likelihood_ratio_score, likelihood_ratio_score_with, MixtureScoring};
pub use sample::{sample_text, MixSpec, SampledText, SimText, TextClass, WorldSampler};
pub use world::{tv_distance, SentenceWorld};
