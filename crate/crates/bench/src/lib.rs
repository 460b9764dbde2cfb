//! Shared fixtures for the criterion benchmarks.

use stackdet_core::synth::{generate, SynthConfig};
use stackdet_core::{Document, FeatureMode, Label, NGramLmDetector};

/// A synthetic corpus of `n_docs` documents and a unigram LM detector fit
/// on a separate corpus drawn from the same world.
pub fn lm_fixture(n_docs: usize, seed: u64) -> (NGramLmDetector, Vec<Document>) {
    let half = n_docs.div_ceil(2).max(1);
    let cfg = SynthConfig {
        n_human: half,
        n_machine: half,
        pool_size: 100,
        ..SynthConfig::default()
    };
    let train = generate(&cfg, seed.wrapping_add(1)).expect("valid config");
    let side = |l: Label| {
        train
            .documents()
            .into_iter()
            .filter(move |d| d.label == Some(l))
            .map(|d| d.text)
    };
    let lm = NGramLmDetector::fit(side(Label::Human), side(Label::Machine), 1, FeatureMode::Word, 0.1)
        .expect("both classes present");
    let mut docs = generate(&cfg, seed).expect("valid config").documents();
    docs.truncate(n_docs);
    (lm, docs)
}
