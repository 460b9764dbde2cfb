//! Synthetic two-author text world.
//!
//! Sentences are built from pseudo-words in four pools: common words used
//! by both classes, human-leaning and machine-leaning marker words, and a
//! pool of rare words that only humans use. A fraction of human sentences
//! carry rare words, which gives human evidence a heavy tail: most human
//! sentences are only mildly distinguishable, a few are unmistakable.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::derive_seed;
use crate::detector::{Detector, FeatureMode, NGramLmDetector};
use crate::error::{Error, Result};
use crate::evaluation::{auroc, inject_human_sentences};
use crate::retention::{random_mask, FilterConfig};
use crate::segmentation::{group_subsequences, reconstruct, Document, Label};
use crate::stacked::training_free_wrap;

const ONSETS: [&str; 16] = [
    "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "tr",
];
const NUCLEI: [&str; 5] = ["a", "e", "i", "o", "u"];
const CODAS: [&str; 4] = ["", "n", "l", "r"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_human: usize,
    pub n_machine: usize,
    /// Extra human sentences kept apart for injection.
    pub pool_size: usize,
    pub min_sentences: usize,
    pub max_sentences: usize,
    pub min_words: usize,
    pub max_words: usize,
    pub common_words: usize,
    pub marker_words: usize,
    pub rare_words: usize,
    /// Share of marker words in a sentence.
    pub marker_rate: f64,
    /// Share of markers from the author's own side.
    pub marker_purity: f64,
    /// Chance that a human sentence carries rare human words.
    pub rare_sentence_rate: f64,
    pub rare_per_sentence: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_human: 500,
            n_machine: 500,
            pool_size: 2000,
            min_sentences: 10,
            max_sentences: 14,
            min_words: 6,
            max_words: 12,
            common_words: 300,
            marker_words: 200,
            rare_words: 400,
            marker_rate: 0.3,
            marker_purity: 0.65,
            rare_sentence_rate: 0.8,
            rare_per_sentence: 4,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_sentences < 1 || self.min_sentences > self.max_sentences {
            return Err(Error::config("need 1 <= min_sentences <= max_sentences"));
        }
        if self.min_words < 1 || self.min_words > self.max_words {
            return Err(Error::config("need 1 <= min_words <= max_words"));
        }
        if self.common_words == 0 || self.marker_words == 0 || self.rare_words == 0 {
            return Err(Error::config("word pools must be non-empty"));
        }
        for (name, p) in [
            ("marker_rate", self.marker_rate),
            ("marker_purity", self.marker_purity),
            ("rare_sentence_rate", self.rare_sentence_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(format!("{name} must be in [0, 1], got {p}")));
            }
        }
        Ok(())
    }
}

/// Generated documents plus a held-out pool of human sentences.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub human: Vec<Document>,
    pub machine: Vec<Document>,
    pub human_pool: Vec<String>,
}

impl SynthCorpus {
    /// Human then machine documents.
    pub fn documents(&self) -> Vec<Document> {
        self.human.iter().chain(&self.machine).cloned().collect()
    }
}

struct Vocabulary {
    common: Vec<String>,
    human: Vec<String>,
    machine: Vec<String>,
    rare: Vec<String>,
}

fn syllable<R: Rng + ?Sized>(rng: &mut R) -> String {
    let mut s = String::new();
    s.push_str(ONSETS.choose(rng).unwrap());
    s.push_str(NUCLEI.choose(rng).unwrap());
    s.push_str(CODAS.choose(rng).unwrap());
    s
}

impl Vocabulary {
    // The vocabulary is fixed across seeds so that corpora generated with
    // different seeds share one language.
    fn build(cfg: &SynthConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0076_6f63_6162);
        let mut seen = std::collections::HashSet::new();
        let mut take = |count: usize, rng: &mut ChaCha8Rng| -> Vec<String> {
            let mut out = Vec::with_capacity(count);
            while out.len() < count {
                let n = rng.random_range(2..=3);
                let w: String = (0..n).map(|_| syllable(rng)).collect();
                if seen.insert(w.clone()) {
                    out.push(w);
                }
            }
            out
        };
        Vocabulary {
            common: take(cfg.common_words, &mut rng),
            human: take(cfg.marker_words, &mut rng),
            machine: take(cfg.marker_words, &mut rng),
            rare: take(cfg.rare_words, &mut rng),
        }
    }

    fn sentence<R: Rng + ?Sized>(&self, cfg: &SynthConfig, author: Label, rng: &mut R) -> String {
        let len = rng.random_range(cfg.min_words..=cfg.max_words);
        let (own, other) = match author {
            Label::Human => (&self.human, &self.machine),
            Label::Machine => (&self.machine, &self.human),
        };
        let mut words: Vec<&str> = (0..len)
            .map(|_| {
                let pool = if rng.random_bool(cfg.marker_rate) {
                    if rng.random_bool(cfg.marker_purity) {
                        own
                    } else {
                        other
                    }
                } else {
                    &self.common
                };
                pool.choose(rng).unwrap().as_str()
            })
            .collect();
        if author == Label::Human && rng.random_bool(cfg.rare_sentence_rate) {
            for _ in 0..cfg.rare_per_sentence.min(len) {
                let at = rng.random_range(0..words.len());
                words[at] = self.rare.choose(rng).unwrap().as_str();
            }
        }
        let mut s = words.join(" ");
        if let Some(first) = s.get_mut(0..1) {
            first.make_ascii_uppercase();
        }
        s.push('.');
        s
    }
}

/// Generates a corpus; the same config and seed always give the same output.
pub fn generate(cfg: &SynthConfig, seed: u64) -> Result<SynthCorpus> {
    cfg.validate()?;
    let vocab = Vocabulary::build(cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let doc = |id: String, label: Label, rng: &mut ChaCha8Rng| -> Result<Document> {
        let n = rng.random_range(cfg.min_sentences..=cfg.max_sentences);
        let sentences: Vec<String> = (0..n).map(|_| vocab.sentence(cfg, label, rng)).collect();
        Document::from_sentences(id, &sentences, Some(label))
    };
    let human = (0..cfg.n_human)
        .map(|i| doc(format!("h{i:05}"), Label::Human, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let machine = (0..cfg.n_machine)
        .map(|i| doc(format!("m{i:05}"), Label::Machine, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let human_pool = (0..cfg.pool_size)
        .map(|_| vocab.sentence(cfg, Label::Human, &mut rng))
        .collect();
    Ok(SynthCorpus {
        human,
        machine,
        human_pool,
    })
}

/// AUROCs for one replacement count in [`mixed_replacement_study`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedPoint {
    pub replaced: usize,
    pub base: f64,
    pub stacked: f64,
    /// Stacked inference with each mask swapped for a uniformly random one
    /// dropping the same number of subsequences.
    pub random: f64,
}

/// Options for [`mixed_replacement_study`].
#[derive(Debug, Clone, PartialEq)]
pub struct MixedStudy {
    pub synth: SynthConfig,
    pub filter: FilterConfig,
    pub seeds: Vec<u64>,
    pub replacements: Vec<usize>,
    /// Documents per class used to fit the language models; the rest are test.
    pub train_per_class: usize,
    pub order: usize,
    pub lambda: f64,
}

impl Default for MixedStudy {
    fn default() -> Self {
        MixedStudy {
            synth: SynthConfig::default(),
            filter: FilterConfig::default(),
            seeds: (0..5).collect(),
            replacements: (0..=5).collect(),
            train_per_class: 250,
            order: 1,
            lambda: 0.1,
        }
    }
}

/// Fits a word n-gram LM detector on clean documents, replaces sentences of
/// the held-out machine documents with human pool sentences, and scores the
/// test set with the base detector, the training-free stacked wrapper and a
/// random-mask control. Results are averaged over seeds.
pub fn mixed_replacement_study(study: &MixedStudy) -> Result<Vec<MixedPoint>> {
    if study.seeds.is_empty() {
        return Err(Error::config("need at least one seed"));
    }
    let t = study.train_per_class;
    if t == 0 || t >= study.synth.n_human || t >= study.synth.n_machine {
        return Err(Error::config(
            "train_per_class must leave test documents in both classes",
        ));
    }
    let mut sums = vec![[0.0; 3]; study.replacements.len()];
    for &seed in &study.seeds {
        let corpus = generate(&study.synth, seed)?;
        let text = |d: &Document| d.text.clone();
        let lm = NGramLmDetector::fit(
            corpus.human[..t].iter().map(text),
            corpus.machine[..t].iter().map(text),
            study.order,
            FeatureMode::Word,
            study.lambda,
        )?;
        let stacked = training_free_wrap(&lm, study.filter)?;
        for (slot, &r) in sums.iter_mut().zip(&study.replacements) {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[r as u64]));
            let mut test: Vec<Document> = corpus.human[t..].to_vec();
            for m in &corpus.machine[t..] {
                test.push(inject_human_sentences(m, &corpus.human_pool, r, &mut rng)?);
            }
            let labels: Vec<Label> = test
                .iter()
                .map(|d| d.label.expect("synthetic documents are labelled"))
                .collect();
            let base: Vec<f64> = test
                .iter()
                .map(|d| lm.score(&d.text).map(|s| s.value()))
                .collect::<Result<_>>()?;
            let outcomes = stacked.infer_corpus(&test)?;
            let stacked_scores: Vec<f64> = outcomes.iter().map(|o| o.score.value()).collect();
            let random = test
                .iter()
                .zip(&outcomes)
                .enumerate()
                .map(|(i, (d, o))| {
                    if o.n_filtered == 0 {
                        return Ok(o.score.value());
                    }
                    let groups = group_subsequences(d, study.filter.k)?;
                    let ratio = o.n_filtered as f64 / o.n_groups as f64;
                    let mask = random_mask(o.n_groups, ratio, derive_seed(seed, &[99, r as u64, i as u64]))?;
                    Ok(lm.score(&reconstruct(d, &groups, &mask)?)?.value())
                })
                .collect::<Result<Vec<f64>>>()?;
            slot[0] += auroc(&base, &labels)?;
            slot[1] += auroc(&stacked_scores, &labels)?;
            slot[2] += auroc(&random, &labels)?;
        }
    }
    let k = study.seeds.len() as f64;
    Ok(study
        .replacements
        .iter()
        .zip(sums)
        .map(|(&replaced, s)| MixedPoint {
            replaced,
            base: s[0] / k,
            stacked: s[1] / k,
            random: s[2] / k,
        })
        .collect())
}
