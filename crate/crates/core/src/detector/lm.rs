//! Zero-shot n-gram log-likelihood-ratio detector.
//!
//! Two add-lambda smoothed n-gram language models, one fit on human text
//! and one on machine text, score a text by
//! `sigmoid(log M(text) - log H(text))`.

use std::path::Path;

use fnv::{FnvHashMap, FnvHashSet};
use serde::{Deserialize, Serialize};

use crate::detector::features::{ngram_hash, tokenize, FeatureMode, BOS};
use crate::detector::{require_text, Detector, DetectorScore};
use crate::error::{Error, Result};

const LM_FORMAT: &str = "stackdet-ngram-lm";
const LM_VERSION: u32 = 1;

const DOMAIN_NGRAM: u8 = 1;
const DOMAIN_CONTEXT: u8 = 2;

#[derive(Debug, Clone, Default, PartialEq)]
struct NGramCounts {
    ngrams: FnvHashMap<u64, u64>,
    contexts: FnvHashMap<u64, u64>,
}

impl NGramCounts {
    fn add(&mut self, tokens: &[u64], n: usize) {
        for_each_window(tokens, n, |ctx, ng| {
            *self.ngrams.entry(ng).or_insert(0) += 1;
            *self.contexts.entry(ctx).or_insert(0) += 1;
        });
    }

    fn log_prob(&self, ctx: u64, ng: u64, lambda: f64, vocab: f64) -> f64 {
        let c_ng = self.ngrams.get(&ng).copied().unwrap_or(0) as f64;
        let c_ctx = self.contexts.get(&ctx).copied().unwrap_or(0) as f64;
        (c_ng + lambda).ln() - (c_ctx + lambda * vocab).ln()
    }

    fn to_serial(&self) -> SerialCounts {
        let sorted = |m: &FnvHashMap<u64, u64>| {
            let mut v: Vec<(u64, u64)> = m.iter().map(|(k, v)| (*k, *v)).collect();
            v.sort_unstable();
            v
        };
        SerialCounts {
            ngrams: sorted(&self.ngrams),
            contexts: sorted(&self.contexts),
        }
    }

    fn from_serial(s: SerialCounts) -> Self {
        NGramCounts {
            ngrams: s.ngrams.into_iter().collect(),
            contexts: s.contexts.into_iter().collect(),
        }
    }
}

/// Calls `f(context_hash, ngram_hash)` for every position, left-padding
/// with BOS so each token has `n - 1` tokens of context.
fn for_each_window(tokens: &[u64], n: usize, mut f: impl FnMut(u64, u64)) {
    let mut window = vec![BOS; n];
    for &t in tokens {
        window.rotate_left(1);
        window[n - 1] = t;
        f(
            ngram_hash(DOMAIN_CONTEXT, &window[..n - 1]),
            ngram_hash(DOMAIN_NGRAM, &window),
        );
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NGramLmDetector {
    n: usize,
    mode: FeatureMode,
    lambda: f64,
    vocab_size: usize,
    human: NGramCounts,
    machine: NGramCounts,
}

#[derive(Serialize, Deserialize)]
struct SerialCounts {
    ngrams: Vec<(u64, u64)>,
    contexts: Vec<(u64, u64)>,
}

#[derive(Serialize, Deserialize)]
struct SerialLm {
    format: String,
    version: u32,
    n: usize,
    feature_mode: FeatureMode,
    lambda: f64,
    vocab_size: usize,
    human: SerialCounts,
    machine: SerialCounts,
}

impl NGramLmDetector {
    /// Fits both language models. The vocabulary size used for smoothing
    /// is the number of distinct tokens seen in either corpus, plus one for
    /// unseen tokens.
    pub fn fit<H, M, S, T>(human: H, machine: M, n: usize, mode: FeatureMode, lambda: f64) -> Result<Self>
    where
        H: IntoIterator<Item = S>,
        M: IntoIterator<Item = T>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        if n < 1 {
            return Err(Error::config("n-gram order must be at least 1"));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::config(format!("smoothing lambda must be > 0, got {lambda}")));
        }
        let mut vocab = FnvHashSet::default();
        let mut fit_side = |texts: &mut dyn Iterator<Item = String>| {
            let mut counts = NGramCounts::default();
            for t in texts {
                let toks = tokenize(&t, mode);
                vocab.extend(toks.iter().copied());
                counts.add(&toks, n);
            }
            counts
        };
        let human = fit_side(&mut human.into_iter().map(|t| t.as_ref().to_owned()));
        let machine = fit_side(&mut machine.into_iter().map(|t| t.as_ref().to_owned()));
        Ok(NGramLmDetector {
            n,
            mode,
            lambda,
            vocab_size: vocab.len() + 1,
            human,
            machine,
        })
    }

    /// The same detector with the two class models exchanged.
    pub fn swapped(&self) -> Self {
        let mut s = self.clone();
        std::mem::swap(&mut s.human, &mut s.machine);
        s
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `log M(text) - log H(text)` under the smoothed models.
    pub fn log_ratio(&self, text: &str) -> f64 {
        let toks = tokenize(text, self.mode);
        let v = self.vocab_size as f64;
        let mut total = 0.0;
        for_each_window(&toks, self.n, |ctx, ng| {
            total += self.machine.log_prob(ctx, ng, self.lambda, v) - self.human.log_prob(ctx, ng, self.lambda, v);
        });
        total
    }

    pub fn to_json_bytes(&self) -> Vec<u8> {
        let s = SerialLm {
            format: LM_FORMAT.into(),
            version: LM_VERSION,
            n: self.n,
            feature_mode: self.mode,
            lambda: self.lambda,
            vocab_size: self.vocab_size,
            human: self.human.to_serial(),
            machine: self.machine.to_serial(),
        };
        serde_json::to_vec(&s).expect("serializable")
    }

    pub fn from_json_bytes(bytes: &[u8]) -> Result<Self> {
        let s: SerialLm =
            serde_json::from_slice(bytes).map_err(|e| Error::ModelFormat(format!("language model: {e}")))?;
        if s.format != LM_FORMAT {
            return Err(Error::ModelFormat(format!("unknown format tag '{}'", s.format)));
        }
        if s.version != LM_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported language-model version {} (expected {LM_VERSION})",
                s.version
            )));
        }
        if s.n < 1 || !(s.lambda > 0.0 && s.lambda.is_finite()) || s.vocab_size < 1 {
            return Err(Error::ModelFormat("invalid language-model parameters".into()));
        }
        Ok(NGramLmDetector {
            n: s.n,
            mode: s.feature_mode,
            lambda: s.lambda,
            vocab_size: s.vocab_size,
            human: NGramCounts::from_serial(s.human),
            machine: NGramCounts::from_serial(s.machine),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        NGramLmDetector::from_json_bytes(&std::fs::read(path)?)
    }
}

impl Detector for NGramLmDetector {
    fn score(&self, text: &str) -> Result<DetectorScore> {
        require_text(text)?;
        Ok(DetectorScore::from_logit(self.log_ratio(text)))
    }

    fn name(&self) -> String {
        format!("ngram-lm-{}", self.n)
    }
}
