//! Retention masks over document subsequences.
//!
//! A mask bit of `1` keeps a subsequence as machine-indicative evidence and
//! `0` filters it as confidently human-like. The constrained rule zeroes a
//! subsequence only when its score is below the strict threshold `r_e` *and*
//! it is among the `floor(tau * n)` lowest-scored subsequences, ties broken
//! toward the lower index. No rule ever emits an all-zero mask.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::detector::DetectorScore;
use crate::error::{Error, Result};
use crate::floor_count;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RetentionMask {
    bits: Vec<bool>,
}

impl RetentionMask {
    pub fn all_retained(n: usize) -> Self {
        RetentionMask { bits: vec![true; n] }
    }

    /// Fails with [`Error::EmptyRetention`] if no bit is set.
    pub fn from_bits(bits: Vec<bool>) -> Result<Self> {
        if !bits.iter().any(|&b| b) {
            return Err(Error::EmptyRetention);
        }
        Ok(RetentionMask { bits })
    }

    #[doc(hidden)]
    pub fn from_bits_unchecked(bits: Vec<bool>) -> Self {
        RetentionMask { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn n_retained(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn n_filtered(&self) -> usize {
        self.bits.len() - self.n_retained()
    }

    pub fn is_all_retained(&self) -> bool {
        self.bits.iter().all(|&b| b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    /// Strict human-likeness threshold, in `[0, 0.5)`.
    pub r_e: f64,
    /// Maximum fraction of subsequences that may be filtered, in `[0, 1)`.
    pub tau: f64,
    /// Maximum sentences per subsequence.
    pub k: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            r_e: 0.01,
            tau: 0.25,
            k: 3,
        }
    }
}

impl FilterConfig {
    pub fn new(r_e: f64, tau: f64, k: usize) -> Result<Self> {
        let cfg = FilterConfig { r_e, tau, k };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.r_e) {
            return Err(Error::config(format!("r_e must be in [0, 0.5), got {}", self.r_e)));
        }
        if !(0.0..1.0).contains(&self.tau) {
            return Err(Error::config(format!("tau must be in [0, 1), got {}", self.tau)));
        }
        if self.k < 1 {
            return Err(Error::config("k must be at least 1"));
        }
        Ok(())
    }

    /// Largest number of subsequences a document of `n_groups` may lose.
    pub fn filter_budget(&self, n_groups: usize) -> usize {
        floor_count(self.tau, n_groups)
    }
}

/// Indices of the `m` smallest scores; equal scores order by index.
fn bottom_set(scores: &[DetectorScore], m: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].value().total_cmp(&scores[b].value()).then(a.cmp(&b)));
    order.truncate(m);
    order
}

fn force_retain_max(bits: &mut [bool], scores: &[DetectorScore]) {
    if bits.iter().any(|&b| b) {
        return;
    }
    // highest score wins, lowest index on ties
    let best = (0..scores.len())
        .max_by(|&a, &b| scores[a].value().total_cmp(&scores[b].value()).then(b.cmp(&a)))
        .expect("non-empty scores");
    bits[best] = true;
}

/// Constrained retention rule.
pub fn compute_mask(scores: &[DetectorScore], cfg: &FilterConfig) -> Result<RetentionMask> {
    if scores.is_empty() {
        return Err(Error::EmptyDocument);
    }
    let mut bits = vec![true; scores.len()];
    for j in bottom_set(scores, cfg.filter_budget(scores.len())) {
        if scores[j].value() < cfg.r_e {
            bits[j] = false;
        }
    }
    force_retain_max(&mut bits, scores);
    Ok(RetentionMask { bits })
}

/// Unconstrained rule: keep a subsequence iff its score is at least 0.5.
/// An all-filtered result keeps the highest-scoring subsequence.
pub fn naive_mask(scores: &[DetectorScore]) -> Result<RetentionMask> {
    if scores.is_empty() {
        return Err(Error::EmptyDocument);
    }
    let mut bits: Vec<bool> = scores.iter().map(|s| s.value() >= 0.5).collect();
    force_retain_max(&mut bits, scores);
    Ok(RetentionMask { bits })
}

/// Drops exactly `floor(drop_ratio * n)` uniformly chosen subsequences.
pub fn random_mask(n: usize, drop_ratio: f64, seed: u64) -> Result<RetentionMask> {
    if !(0.0..1.0).contains(&drop_ratio) {
        return Err(Error::config(format!("drop ratio must be in [0, 1), got {drop_ratio}")));
    }
    if n == 0 {
        return Err(Error::EmptyDocument);
    }
    let drops = floor_count(drop_ratio, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bits = vec![true; n];
    for j in sample(&mut rng, n, drops) {
        bits[j] = false;
    }
    Ok(RetentionMask { bits })
}
