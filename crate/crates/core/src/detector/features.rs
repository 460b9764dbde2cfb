//! Tokenization and hashed n-gram featurization shared by the native
//! detectors. Every token and n-gram is reduced to a keyed 64-bit FNV-1a
//! hash, so feature indices are identical across runs and platforms.

use std::hash::Hasher;

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};

const HASH_KEY: u64 = 0x5eed_cafe_f00d_d00d;
/// Padding token used as left context at the start of a text.
pub(crate) const BOS: u64 = 0x0b05_0b05_0b05_0b05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMode {
    /// Lowercased alphanumeric word tokens.
    Word,
    /// Lowercased characters with whitespace runs collapsed to one space.
    Char,
}

impl FeatureMode {
    pub(crate) fn code(self) -> u8 {
        match self {
            FeatureMode::Word => 0,
            FeatureMode::Char => 1,
        }
    }

    pub(crate) fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(FeatureMode::Word),
            1 => Some(FeatureMode::Char),
            _ => None,
        }
    }
}

impl std::str::FromStr for FeatureMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "word" => Ok(FeatureMode::Word),
            "char" => Ok(FeatureMode::Char),
            other => Err(format!("unknown feature mode '{other}' (expected word|char)")),
        }
    }
}

fn hasher() -> FnvHasher {
    FnvHasher::with_key(HASH_KEY)
}

/// Maps `text` to a stream of token hashes.
pub fn tokenize(text: &str, mode: FeatureMode) -> Vec<u64> {
    match mode {
        FeatureMode::Word => {
            let mut out = Vec::with_capacity(text.len() / 4 + 1);
            let mut h: Option<FnvHasher> = None;
            let mut buf = [0u8; 4];
            for c in text.chars() {
                if c.is_alphanumeric() {
                    let hh = h.get_or_insert_with(hasher);
                    for lc in c.to_lowercase() {
                        hh.write(lc.encode_utf8(&mut buf).as_bytes());
                    }
                } else if let Some(done) = h.take() {
                    out.push(done.finish());
                }
            }
            if let Some(done) = h.take() {
                out.push(done.finish());
            }
            out
        }
        FeatureMode::Char => {
            let mut out = Vec::with_capacity(text.len());
            let mut pending_space = false;
            for c in text.chars() {
                if c.is_whitespace() {
                    pending_space = !out.is_empty();
                    continue;
                }
                if pending_space {
                    out.push(' ' as u64);
                    pending_space = false;
                }
                out.extend(c.to_lowercase().map(|lc| lc as u64));
            }
            out
        }
    }
}

/// Hash of an n-gram given as a token window. `domain` separates hash
/// families that must not collide (e.g. contexts vs full n-grams).
pub(crate) fn ngram_hash(domain: u8, window: &[u64]) -> u64 {
    let mut h = hasher();
    h.write_u8(domain);
    h.write_u8(window.len() as u8);
    for t in window {
        h.write_u64(*t);
    }
    h.finish()
}

/// Sparse, L2-normalized hashed n-gram counts. Indices are strictly
/// increasing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseFeatures {
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparseFeatures {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices
            .iter()
            .map(|&i| i as usize)
            .zip(self.values.iter().copied())
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.iter().map(|(i, v)| dense[i] * v).sum()
    }
}

/// Hashes all n-grams of orders `1..=n` into `buckets` slots.
pub fn hashed_ngram_features(tokens: &[u64], n: usize, buckets: usize) -> SparseFeatures {
    let mut slots: Vec<u32> = Vec::with_capacity(tokens.len() * n);
    for order in 1..=n {
        if tokens.len() < order {
            break;
        }
        for w in tokens.windows(order) {
            slots.push((ngram_hash(0, w) % buckets as u64) as u32);
        }
    }
    slots.sort_unstable();
    let mut indices = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for s in slots {
        if indices.last() == Some(&s) {
            *values.last_mut().expect("paired") += 1.0;
        } else {
            indices.push(s);
            values.push(1.0);
        }
    }
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in &mut values {
            *v /= norm;
        }
    }
    SparseFeatures { indices, values }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_tokens_ignore_case_and_punctuation() {
        let a = tokenize("Hello, WORLD!", FeatureMode::Word);
        let b = tokenize("hello world", FeatureMode::Word);
        assert_eq!(a.len(), 2);
        assert_eq!(a, b);
    }

    #[test]
    fn char_tokens_collapse_whitespace() {
        let a = tokenize("  Ab \n\t c ", FeatureMode::Char);
        assert_eq!(a, vec!['a' as u64, 'b' as u64, ' ' as u64, 'c' as u64]);
    }

    #[test]
    fn features_are_normalized_and_sorted() {
        let toks = tokenize("the cat the cat the dog", FeatureMode::Word);
        let f = hashed_ngram_features(&toks, 2, 1 << 18);
        assert!(f.indices.windows(2).all(|w| w[0] < w[1]));
        let norm: f64 = f.values.iter().map(|v| v * v).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hashing_is_pinned() {
        // frozen values: a change here silently invalidates saved models
        let toks = tokenize("stable", FeatureMode::Word);
        let f = hashed_ngram_features(&toks, 1, 1 << 18);
        let again = hashed_ngram_features(&tokenize("STABLE", FeatureMode::Word), 1, 1 << 18);
        assert_eq!(f, again);
        assert_eq!(f.indices.len(), 1);
        assert_eq!(f.indices[0], 91613);
    }
}
