use std::path::Path;

use crate::detector::features::{hashed_ngram_features, tokenize, FeatureMode, SparseFeatures};
use crate::detector::{require_text, sigmoid, softplus, Detector, DetectorScore};
use crate::error::{Error, Result};
use crate::segmentation::Label;

pub const DEFAULT_HASH_BUCKETS: usize = 1 << 18;

/// Logistic regression over hashed n-gram features.
#[derive(Debug, Clone, PartialEq)]
pub struct NGramLogRegModel {
    pub(crate) n: usize,
    pub(crate) feature_mode: FeatureMode,
    pub(crate) hash_buckets: usize,
    pub(crate) weights: Vec<f64>,
    pub(crate) bias: f64,
}

/// Gradient of the mean binary log-likelihood over a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl NGramLogRegModel {
    /// Zero-initialized model.
    pub fn new(n: usize, feature_mode: FeatureMode, hash_buckets: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::config("n-gram order must be at least 1"));
        }
        if hash_buckets < 1 || hash_buckets > u32::MAX as usize {
            return Err(Error::config("hash_buckets must be in [1, 2^32)"));
        }
        Ok(NGramLogRegModel {
            n,
            feature_mode,
            hash_buckets,
            weights: vec![0.0; hash_buckets],
            bias: 0.0,
        })
    }

    pub fn with_parameters(n: usize, feature_mode: FeatureMode, weights: Vec<f64>, bias: f64) -> Result<Self> {
        let mut m = NGramLogRegModel::new(n, feature_mode, weights.len())?;
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::Numerical {
                feature_index: i,
                context: "non-finite weight".into(),
            });
        }
        if !bias.is_finite() {
            return Err(Error::Numerical {
                feature_index: weights.len(),
                context: "non-finite bias".into(),
            });
        }
        m.weights = weights;
        m.bias = bias;
        Ok(m)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn feature_mode(&self) -> FeatureMode {
        self.feature_mode
    }

    pub fn hash_buckets(&self) -> usize {
        self.hash_buckets
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn featurize(&self, text: &str) -> SparseFeatures {
        let tokens = tokenize(text, self.feature_mode);
        hashed_ngram_features(&tokens, self.n, self.hash_buckets)
    }

    pub fn margin(&self, x: &SparseFeatures) -> f64 {
        x.dot(&self.weights) + self.bias
    }

    pub fn score_features(&self, x: &SparseFeatures) -> DetectorScore {
        DetectorScore::from_logit(self.margin(x))
    }

    /// Mean binary log-likelihood of `batch`.
    pub fn log_likelihood(&self, batch: &[(SparseFeatures, Label)]) -> f64 {
        if batch.is_empty() {
            return 0.0;
        }
        let total: f64 = batch
            .iter()
            .map(|(x, y)| {
                let z = self.margin(x);
                match y {
                    Label::Machine => -softplus(-z),
                    Label::Human => -softplus(z),
                }
            })
            .sum();
        total / batch.len() as f64
    }

    /// Gradient of [`Self::log_likelihood`] with respect to weights and bias.
    pub fn gradient(&self, batch: &[(SparseFeatures, Label)]) -> Result<Gradient> {
        if batch.is_empty() {
            return Err(Error::config("gradient of an empty batch"));
        }
        let mut weights = vec![0.0; self.hash_buckets];
        let mut bias = 0.0;
        for (x, y) in batch {
            let residual = y.as_f64() - sigmoid(self.margin(x));
            for (i, v) in x.iter() {
                weights[i] += residual * v;
            }
            bias += residual;
        }
        let scale = 1.0 / batch.len() as f64;
        for w in &mut weights {
            *w *= scale;
        }
        bias *= scale;
        if let Some(i) = weights.iter().position(|g| !g.is_finite()) {
            return Err(Error::Numerical {
                feature_index: i,
                context: "non-finite gradient".into(),
            });
        }
        if !bias.is_finite() {
            return Err(Error::Numerical {
                feature_index: self.hash_buckets,
                context: "non-finite bias gradient".into(),
            });
        }
        Ok(Gradient { weights, bias })
    }

    /// In-place ascent step `theta += lr * grad`.
    pub fn apply_gradient(&mut self, grad: &Gradient, lr: f64) {
        for (w, g) in self.weights.iter_mut().zip(&grad.weights) {
            *w += lr * g;
        }
        self.bias += lr * grad.bias;
    }

    /// One full-batch gradient ascent step on the mean log-likelihood.
    /// The receiver is left untouched.
    pub fn grad_update(&self, batch: &[(&str, Label)], lr: f64) -> Result<Self> {
        if batch.is_empty() {
            return Err(Error::config("empty training batch"));
        }
        let feats: Vec<(SparseFeatures, Label)> = batch.iter().map(|(t, y)| (self.featurize(t), *y)).collect();
        let grad = self.gradient(&feats)?;
        let mut next = self.clone();
        next.apply_gradient(&grad, lr);
        Ok(next)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        NGramLogRegModel::from_bytes(&std::fs::read(path)?)
    }
}

impl Detector for NGramLogRegModel {
    fn score(&self, text: &str) -> Result<DetectorScore> {
        require_text(text)?;
        Ok(self.score_features(&self.featurize(text)))
    }

    fn name(&self) -> String {
        format!(
            "logreg-{}gram-{}",
            self.n,
            match self.feature_mode {
                FeatureMode::Word => "word",
                FeatureMode::Char => "char",
            }
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> NGramLogRegModel {
        NGramLogRegModel::with_parameters(1, FeatureMode::Word, vec![0.3, -0.7, 1.1, 0.05, -0.2], 0.1).unwrap()
    }

    #[test]
    fn zero_model_scores_half() {
        let m = NGramLogRegModel::new(2, FeatureMode::Word, 64).unwrap();
        assert_eq!(m.score("anything at all").unwrap().value(), 0.5);
        assert!(matches!(m.score("   "), Err(Error::EmptyDocument)));
    }

    #[test]
    fn zero_step_is_identity() {
        let m = toy();
        let next = m
            .grad_update(&[("a b c", Label::Machine), ("d e", Label::Human)], 0.0)
            .unwrap();
        assert_eq!(next, m);
    }

    #[test]
    fn update_leaves_input_untouched() {
        let m = toy();
        let before = m.clone();
        let next = m.grad_update(&[("alpha beta", Label::Machine)], 0.5).unwrap();
        assert_eq!(m, before);
        assert_ne!(next, m);
    }

    #[test]
    fn repeated_steps_do_not_decrease_likelihood() {
        let mut m = toy();
        let batch = [("one two three", Label::Machine)];
        let feats: Vec<_> = batch.iter().map(|(t, y)| (m.featurize(t), *y)).collect();
        let mut prev = m.log_likelihood(&feats);
        for _ in 0..200 {
            let g = m.gradient(&feats).unwrap();
            let norm = g.weights.iter().map(|v| v * v).sum::<f64>() + g.bias * g.bias;
            if norm.sqrt() < 1e-8 {
                break;
            }
            m = m.grad_update(&batch, 0.5).unwrap();
            let ll = m.log_likelihood(&feats);
            assert!(ll >= prev, "{ll} < {prev}");
            prev = ll;
        }
    }

    #[test]
    fn non_finite_weights_are_rejected() {
        let err = NGramLogRegModel::with_parameters(1, FeatureMode::Word, vec![0.0, f64::NAN], 0.0).unwrap_err();
        assert!(matches!(err, Error::Numerical { feature_index: 1, .. }));
    }

    #[test]
    fn overflowing_gradient_names_the_feature() {
        let mut m = NGramLogRegModel::new(1, FeatureMode::Word, 4).unwrap();
        let x = SparseFeatures {
            indices: vec![2],
            values: vec![f64::INFINITY],
        };
        m.bias = 0.0;
        let err = m.gradient(&[(x, Label::Machine)]).unwrap_err();
        assert!(matches!(err, Error::Numerical { feature_index: 2, .. }), "{err}");
    }
}
