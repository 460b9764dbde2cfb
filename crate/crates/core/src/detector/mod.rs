//! The scoring contract shared by every detector, plus the native and
//! external implementations.

mod external;
mod features;
mod lm;
mod logreg;
mod model_file;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use external::{external_score, ClampRecord, ExternalBatch, ExternalDetector};
pub use features::{hashed_ngram_features, tokenize, FeatureMode, SparseFeatures};
pub use lm::NGramLmDetector;
pub use logreg::{Gradient, NGramLogRegModel, DEFAULT_HASH_BUCKETS};
pub use model_file::MODEL_FORMAT_VERSION;

/// Confidence that a text is machine generated, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct DetectorScore(f64);

impl DetectorScore {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || !(0.0..=1.0).contains(&value) {
            return Err(Error::Numerical {
                feature_index: 0,
                context: format!("score {value} outside [0, 1]"),
            });
        }
        Ok(DetectorScore(value))
    }

    /// Clamps into `[0, 1]`; `None` for NaN.
    pub fn clamped(value: f64) -> Option<Self> {
        if value.is_nan() {
            None
        } else {
            Some(DetectorScore(value.clamp(0.0, 1.0)))
        }
    }

    pub fn from_logit(z: f64) -> Self {
        DetectorScore(sigmoid(z))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for DetectorScore {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        DetectorScore::new(v)
    }
}

impl From<DetectorScore> for f64 {
    fn from(s: DetectorScore) -> f64 {
        s.0
    }
}

/// Logistic function with `sigmoid(-z) == 1 - sigmoid(z)` holding bit for
/// bit.
pub fn sigmoid(z: f64) -> f64 {
    let p = 1.0 / (1.0 + (-z.abs()).exp());
    if z >= 0.0 {
        p
    } else {
        1.0 - p
    }
}

/// `ln(1 + e^x)` without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

pub(crate) fn require_text(text: &str) -> Result<()> {
    if text.trim().is_empty() {
        Err(Error::EmptyDocument)
    } else {
        Ok(())
    }
}

/// Anything that maps a text to a machine-generation confidence.
pub trait Detector: Send + Sync {
    fn score(&self, text: &str) -> Result<DetectorScore>;

    /// Scores several texts. Implementations with per-call overhead (such
    /// as external processes) override this to amortize it.
    fn score_batch(&self, texts: &[&str]) -> Result<Vec<DetectorScore>> {
        texts.iter().map(|t| self.score(t)).collect()
    }

    fn name(&self) -> String;
}

impl<D: Detector + ?Sized> Detector for &D {
    fn score(&self, text: &str) -> Result<DetectorScore> {
        (**self).score(text)
    }
    fn score_batch(&self, texts: &[&str]) -> Result<Vec<DetectorScore>> {
        (**self).score_batch(texts)
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

impl<D: Detector + ?Sized> Detector for Box<D> {
    fn score(&self, text: &str) -> Result<DetectorScore> {
        (**self).score(text)
    }
    fn score_batch(&self, texts: &[&str]) -> Result<Vec<DetectorScore>> {
        (**self).score_batch(texts)
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

/// Detectors that can be named in configuration and persisted.
#[derive(Debug, Clone)]
pub enum DetectorModel {
    LogReg(NGramLogRegModel),
    Lm(NGramLmDetector),
    External(ExternalDetector),
}

impl Detector for DetectorModel {
    fn score(&self, text: &str) -> Result<DetectorScore> {
        match self {
            DetectorModel::LogReg(m) => m.score(text),
            DetectorModel::Lm(m) => m.score(text),
            DetectorModel::External(m) => m.score(text),
        }
    }

    fn score_batch(&self, texts: &[&str]) -> Result<Vec<DetectorScore>> {
        match self {
            DetectorModel::LogReg(m) => m.score_batch(texts),
            DetectorModel::Lm(m) => m.score_batch(texts),
            DetectorModel::External(m) => m.score_batch(texts),
        }
    }

    fn name(&self) -> String {
        match self {
            DetectorModel::LogReg(m) => m.name(),
            DetectorModel::Lm(m) => m.name(),
            DetectorModel::External(m) => m.name(),
        }
    }
}

impl DetectorModel {
    /// Writes a native model; external detectors have no file form.
    pub fn save(&self, path: &Path) -> Result<()> {
        match self {
            DetectorModel::LogReg(m) => m.save(path),
            DetectorModel::Lm(m) => m.save(path),
            DetectorModel::External(_) => Err(Error::ModelFormat(
                "external detectors are configured, not saved".into(),
            )),
        }
    }

    /// Loads either native format, dispatching on the leading bytes.
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        if bytes.starts_with(model_file::LOGREG_MAGIC) {
            Ok(DetectorModel::LogReg(NGramLogRegModel::from_bytes(&bytes)?))
        } else if bytes.first() == Some(&b'{') {
            Ok(DetectorModel::Lm(NGramLmDetector::from_json_bytes(&bytes)?))
        } else {
            Err(Error::ModelFormat(format!(
                "{} is neither a logistic-regression nor a language-model file",
                path.display()
            )))
        }
    }
}
