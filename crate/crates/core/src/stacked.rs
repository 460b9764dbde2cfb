//! Two-pass stacked inference and hard-EM training.
//!
//! Inference groups a document into subsequences, scores each one with the
//! base detector, filters confidently human-like subsequences through the
//! constrained retention rule, and scores the retained concatenation with
//! the same detector.
//!
//! Training alternates, per mini-batch, a hard E-step (retention masks from
//! the current parameters, never from labels) with a single gradient
//! ascent step on the binary log-likelihood of the retained texts. Masks
//! are treated as constants during the M-step.

use std::borrow::Cow;
use std::io::Write;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::{Detector, DetectorScore, NGramLogRegModel, SparseFeatures};
use crate::error::{Error, Result};
use crate::retention::{compute_mask, FilterConfig, RetentionMask};
use crate::segmentation::{group_subsequences, reconstruct, Document, Label, SubsequenceSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StackMode {
    Trained,
    TrainingFree,
}

#[derive(Debug, Clone)]
pub struct StackedDetector<D> {
    pub base: D,
    pub cfg: FilterConfig,
    pub mode: StackMode,
}

/// Everything the first pass decided about one document.
#[derive(Debug, Clone)]
pub struct Retained<'d> {
    pub groups: SubsequenceSet,
    pub mask: RetentionMask,
    pub text: Cow<'d, str>,
    /// Number of base-detector calls spent on the first pass.
    pub first_pass_calls: usize,
}

#[derive(Debug, Clone)]
pub struct StackedOutcome {
    pub score: DetectorScore,
    pub n_groups: usize,
    pub n_filtered: usize,
    pub mask: RetentionMask,
    pub base_calls: usize,
    pub retained_chars: usize,
}

/// First pass: compute the retention mask for `doc` and the text to score.
///
/// When the filter budget `floor(tau * n_groups)` is zero no mask bit can be
/// cleared, so subsequence scoring is skipped. When nothing is filtered the
/// original text is returned unchanged.
pub fn first_pass<'d, D: Detector + ?Sized>(base: &D, doc: &'d Document, cfg: &FilterConfig) -> Result<Retained<'d>> {
    let groups = group_subsequences(doc, cfg.k)?;
    if cfg.filter_budget(groups.len()) == 0 {
        return Ok(Retained {
            mask: RetentionMask::all_retained(groups.len()),
            groups,
            text: Cow::Borrowed(&doc.text),
            first_pass_calls: 0,
        });
    }
    let texts: Vec<&str> = groups.group_texts(doc).collect();
    let scores = base.score_batch(&texts)?;
    let mask = compute_mask(&scores, cfg)?;
    let text = if mask.is_all_retained() {
        Cow::Borrowed(doc.text.as_str())
    } else {
        Cow::Owned(reconstruct(doc, &groups, &mask)?)
    };
    Ok(Retained {
        first_pass_calls: texts.len(),
        groups,
        mask,
        text,
    })
}

impl<D: Detector> StackedDetector<D> {
    pub fn new(base: D, cfg: FilterConfig, mode: StackMode) -> Result<Self> {
        cfg.validate()?;
        Ok(StackedDetector { base, cfg, mode })
    }

    pub fn infer_detailed(&self, doc: &Document) -> Result<StackedOutcome> {
        let r = first_pass(&self.base, doc, &self.cfg)?;
        let score = self.base.score(&r.text)?;
        Ok(StackedOutcome {
            score,
            n_groups: r.groups.len(),
            n_filtered: r.mask.n_filtered(),
            base_calls: r.first_pass_calls + 1,
            retained_chars: r.text.chars().count(),
            mask: r.mask,
        })
    }

    pub fn infer(&self, doc: &Document) -> Result<DetectorScore> {
        Ok(self.infer_detailed(doc)?.score)
    }

    /// Scores every document in parallel; output order matches input order.
    pub fn infer_corpus(&self, docs: &[Document]) -> Result<Vec<StackedOutcome>> {
        docs.par_iter().map(|d| self.infer_detailed(d)).collect()
    }
}

impl<D: Detector> Detector for StackedDetector<D> {
    fn score(&self, text: &str) -> Result<DetectorScore> {
        let doc = Document::new("", text, None)?;
        self.infer(&doc)
    }

    fn name(&self) -> String {
        format!("stacked({})", self.base.name())
    }
}

pub fn stacked_infer<D: Detector>(sd: &StackedDetector<D>, doc: &Document) -> Result<DetectorScore> {
    sd.infer(doc)
}

/// Wraps a frozen detector in stacked inference without any training.
pub fn training_free_wrap<D: Detector>(base: D, cfg: FilterConfig) -> Result<StackedDetector<D>> {
    StackedDetector::new(base, cfg, StackMode::TrainingFree)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub filter: FilterConfig,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 5,
            learning_rate: 10.0,
            batch_size: 16,
            filter: FilterConfig::default(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config(format!(
                "learning rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size < 1 {
            return Err(Error::config("batch size must be at least 1"));
        }
        self.filter.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_q: f64,
    pub filtered_fraction: f64,
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub records: Vec<EpochRecord>,
}

impl TrainTrace {
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r).map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Hard E-step for a batch: masks from the current model. Labels are not
/// consulted.
pub fn e_step(model: &NGramLogRegModel, docs: &[&Document], cfg: &FilterConfig) -> Result<Vec<RetentionMask>> {
    docs.par_iter()
        .map(|d| first_pass(model, d, cfg).map(|r| r.mask))
        .collect()
}

enum Objective<'a> {
    Retained(&'a FilterConfig),
    FullText,
}

struct BatchStats {
    filtered: usize,
    groups: usize,
}

fn batch_features(
    model: &NGramLogRegModel,
    docs: &[&Document],
    objective: &Objective<'_>,
) -> Result<(Vec<(SparseFeatures, Label)>, BatchStats)> {
    let rows: Vec<(SparseFeatures, Label, usize, usize)> = docs
        .par_iter()
        .map(|d| {
            let label = d
                .label
                .ok_or_else(|| Error::config(format!("document '{}' has no label", d.id)))?;
            match objective {
                Objective::FullText => Ok((model.featurize(&d.text), label, 0, 0)),
                Objective::Retained(cfg) => {
                    let r = first_pass(model, d, cfg)?;
                    Ok((model.featurize(&r.text), label, r.mask.n_filtered(), r.groups.len()))
                }
            }
        })
        .collect::<Result<_>>()?;
    let mut stats = BatchStats { filtered: 0, groups: 0 };
    let feats = rows
        .into_iter()
        .map(|(x, y, f, g)| {
            stats.filtered += f;
            stats.groups += g;
            (x, y)
        })
        .collect();
    Ok((feats, stats))
}

fn check_classes(data: &[Document]) -> Result<()> {
    let has = |l| data.iter().any(|d| d.label == Some(l));
    if !has(Label::Human) || !has(Label::Machine) {
        return Err(Error::DegenerateDataset(format!(
            "training data ({} documents) needs at least one human and one machine document",
            data.len()
        )));
    }
    Ok(())
}

fn train_loop(
    base: &NGramLogRegModel,
    data: &[Document],
    tc: &TrainConfig,
    objective: Objective<'_>,
) -> Result<(NGramLogRegModel, TrainTrace)> {
    tc.validate()?;
    let mut model = base.clone();
    let mut trace = TrainTrace::default();
    if tc.epochs == 0 {
        return Ok((model, trace));
    }
    check_classes(data)?;
    let mut rng = ChaCha8Rng::seed_from_u64(tc.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    for epoch in 0..tc.epochs {
        let started = Instant::now();
        order.shuffle(&mut rng);
        let mut q_sum = 0.0;
        let mut filtered = 0usize;
        let mut groups = 0usize;
        for batch in order.chunks(tc.batch_size) {
            let docs: Vec<&Document> = batch.iter().map(|&i| &data[i]).collect();
            let (feats, stats) = batch_features(&model, &docs, &objective)?;
            let q = model.log_likelihood(&feats);
            if !q.is_finite() {
                return Err(Error::Numerical {
                    feature_index: 0,
                    context: format!("non-finite objective {q} in epoch {epoch}"),
                });
            }
            q_sum += q * feats.len() as f64;
            filtered += stats.filtered;
            groups += stats.groups;
            let grad = model.gradient(&feats)?;
            model.apply_gradient(&grad, tc.learning_rate);
        }
        let rec = EpochRecord {
            epoch,
            mean_q: q_sum / data.len() as f64,
            filtered_fraction: if groups == 0 {
                0.0
            } else {
                filtered as f64 / groups as f64
            },
            wall_time_secs: started.elapsed().as_secs_f64(),
        };
        log::debug!(
            "epoch {} mean_q={:.6} filtered={:.4}",
            rec.epoch,
            rec.mean_q,
            rec.filtered_fraction
        );
        trace.records.push(rec);
    }
    Ok((model, trace))
}

/// Hard-EM training on retained texts.
pub fn train_hard_em(
    base: &NGramLogRegModel,
    data: &[Document],
    tc: &TrainConfig,
) -> Result<(NGramLogRegModel, TrainTrace)> {
    train_loop(base, data, tc, Objective::Retained(&tc.filter))
}

/// Ordinary logistic-regression training on full texts, with the same
/// shuffling and batching as [`train_hard_em`].
pub fn train_plain(
    base: &NGramLogRegModel,
    data: &[Document],
    tc: &TrainConfig,
) -> Result<(NGramLogRegModel, TrainTrace)> {
    train_loop(base, data, tc, Objective::FullText)
}
