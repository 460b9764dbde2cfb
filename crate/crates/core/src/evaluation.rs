//! Detection metrics, dataset splitting and corpus statistics.

use std::collections::{BTreeMap, HashSet};

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floor_count;
use crate::segmentation::{Document, Label};

/// False-positive-rate levels reported by default: 0.5% and 5%.
pub const DEFAULT_FPR_LEVELS: [f64; 2] = [0.005, 0.05];

fn class_counts(scores: &[f64], labels: &[Label]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::config(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if let Some(i) = scores.iter().position(|s| s.is_nan()) {
        return Err(Error::Numerical {
            feature_index: i,
            context: "NaN score".into(),
        });
    }
    let pos = labels.iter().filter(|&&l| l == Label::Machine).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::DegenerateDataset(format!(
            "metric needs both classes ({pos} machine, {neg} human)"
        )));
    }
    Ok((pos, neg))
}

/// Twice the Mann-Whitney U statistic of the positives (ties count one
/// half, so the doubled value is an integer).
fn doubled_u(scores: &[f64], labels: &[Label]) -> u128 {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut negs_below: u128 = 0;
    let mut u2: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        let (mut tie_pos, mut tie_neg) = (0u128, 0u128);
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            match labels[order[j]] {
                Label::Machine => tie_pos += 1,
                Label::Human => tie_neg += 1,
            }
            j += 1;
        }
        u2 += tie_pos * (2 * negs_below + tie_neg);
        negs_below += tie_neg;
        i = j;
    }
    u2
}

/// Area under the ROC curve, equal to `P(pos > neg) + P(tie) / 2`.
/// `Label::Machine` is the positive class.
pub fn auroc(scores: &[f64], labels: &[Label]) -> Result<f64> {
    let (pos, neg) = class_counts(scores, labels)?;
    let u2 = doubled_u(scores, labels);
    Ok(u2 as f64 / (2 * pos as u128 * neg as u128) as f64)
}

/// True-positive rate at the lowest threshold `t` such that predicting
/// "machine" for `score > t` keeps the false-positive rate at most `k`.
pub fn tpr_at_fpr(scores: &[f64], labels: &[Label], k: f64) -> Result<f64> {
    let (pos, neg) = class_counts(scores, labels)?;
    if !(0.0..1.0).contains(&k) {
        return Err(Error::config(format!("FPR level must be in [0, 1), got {k}")));
    }
    let allowed = floor_count(k, neg);
    let mut negs: Vec<f64> = scores
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l == Label::Human)
        .map(|(&s, _)| s)
        .collect();
    negs.sort_by(|a, b| b.total_cmp(a));
    let tp = match negs.get(allowed) {
        // at most `allowed` negatives lie strictly above this value
        Some(&t) => scores
            .iter()
            .zip(labels)
            .filter(|(&s, &l)| l == Label::Machine && s > t)
            .count(),
        None => pos,
    };
    Ok(tp as f64 / pos as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub auroc: f64,
    /// Keyed by the FPR level formatted as a decimal, e.g. `"0.005"`.
    pub tpr_at_fpr: BTreeMap<String, f64>,
    pub n_pos: usize,
    pub n_neg: usize,
    pub seed: u64,
    pub detector: String,
    pub corpus: String,
}

impl EvalReport {
    pub fn compute(
        scores: &[f64],
        labels: &[Label],
        levels: &[f64],
        seed: u64,
        detector: impl Into<String>,
        corpus: impl Into<String>,
    ) -> Result<Self> {
        let (n_pos, n_neg) = class_counts(scores, labels)?;
        let mut tpr = BTreeMap::new();
        for &k in levels {
            tpr.insert(format!("{k}"), tpr_at_fpr(scores, labels, k)?);
        }
        Ok(EvalReport {
            auroc: auroc(scores, labels)?,
            tpr_at_fpr: tpr,
            n_pos,
            n_neg,
            seed,
            detector: detector.into(),
            corpus: corpus.into(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub ratios: [f64; 3],
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            ratios: [2.0, 1.0, 1.0],
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Splits {
    pub train: Vec<Document>,
    pub val: Vec<Document>,
    pub test: Vec<Document>,
}

/// Stratified seeded split. Each label stratum (unlabeled documents form
/// their own) is shuffled and cut at the cumulative ratio boundaries.
pub fn split_dataset(corpus: &[Document], spec: &SplitSpec) -> Result<Splits> {
    if corpus.len() < 4 {
        return Err(Error::config(format!(
            "need at least 4 documents to split, got {}",
            corpus.len()
        )));
    }
    if spec.ratios.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::config("split ratios must be positive"));
    }
    let total: f64 = spec.ratios.iter().sum();
    let first = spec.ratios[0] / total;
    let second = (spec.ratios[0] + spec.ratios[1]) / total;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Splits {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
    };
    for stratum in [Some(Label::Human), Some(Label::Machine), None] {
        let mut idx: Vec<usize> = (0..corpus.len()).filter(|&i| corpus[i].label == stratum).collect();
        idx.shuffle(&mut rng);
        let n = idx.len();
        let (a, b) = (floor_count(first, n), floor_count(second, n));
        out.train.extend(idx[..a].iter().map(|&i| corpus[i].clone()));
        out.val.extend(idx[a..b].iter().map(|&i| corpus[i].clone()));
        out.test.extend(idx[b..].iter().map(|&i| corpus[i].clone()));
    }
    Ok(out)
}

/// Casefolds, collapses whitespace and strips trailing terminal punctuation.
pub fn normalize_sentence(s: &str) -> String {
    let lowered = s.to_lowercase();
    let collapsed = lowered.split_whitespace().collect::<Vec<_>>().join(" ");
    collapsed
        .trim_end_matches(|c: char| matches!(c, '.' | '!' | '?' | '…') || c.is_whitespace())
        .to_string()
}

/// Fraction of machine sentences whose normalized form also occurs among
/// the human sentences.
pub fn consistent_sentence_proportion(human: &[Document], machine: &[Document]) -> Result<f64> {
    if human.is_empty() || machine.is_empty() {
        return Err(Error::config("both corpora must be non-empty"));
    }
    let human_set: HashSet<String> = human
        .iter()
        .flat_map(|d| d.sentence_texts())
        .map(normalize_sentence)
        .collect();
    let (mut hits, mut total) = (0usize, 0usize);
    for s in machine.iter().flat_map(|d| d.sentence_texts()) {
        total += 1;
        if human_set.contains(&normalize_sentence(s)) {
            hits += 1;
        }
    }
    if total == 0 {
        return Err(Error::EmptyDocument);
    }
    Ok(hits as f64 / total as f64)
}

/// Replaces `count` uniformly chosen sentences of `doc` with sentences
/// drawn uniformly (with replacement) from `pool`. The result keeps the
/// original id and label; its text is the sentences joined by spaces.
pub fn inject_human_sentences<S: AsRef<str>, R: Rng + ?Sized>(
    doc: &Document,
    pool: &[S],
    count: usize,
    rng: &mut R,
) -> Result<Document> {
    if count == 0 {
        return Ok(doc.clone());
    }
    if count >= doc.n_sentences() {
        return Err(Error::config(format!(
            "cannot replace {count} of {} sentences",
            doc.n_sentences()
        )));
    }
    if pool.is_empty() {
        return Err(Error::config("human sentence pool is empty"));
    }
    let mut sentences: Vec<&str> = doc.sentence_texts().collect();
    let mut positions = sample(rng, sentences.len(), count).into_vec();
    positions.sort_unstable();
    for p in positions {
        sentences[p] = pool[rng.random_range(0..pool.len())].as_ref();
    }
    Document::from_sentences(doc.id.clone(), &sentences, doc.label)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(v: &[u8]) -> Vec<Label> {
        v.iter().map(|&x| Label::try_from(x).unwrap()).collect()
    }

    #[test]
    fn auroc_examples() {
        assert_eq!(auroc(&[0.1, 0.2, 0.8, 0.9], &labels(&[0, 0, 1, 1])).unwrap(), 1.0);
        assert_eq!(auroc(&[0.3; 6], &labels(&[0, 1, 0, 1, 1, 0])).unwrap(), 0.5);
        assert_eq!(auroc(&[0.1, 0.4, 0.35, 0.8], &labels(&[0, 0, 1, 1])).unwrap(), 0.75);
        assert!(matches!(
            auroc(&[0.1, 0.2], &labels(&[1, 1])),
            Err(Error::DegenerateDataset(_))
        ));
    }

    #[test]
    fn tpr_examples() {
        let l = labels(&[0, 0, 1, 1]);
        for k in [0.0, 0.005, 0.3] {
            assert_eq!(tpr_at_fpr(&[0.1, 0.2, 0.8, 0.9], &l, k).unwrap(), 1.0);
            assert_eq!(tpr_at_fpr(&[0.4; 4], &l, 0.0).unwrap(), 0.0);
        }
        // one of two negatives may pass at K = 0.5
        assert_eq!(tpr_at_fpr(&[0.1, 0.7, 0.5, 0.9], &l, 0.5).unwrap(), 1.0);
        assert_eq!(tpr_at_fpr(&[0.1, 0.7, 0.5, 0.9], &l, 0.49).unwrap(), 0.5);
    }

    #[test]
    fn split_counts_and_determinism() {
        let docs: Vec<Document> = (0..8)
            .map(|i| {
                let l = if i % 2 == 0 { Label::Human } else { Label::Machine };
                Document::new(format!("d{i}"), format!("Doc {i}."), Some(l)).unwrap()
            })
            .collect();
        let spec = SplitSpec::default();
        let s = split_dataset(&docs, &spec).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (4, 2, 2));
        for part in [&s.train, &s.val, &s.test] {
            let m = part.iter().filter(|d| d.label == Some(Label::Machine)).count();
            assert_eq!(m * 2, part.len());
        }
        assert_eq!(split_dataset(&docs, &spec).unwrap(), s);
        let mut ids: Vec<String> = [&s.train, &s.val, &s.test]
            .iter()
            .flat_map(|p| p.iter().map(|d| d.id.clone()))
            .collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 8);
        assert!(split_dataset(&docs[..3], &spec).is_err());
    }

    #[test]
    fn overlap_examples() {
        let h = [Document::new("h", "The sky is blue. I like tea.", None).unwrap()];
        let disjoint = [Document::new("m", "Cats purr. Dogs bark.", None).unwrap()];
        assert_eq!(consistent_sentence_proportion(&h, &disjoint).unwrap(), 0.0);
        let same = [Document::new("m", "the SKY is   blue! I like tea", None).unwrap()];
        assert_eq!(consistent_sentence_proportion(&h, &same).unwrap(), 1.0);
        let ten: Vec<String> = (0..8)
            .map(|i| format!("Unique {i}."))
            .chain(["I like tea.".into(), "The sky is blue.".into()])
            .collect();
        let m = [Document::from_sentences("m", &ten, None).unwrap()];
        assert_eq!(consistent_sentence_proportion(&h, &m).unwrap(), 0.2);
    }

    #[test]
    fn injection_replaces_exact_count() {
        let doc =
            Document::from_sentences("m", &["S0.", "S1.", "S2.", "S3.", "S4.", "S5."], Some(Label::Machine)).unwrap();
        let pool = ["H0.", "H1."];
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert_eq!(inject_human_sentences(&doc, &pool, 0, &mut rng).unwrap(), doc);
        let out = inject_human_sentences(&doc, &pool, 2, &mut rng).unwrap();
        let changed = out
            .sentence_texts()
            .zip(doc.sentence_texts())
            .filter(|(a, b)| a != b)
            .count();
        assert_eq!(changed, 2);
        assert_eq!(out.label, Some(Label::Machine));
        let again = inject_human_sentences(&doc, &pool, 2, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let again2 = inject_human_sentences(&doc, &pool, 2, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(again, again2);
        assert!(inject_human_sentences(&doc, &pool, 6, &mut rng).is_err());
    }
}
