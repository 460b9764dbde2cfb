use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::theory::sample::{MixSpec, SimText};
use crate::theory::world::SentenceWorld;

/// How the unknown human-like positions are marginalized in `M(S)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixtureScoring {
    /// Uniform average over every position set of the right size.
    #[default]
    Exact,
    /// Product of per-sentence mixtures `(1 - a) m(s) + a h(s)`.
    PerSentence,
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Per-sentence `(ln h(s), ln m(s))`. Gaussian densities drop the shared
/// normalizing constant.
pub fn sentence_log_densities(text: &SimText, world: &SentenceWorld) -> Result<Vec<(f64, f64)>> {
    match (text, world) {
        (SimText::Categorical(symbols), SentenceWorld::Categorical { human, machine }) => symbols
            .iter()
            .map(|&s| {
                if s >= human.len() {
                    return Err(Error::config(format!("symbol {s} outside the alphabet")));
                }
                Ok((human[s].ln(), machine[s].ln()))
            })
            .collect(),
        (SimText::Gaussian(vectors), SentenceWorld::Gaussian { mu_h, mu_m }) => vectors
            .iter()
            .map(|v| {
                if v.len() != mu_h.len() {
                    return Err(Error::config("sentence dimension does not match the world"));
                }
                let sq = |mu: &[f64]| v.iter().zip(mu).map(|(x, m)| (x - m) * (x - m)).sum::<f64>();
                Ok((-0.5 * sq(mu_h), -0.5 * sq(mu_m)))
            })
            .collect(),
        _ => Err(Error::UnsupportedCombination("text and world kinds differ".into())),
    }
}

/// `log M(S) - log H(S)` where `M` puts `human_like` sentences (positions
/// unknown) under `h` and the rest under `m`, and `H` puts all under `h`.
pub fn iid_log_ratio(text: &SimText, world: &SentenceWorld, human_like: usize, scoring: MixtureScoring) -> Result<f64> {
    let dens = sentence_log_densities(text, world)?;
    let n = dens.len();
    if n == 0 {
        return Err(Error::EmptyDocument);
    }
    if human_like > n {
        return Err(Error::config(format!(
            "{human_like} human-like sentences in a text of {n}"
        )));
    }
    let log_h: f64 = dens.iter().map(|d| d.0).sum();
    let log_m = match scoring {
        MixtureScoring::Exact => {
            // dp[j]: log of the sum over j-subsets (so far) of prod h * prod m
            let mut dp = vec![f64::NEG_INFINITY; human_like + 1];
            dp[0] = 0.0;
            for (i, &(lh, lm)) in dens.iter().enumerate() {
                for j in (0..=human_like.min(i + 1)).rev() {
                    let stay = dp[j] + lm;
                    let take = if j > 0 { dp[j - 1] + lh } else { f64::NEG_INFINITY };
                    dp[j] = log_add(stay, take);
                }
            }
            dp[human_like] - ln_binomial(n as u64, human_like as u64)
        }
        MixtureScoring::PerSentence => {
            let a = human_like as f64 / n as f64;
            let (la, lb) = (a.ln(), (1.0 - a).ln());
            dens.iter().map(|&(lh, lm)| log_add(lb + lm, la + lh)).sum()
        }
    };
    let score = log_m - log_h;
    if score.is_nan() {
        return Err(Error::Numerical {
            feature_index: 0,
            context: "likelihood ratio of a text impossible under both hypotheses".into(),
        });
    }
    Ok(score)
}

/// Optimal detector score for an IID mix: positive means machine-leaning,
/// and thresholding at 0 realizes the likelihood-ratio test.
pub fn likelihood_ratio_score(text: &SimText, world: &SentenceWorld, mix: &MixSpec) -> Result<f64> {
    likelihood_ratio_score_with(text, world, mix, MixtureScoring::Exact)
}

pub fn likelihood_ratio_score_with(
    text: &SimText,
    world: &SentenceWorld,
    mix: &MixSpec,
    scoring: MixtureScoring,
) -> Result<f64> {
    mix.validate()?;
    if !mix.is_iid() {
        return Err(Error::UnsupportedCombination(
            "exact likelihood ratio is only defined for independent sentences (rho = 0)".into(),
        ));
    }
    if text.len() != mix.n {
        return Err(Error::config(format!(
            "text has {} sentences, mix expects {}",
            text.len(),
            mix.n
        )));
    }
    iid_log_ratio(text, world, mix.human_like_count(), scoring)
}
