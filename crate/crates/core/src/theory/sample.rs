use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ceil_count;
use crate::error::{Error, Result};
use crate::theory::world::SentenceWorld;

/// Shape of a synthetic text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixSpec {
    /// Sentences per text.
    pub n: usize,
    /// Proportion of hidden human-like sentences in machine texts.
    pub alpha: f64,
    /// Dependency strength between sentences of one sequence.
    pub rho: f64,
    /// Lengths of the independent sequences; sums to `n`.
    pub sequence_lengths: Vec<usize>,
    /// Optional per-sequence dependency strengths overriding `rho`.
    #[serde(default)]
    pub rho_per_sequence: Option<Vec<f64>>,
}

impl MixSpec {
    /// Independent sentences: a single sequence with `rho = 0`.
    pub fn iid(n: usize, alpha: f64) -> Self {
        MixSpec {
            n,
            alpha,
            rho: 0.0,
            sequence_lengths: vec![n],
            rho_per_sequence: None,
        }
    }

    /// `sequences` independent sequences of (nearly) equal length sharing `rho`.
    pub fn dependent(n: usize, alpha: f64, rho: f64, sequences: usize) -> Result<Self> {
        if sequences < 1 || sequences > n {
            return Err(Error::config(format!("need 1..={n} sequences, got {sequences}")));
        }
        let base = n / sequences;
        let lengths = (0..sequences).map(|j| base + usize::from(j < n % sequences)).collect();
        let spec = MixSpec {
            n,
            alpha,
            rho,
            sequence_lengths: lengths,
            rho_per_sequence: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::config("texts need at least one sentence"));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::config(format!("alpha must be in [0, 1), got {}", self.alpha)));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::config(format!("rho must be in [0, 1), got {}", self.rho)));
        }
        if self.sequence_lengths.iter().sum::<usize>() != self.n || self.sequence_lengths.contains(&0) {
            return Err(Error::config("sequence lengths must be positive and sum to n"));
        }
        if let Some(r) = &self.rho_per_sequence {
            if r.len() != self.sequence_lengths.len() || r.iter().any(|x| !(0.0..1.0).contains(x)) {
                return Err(Error::config(
                    "per-sequence rho must match the sequences and lie in [0, 1)",
                ));
            }
        }
        Ok(())
    }

    pub fn sequence_rho(&self, j: usize) -> f64 {
        self.rho_per_sequence.as_ref().map_or(self.rho, |r| r[j])
    }

    /// True when every sequence is independent across sentences.
    pub fn is_iid(&self) -> bool {
        (0..self.sequence_lengths.len()).all(|j| self.sequence_rho(j) == 0.0)
    }

    /// Number of machine-distributed sentences in a machine text.
    pub fn machine_count(&self) -> usize {
        ceil_count(1.0 - self.alpha, self.n).min(self.n)
    }

    /// Number of human-like sentences in a machine text.
    pub fn human_like_count(&self) -> usize {
        self.n - self.machine_count()
    }

    /// `(1/n) * sum_j (c_j - 1) rho_j`.
    pub fn dependency_load(&self) -> f64 {
        self.sequence_lengths
            .iter()
            .enumerate()
            .map(|(j, &c)| (c as f64 - 1.0) * self.sequence_rho(j))
            .sum::<f64>()
            / self.n as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextClass {
    Human,
    MachineMixed,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimText {
    Categorical(Vec<usize>),
    Gaussian(Vec<Vec<f64>>),
}

impl SimText {
    pub fn len(&self) -> usize {
        match self {
            SimText::Categorical(v) => v.len(),
            SimText::Gaussian(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(crate) fn retain_positions(&self, keep: &[bool]) -> SimText {
        fn pick<T: Clone>(v: &[T], keep: &[bool]) -> Vec<T> {
            v.iter()
                .zip(keep)
                .filter(|(_, k)| **k)
                .map(|(x, _)| x.clone())
                .collect()
        }
        match self {
            SimText::Categorical(v) => SimText::Categorical(pick(v, keep)),
            SimText::Gaussian(v) => SimText::Gaussian(pick(v, keep)),
        }
    }
}

/// A sampled text together with the ground truth of which positions were
/// drawn from the human distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledText {
    pub class: TextClass,
    pub text: SimText,
    pub human_like: Vec<bool>,
}

impl SampledText {
    pub fn n_human_like(&self) -> usize {
        self.human_like.iter().filter(|&&b| b).count()
    }
}

/// Prebuilt samplers for one world.
#[derive(Debug, Clone)]
pub struct WorldSampler {
    world: SentenceWorld,
    categorical: Option<(WeightedIndex<f64>, WeightedIndex<f64>)>,
}

impl WorldSampler {
    pub fn new(world: &SentenceWorld) -> Result<Self> {
        let categorical = match world {
            SentenceWorld::Categorical { human, machine } => {
                let bad = |e| Error::config(format!("invalid categorical distribution: {e}"));
                Some((
                    WeightedIndex::new(human).map_err(bad)?,
                    WeightedIndex::new(machine).map_err(bad)?,
                ))
            }
            SentenceWorld::Gaussian { .. } => None,
        };
        Ok(WorldSampler {
            world: world.clone(),
            categorical,
        })
    }

    pub fn world(&self) -> &SentenceWorld {
        &self.world
    }

    fn draw_symbol<R: Rng + ?Sized>(&self, human: bool, rng: &mut R) -> usize {
        let (h, m) = self.categorical.as_ref().expect("categorical world");
        if human {
            h.sample(rng)
        } else {
            m.sample(rng)
        }
    }

    fn draw_vector<R: Rng + ?Sized>(&self, human: bool, rng: &mut R) -> Vec<f64> {
        let SentenceWorld::Gaussian { mu_h, mu_m } = &self.world else {
            unreachable!("gaussian world")
        };
        let mu = if human { mu_h } else { mu_m };
        mu.iter().map(|m| m + rng.sample::<f64, _>(StandardNormal)).collect()
    }

    pub fn sample_text<R: Rng + ?Sized>(&self, mix: &MixSpec, class: TextClass, rng: &mut R) -> Result<SampledText> {
        mix.validate()?;
        let n = mix.n;
        let mut human_like = vec![true; n];
        if class == TextClass::MachineMixed {
            human_like = vec![false; n];
            for p in sample(rng, n, mix.human_like_count()) {
                human_like[p] = true;
            }
        }
        let text = match &self.world {
            SentenceWorld::Categorical { .. } => {
                if !mix.is_iid() {
                    return Err(Error::UnsupportedCombination(
                        "categorical worlds only support independent sentences (rho = 0)".into(),
                    ));
                }
                SimText::Categorical(human_like.iter().map(|&h| self.draw_symbol(h, rng)).collect())
            }
            SentenceWorld::Gaussian { .. } => {
                let mut out: Vec<Vec<f64>> = Vec::with_capacity(n);
                let mut offset = 0;
                for (j, &len) in mix.sequence_lengths.iter().enumerate() {
                    let rho = mix.sequence_rho(j);
                    let mut running: Option<Vec<f64>> = None;
                    for i in 0..len {
                        let fresh = self.draw_vector(human_like[offset + i], rng);
                        let value = match &running {
                            Some(sum) if rho > 0.0 => sum
                                .iter()
                                .zip(&fresh)
                                .map(|(s, f)| rho * s / i as f64 + (1.0 - rho) * f)
                                .collect(),
                            _ => fresh,
                        };
                        match &mut running {
                            Some(sum) => sum.iter_mut().zip(&value).for_each(|(s, v)| *s += v),
                            None => running = Some(value.clone()),
                        }
                        out.push(value);
                    }
                    offset += len;
                }
                SimText::Gaussian(out)
            }
        };
        Ok(SampledText {
            class,
            text,
            human_like,
        })
    }
}

/// Samples one text; see [`WorldSampler::sample_text`].
pub fn sample_text<R: Rng + ?Sized>(
    world: &SentenceWorld,
    mix: &MixSpec,
    class: TextClass,
    rng: &mut R,
) -> Result<SampledText> {
    WorldSampler::new(world)?.sample_text(mix, class, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn counts_follow_alpha() {
        let m = MixSpec::iid(10, 0.3);
        assert_eq!((m.machine_count(), m.human_like_count()), (7, 3));
        let m = MixSpec::iid(5, 0.6);
        assert_eq!((m.machine_count(), m.human_like_count()), (2, 3));
        assert_eq!(MixSpec::iid(7, 0.0).human_like_count(), 0);
    }

    #[test]
    fn pure_machine_text_at_zero_alpha() {
        let w = SentenceWorld::categorical(vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = sample_text(&w, &MixSpec::iid(20, 0.0), TextClass::MachineMixed, &mut rng).unwrap();
        assert_eq!(s.text, SimText::Categorical(vec![1; 20]));
        assert_eq!(s.n_human_like(), 0);
        let s = sample_text(&w, &MixSpec::iid(20, 0.25), TextClass::MachineMixed, &mut rng).unwrap();
        let SimText::Categorical(v) = &s.text else { panic!() };
        assert_eq!(v.iter().filter(|&&x| x == 0).count(), 5);
        assert!(v.iter().zip(&s.human_like).all(|(&x, &h)| (x == 0) == h));
    }

    #[test]
    fn categorical_rejects_dependence() {
        let w = SentenceWorld::categorical_with_tv(0.5).unwrap();
        let mix = MixSpec::dependent(10, 0.0, 0.3, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            sample_text(&w, &mix, TextClass::Human, &mut rng),
            Err(Error::UnsupportedCombination(_))
        ));
    }

    #[test]
    fn gaussian_sample_mean_near_machine_mean() {
        // 3 sigma / sqrt(n) per coordinate at n = 1000 is about 0.095; the
        // norm over d = 2 stays below 0.15 except with negligible probability
        let w = SentenceWorld::gaussian(vec![0.0, 0.0], vec![1.0, -2.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let s = sample_text(&w, &MixSpec::iid(1000, 0.0), TextClass::MachineMixed, &mut rng).unwrap();
        let SimText::Gaussian(v) = s.text else { panic!() };
        let mean: Vec<f64> = (0..2).map(|k| v.iter().map(|x| x[k]).sum::<f64>() / 1000.0).collect();
        let err = ((mean[0] - 1.0).powi(2) + (mean[1] + 2.0).powi(2)).sqrt();
        assert!(err <= 0.15, "{err}");
    }

    #[test]
    fn dependence_keeps_marginal_mean() {
        // the AR construction leaves E[T_i] unchanged; compare the mean of
        // each position to the IID sampler over 10^4 texts
        let w = SentenceWorld::gaussian(vec![0.0], vec![2.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sampler = WorldSampler::new(&w).unwrap();
        let dep = MixSpec::dependent(6, 0.0, 0.05, 1).unwrap();
        let iid = MixSpec::iid(6, 0.0);
        let trials = 10_000;
        let mean_at = |mix: &MixSpec, rng: &mut ChaCha8Rng| -> Vec<f64> {
            let mut acc = [0.0; 6];
            for _ in 0..trials {
                let SimText::Gaussian(v) = sampler.sample_text(mix, TextClass::MachineMixed, rng).unwrap().text else {
                    panic!()
                };
                for (a, x) in acc.iter_mut().zip(&v) {
                    *a += x[0];
                }
            }
            acc.iter().map(|a| a / trials as f64).collect()
        };
        let a = mean_at(&dep, &mut rng);
        let b = mean_at(&iid, &mut rng);
        for (x, y) in a.iter().zip(&b) {
            // 4 standard errors of a difference of two means, sd <= 1
            assert!((x - y).abs() < 4.0 * (2.0f64 / trials as f64).sqrt(), "{x} vs {y}");
        }
    }

    #[test]
    fn mix_validation() {
        assert!(MixSpec::iid(0, 0.1).validate().is_err());
        assert!(MixSpec::iid(5, 1.0).validate().is_err());
        assert!(MixSpec::dependent(5, 0.1, 1.0, 2).is_err());
        assert!(MixSpec::dependent(5, 0.1, 0.5, 6).is_err());
        let m = MixSpec::dependent(7, 0.1, 0.5, 2).unwrap();
        assert_eq!(m.sequence_lengths, vec![4, 3]);
        assert!((m.dependency_load() - 0.5 * 5.0 / 7.0).abs() < 1e-15);
    }
}
