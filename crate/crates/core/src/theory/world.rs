use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Human and machine sentence distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SentenceWorld {
    /// Two distributions over a finite sentence alphabet.
    Categorical { human: Vec<f64>, machine: Vec<f64> },
    /// `N(mu_h, I)` vs `N(mu_m, I)` in `R^d`.
    Gaussian { mu_h: Vec<f64>, mu_m: Vec<f64> },
}

/// Fixed components of the categorical family built by
/// [`SentenceWorld::categorical_with_tv`]: a shared uniform background and
/// two disjoint, unevenly weighted signal components.
const BACKGROUND: [f64; 8] = [0.125; 8];
const HUMAN_SIGNAL: [f64; 8] = [0.4, 0.3, 0.2, 0.1, 0.0, 0.0, 0.0, 0.0];
const MACHINE_SIGNAL: [f64; 8] = [0.0, 0.0, 0.0, 0.0, 0.1, 0.2, 0.3, 0.4];

fn std_normal() -> Normal {
    Normal::standard()
}

impl SentenceWorld {
    pub fn categorical(human: Vec<f64>, machine: Vec<f64>) -> Result<Self> {
        if human.is_empty() || human.len() != machine.len() {
            return Err(Error::config(
                "categorical distributions must be non-empty and equally sized",
            ));
        }
        for (name, p) in [("human", &human), ("machine", &machine)] {
            if p.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::config(format!(
                    "{name} distribution has a negative or non-finite entry"
                )));
            }
            let total: f64 = p.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::config(format!("{name} distribution sums to {total}, not 1")));
            }
        }
        Ok(SentenceWorld::Categorical { human, machine })
    }

    pub fn gaussian(mu_h: Vec<f64>, mu_m: Vec<f64>) -> Result<Self> {
        if mu_h.is_empty() || mu_h.len() != mu_m.len() {
            return Err(Error::config("gaussian means must have the same dimension d >= 1"));
        }
        if mu_h.iter().chain(&mu_m).any(|x| !x.is_finite()) {
            return Err(Error::config("gaussian means must be finite"));
        }
        Ok(SentenceWorld::Gaussian { mu_h, mu_m })
    }

    /// Eight-symbol world `h = (1-d) q + d a`, `m = (1-d) q + d b` with
    /// disjoint `a`, `b`, so `TV(h, m) = d` exactly.
    pub fn categorical_with_tv(delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::config(format!("TV distance must be in [0, 1], got {delta}")));
        }
        let mix = |sig: &[f64; 8]| -> Vec<f64> {
            BACKGROUND
                .iter()
                .zip(sig)
                .map(|(q, s)| (1.0 - delta) * q + delta * s)
                .collect()
        };
        SentenceWorld::categorical(mix(&HUMAN_SIGNAL), mix(&MACHINE_SIGNAL))
    }

    /// Gaussian world in `R^dim` whose means are `2 * Phi^-1((1 + d) / 2)`
    /// apart along the first axis, so `TV = d`.
    pub fn gaussian_with_tv(delta: f64, dim: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::config(format!(
                "gaussian TV distance must be in [0, 1), got {delta}"
            )));
        }
        if dim < 1 {
            return Err(Error::config("dimension must be at least 1"));
        }
        let gap = 2.0 * std_normal().inverse_cdf((1.0 + delta) / 2.0);
        let mut mu_m = vec![0.0; dim];
        mu_m[0] = gap;
        SentenceWorld::gaussian(vec![0.0; dim], mu_m)
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self, SentenceWorld::Categorical { .. })
    }
}

/// Total variation distance between the two sentence distributions.
pub fn tv_distance(world: &SentenceWorld) -> f64 {
    match world {
        SentenceWorld::Categorical { human, machine } => {
            0.5 * human.iter().zip(machine).map(|(h, m)| (h - m).abs()).sum::<f64>()
        }
        SentenceWorld::Gaussian { mu_h, mu_m } => {
            let dist = mu_h
                .iter()
                .zip(mu_m)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            2.0 * std_normal().cdf(dist / 2.0) - 1.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tv_examples() {
        let same = SentenceWorld::categorical(vec![0.2, 0.8], vec![0.2, 0.8]).unwrap();
        assert_eq!(tv_distance(&same), 0.0);
        let disjoint = SentenceWorld::categorical(vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
        assert_eq!(tv_distance(&disjoint), 1.0);
        let half = SentenceWorld::categorical(vec![0.5, 0.5, 0.0], vec![0.0, 0.5, 0.5]).unwrap();
        assert_eq!(tv_distance(&half), 0.5);
    }

    #[test]
    fn family_hits_requested_tv() {
        for d in [0.0, 0.1, 0.5, 0.9, 1.0] {
            let w = SentenceWorld::categorical_with_tv(d).unwrap();
            assert!((tv_distance(&w) - d).abs() < 1e-12, "{d}");
        }
        for d in [0.0, 0.3, 0.5, 0.8] {
            let w = SentenceWorld::gaussian_with_tv(d, 3).unwrap();
            assert!((tv_distance(&w) - d).abs() < 1e-9, "{d}");
        }
    }

    #[test]
    fn validation() {
        assert!(SentenceWorld::categorical(vec![0.5, 0.6], vec![0.5, 0.5]).is_err());
        assert!(SentenceWorld::categorical(vec![-0.1, 1.1], vec![0.5, 0.5]).is_err());
        assert!(SentenceWorld::categorical(vec![1.0], vec![0.5, 0.5]).is_err());
        assert!(SentenceWorld::gaussian(vec![], vec![]).is_err());
        assert!(SentenceWorld::categorical_with_tv(1.5).is_err());
    }
}
