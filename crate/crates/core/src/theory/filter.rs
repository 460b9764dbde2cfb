//! Oracle filtering for the simulator. Unlike the score-driven retention
//! rule, this removes sentences by their true origin, which only a
//! simulation knows.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floor_count;
use crate::theory::sample::{MixSpec, SampledText, TextClass};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FilterSpec {
    /// Proportion of all sentences removed from the human-like ones.
    pub alpha_s: f64,
    /// Proportion of all sentences removed by mistake from the machine ones.
    pub alpha_h: f64,
}

/// Outcome of the imperfect-filtering conditions for one setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterCondition {
    /// No filtering requested.
    None,
    Satisfied,
    Violated,
}

impl FilterCondition {
    pub fn as_str(self) -> &'static str {
        match self {
            FilterCondition::None => "none",
            FilterCondition::Satisfied => "satisfied",
            FilterCondition::Violated => "violated",
        }
    }

    fn from_bool(ok: bool) -> Self {
        if ok {
            FilterCondition::Satisfied
        } else {
            FilterCondition::Violated
        }
    }
}

impl FilterSpec {
    pub fn new(alpha_s: f64, alpha_h: f64) -> Self {
        FilterSpec { alpha_s, alpha_h }
    }

    pub fn is_identity(&self) -> bool {
        self.alpha_s == 0.0 && self.alpha_h == 0.0
    }

    pub fn validate(&self, alpha: f64) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidFilterSpec(m));
        if !(self.alpha_s >= 0.0 && (self.alpha_s < alpha || self.alpha_s == 0.0)) {
            return bad(format!("alpha_s = {} must be in [0, alpha = {alpha})", self.alpha_s));
        }
        if !(self.alpha_h >= 0.0 && (self.alpha_h < 1.0 - alpha || self.alpha_h == 0.0)) {
            return bad(format!("alpha_h = {} must be in [0, 1 - alpha)", self.alpha_h));
        }
        if self.alpha_s + self.alpha_h >= 1.0 {
            return bad("alpha_s + alpha_h must be below 1".into());
        }
        Ok(())
    }

    /// Human-like and machine sentences removed from a machine text of `n`.
    pub fn removals(&self, n: usize) -> (usize, usize) {
        (floor_count(self.alpha_s, n), floor_count(self.alpha_h, n))
    }

    /// First condition of the imperfect-filtering result:
    /// `1 - a - a_h > (1 - a) sqrt(1 - a_s - a_h)`.
    pub fn tv_gain_condition(&self, alpha: f64) -> bool {
        1.0 - alpha - self.alpha_h > (1.0 - alpha) * (1.0 - self.alpha_s - self.alpha_h).sqrt()
    }

    /// Small-proportion form of the first condition: `a_s > (1 + a) / (1 - a) * a_h`.
    pub fn approx_condition(&self, alpha: f64) -> bool {
        self.alpha_s > (1.0 + alpha) / (1.0 - alpha) * self.alpha_h
    }

    /// Upper bound on the dependency load `(1/n) sum (c_j - 1) rho_j` in the
    /// second condition.
    pub fn dependency_bound(&self, alpha: f64, delta: f64) -> f64 {
        let root = (1.0 - self.alpha_s - self.alpha_h).sqrt();
        delta * (1.0 - alpha - self.alpha_h - (1.0 - alpha) * root) / (2.0 * (1.0 - root))
    }

    /// Both conditions, for a given mix and world TV distance.
    pub fn condition(&self, mix: &MixSpec, delta: f64) -> FilterCondition {
        if self.is_identity() {
            return FilterCondition::None;
        }
        FilterCondition::from_bool(
            self.tv_gain_condition(mix.alpha) && mix.dependency_load() < self.dependency_bound(mix.alpha, delta),
        )
    }

    pub fn approx(&self, alpha: f64) -> FilterCondition {
        if self.is_identity() {
            return FilterCondition::None;
        }
        FilterCondition::from_bool(self.approx_condition(alpha))
    }
}

/// Deletes sentences by ground-truth origin. Machine texts lose
/// `floor(a_s n)` human-like and `floor(a_h n)` machine sentences; human
/// texts lose the same total, chosen uniformly, so filtered lengths never
/// reveal the class.
pub fn apply_theory_filter<R: Rng + ?Sized>(
    text: &SampledText,
    filter: &FilterSpec,
    rng: &mut R,
) -> Result<SampledText> {
    let n = text.text.len();
    let (rs, rh) = filter.removals(n);
    if rs + rh == 0 {
        return Ok(text.clone());
    }
    let mut keep = vec![true; n];
    match text.class {
        TextClass::MachineMixed => {
            let human_pos: Vec<usize> = (0..n).filter(|&i| text.human_like[i]).collect();
            let machine_pos: Vec<usize> = (0..n).filter(|&i| !text.human_like[i]).collect();
            if rs > human_pos.len() {
                return Err(Error::InvalidFilterSpec(format!(
                    "cannot remove {rs} human-like sentences, only {} present",
                    human_pos.len()
                )));
            }
            if rh > machine_pos.len() {
                return Err(Error::InvalidFilterSpec(format!(
                    "cannot remove {rh} machine sentences, only {} present",
                    machine_pos.len()
                )));
            }
            for i in sample(rng, human_pos.len(), rs) {
                keep[human_pos[i]] = false;
            }
            for i in sample(rng, machine_pos.len(), rh) {
                keep[machine_pos[i]] = false;
            }
        }
        TextClass::Human => {
            if rs + rh >= n {
                return Err(Error::InvalidFilterSpec(format!(
                    "cannot remove {} of {n} sentences",
                    rs + rh
                )));
            }
            for i in sample(rng, n, rs + rh) {
                keep[i] = false;
            }
        }
    }
    if !keep.iter().any(|&k| k) {
        return Err(Error::InvalidFilterSpec("filter removes every sentence".into()));
    }
    Ok(SampledText {
        class: text.class,
        text: text.text.retain_positions(&keep),
        human_like: text
            .human_like
            .iter()
            .zip(&keep)
            .filter(|(_, k)| **k)
            .map(|(h, _)| *h)
            .collect(),
    })
}
