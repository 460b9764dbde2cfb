use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::derive_seed;
use crate::error::{Error, Result};
use crate::evaluation::auroc;
use crate::segmentation::Label;
use crate::theory::filter::{apply_theory_filter, FilterCondition, FilterSpec};
use crate::theory::lr::{iid_log_ratio, MixtureScoring};
use crate::theory::sample::{MixSpec, TextClass, WorldSampler};
use crate::theory::world::{tv_distance, SentenceWorld};

pub const DEFAULT_BOOTSTRAP_RESAMPLES: usize = 1000;
pub const MIN_TRIALS: usize = 100;

// stream tags keep trial and bootstrap randomness apart
const TRIAL_STREAM: u64 = 0;
const BOOTSTRAP_STREAM: u64 = 1;

/// One simulation setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub world: SentenceWorld,
    pub mix: MixSpec,
    #[serde(default)]
    pub filter: Option<FilterSpec>,
    /// Texts sampled per class.
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub scoring: MixtureScoring,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < MIN_TRIALS {
            return Err(Error::config(format!(
                "at least {MIN_TRIALS} trials per class are required, got {}",
                self.trials
            )));
        }
        self.mix.validate()?;
        if let Some(f) = &self.filter {
            f.validate(self.mix.alpha)?;
        }
        if !self.mix.is_iid() && self.world.is_categorical() {
            return Err(Error::UnsupportedCombination(
                "categorical worlds only support independent sentences (rho = 0)".into(),
            ));
        }
        Ok(())
    }

    /// Human-like sentences a machine text keeps after filtering; the
    /// detector knows this count but not the positions.
    fn scored_human_like(&self) -> usize {
        let removed = self.filter.map_or(0, |f| f.removals(self.mix.n).0);
        self.mix.human_like_count() - removed
    }
}

/// AUROC with a percentile bootstrap interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AurocEstimate {
    pub auroc: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl AurocEstimate {
    /// True when this interval lies strictly above `other`'s.
    pub fn separated_above(&self, other: &AurocEstimate) -> bool {
        self.ci_low > other.ci_high
    }

    pub fn overlaps(&self, other: &AurocEstimate) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }
}

/// Scores of `trials` human and `trials` machine texts for one run.
pub fn simulate_scores(cfg: &SimConfig, run: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    cfg.validate()?;
    let sampler = WorldSampler::new(&cfg.world)?;
    let human_like = cfg.scored_human_like();
    let score_class = |class: TextClass, tag: u64| -> Result<Vec<f64>> {
        (0..cfg.trials as u64)
            .into_par_iter()
            .map(|trial| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[TRIAL_STREAM, run, tag, trial]));
                let mut text = sampler.sample_text(&cfg.mix, class, &mut rng)?;
                if let Some(f) = &cfg.filter {
                    text = apply_theory_filter(&text, f, &mut rng)?;
                }
                iid_log_ratio(&text.text, &cfg.world, human_like, cfg.scoring)
            })
            .collect()
    };
    let human = score_class(TextClass::Human, 0)?;
    let machine = score_class(TextClass::MachineMixed, 1)?;
    Ok((human, machine))
}

fn two_sample_auroc(human: &[f64], machine: &[f64]) -> Result<f64> {
    let scores: Vec<f64> = machine.iter().chain(human).copied().collect();
    let labels: Vec<Label> = std::iter::repeat_n(Label::Machine, machine.len())
        .chain(std::iter::repeat_n(Label::Human, human.len()))
        .collect();
    auroc(&scores, &labels)
}

/// Point AUROC plus a stratified percentile bootstrap 95% interval.
pub fn bootstrap_auroc(human: &[f64], machine: &[f64], resamples: usize, seed: u64) -> Result<AurocEstimate> {
    let point = two_sample_auroc(human, machine)?;
    if resamples == 0 {
        return Ok(AurocEstimate {
            auroc: point,
            ci_low: point,
            ci_high: point,
        });
    }
    let mut stats: Vec<f64> = (0..resamples as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[BOOTSTRAP_STREAM, b]));
            let h: Vec<f64> = (0..human.len())
                .map(|_| human[rng.random_range(0..human.len())])
                .collect();
            let m: Vec<f64> = (0..machine.len())
                .map(|_| machine[rng.random_range(0..machine.len())])
                .collect();
            two_sample_auroc(&h, &m)
        })
        .collect::<Result<_>>()?;
    stats.sort_by(f64::total_cmp);
    let pick = |q: f64| stats[((q * resamples as f64).floor() as usize).min(resamples - 1)];
    Ok(AurocEstimate {
        auroc: point,
        ci_low: pick(0.025),
        ci_high: pick(0.975),
    })
}

/// Family of worlds swept over `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WorldKind {
    Categorical,
    Gaussian { dim: usize },
}

impl WorldKind {
    pub fn world(&self, delta: f64) -> Result<SentenceWorld> {
        match self {
            WorldKind::Categorical => SentenceWorld::categorical_with_tv(delta),
            WorldKind::Gaussian { dim } => SentenceWorld::gaussian_with_tv(delta, *dim),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            WorldKind::Categorical => "categorical",
            WorldKind::Gaussian { .. } => "gaussian",
        }
    }
}

/// Cartesian parameter grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub world: WorldKind,
    pub delta: Vec<f64>,
    pub n: Vec<usize>,
    pub alpha: Vec<f64>,
    pub alpha_s: Vec<f64>,
    pub alpha_h: Vec<f64>,
    pub rho: Vec<f64>,
    /// Independent sequences per text when `rho > 0`.
    pub sequences: usize,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            world: WorldKind::Categorical,
            delta: vec![0.5],
            n: vec![20],
            alpha: vec![0.0],
            alpha_s: vec![0.0],
            alpha_h: vec![0.0],
            rho: vec![0.0],
            sequences: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOptions {
    pub trials: usize,
    pub seed: u64,
    pub scoring: MixtureScoring,
    pub bootstrap_resamples: usize,
    /// Independent repetitions; more than one adds mean and std columns.
    pub runs: usize,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            trials: 2000,
            seed: 0,
            scoring: MixtureScoring::Exact,
            bootstrap_resamples: DEFAULT_BOOTSTRAP_RESAMPLES,
            runs: 1,
        }
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub world: String,
    pub delta: f64,
    pub tv: f64,
    pub n: usize,
    pub alpha: f64,
    pub alpha_s: f64,
    pub alpha_h: f64,
    pub rho: f64,
    pub trials: usize,
    pub auroc: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub runs_mean: Option<f64>,
    pub runs_std: Option<f64>,
    /// Scores use the independent-sentence likelihood on dependent texts.
    pub model_mismatch: bool,
    pub filter_condition: FilterCondition,
    pub approx_condition: FilterCondition,
}

impl SweepRow {
    pub fn estimate(&self) -> AurocEstimate {
        AurocEstimate {
            auroc: self.auroc,
            ci_low: self.ci_low,
            ci_high: self.ci_high,
        }
    }
}

/// Runs one setting, including repetitions.
pub fn run_point(cfg: &SimConfig, opts: &ExperimentOptions) -> Result<(AurocEstimate, Option<(f64, f64)>)> {
    if opts.runs < 1 {
        return Err(Error::config("runs must be at least 1"));
    }
    let (h, m) = simulate_scores(cfg, 0)?;
    let est = bootstrap_auroc(
        &h,
        &m,
        opts.bootstrap_resamples,
        derive_seed(cfg.seed, &[BOOTSTRAP_STREAM]),
    )?;
    if opts.runs == 1 {
        return Ok((est, None));
    }
    let mut values = vec![est.auroc];
    for run in 1..opts.runs as u64 {
        let (h, m) = simulate_scores(cfg, run)?;
        values.push(two_sample_auroc(&h, &m)?);
    }
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    Ok((est, Some((mean, var.sqrt()))))
}

/// Evaluates every grid point in a fixed order. All points share the
/// per-trial seed streams, so neighbouring settings are compared on common
/// random numbers.
pub fn run_experiment(grid: &SweepGrid, opts: &ExperimentOptions) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &delta in &grid.delta {
        let world = grid.world.world(delta)?;
        let tv = tv_distance(&world);
        for &n in &grid.n {
            for &alpha in &grid.alpha {
                for &rho in &grid.rho {
                    let mix = if rho == 0.0 {
                        MixSpec::iid(n, alpha)
                    } else {
                        MixSpec::dependent(n, alpha, rho, grid.sequences)?
                    };
                    for &alpha_s in &grid.alpha_s {
                        for &alpha_h in &grid.alpha_h {
                            let f = FilterSpec::new(alpha_s, alpha_h);
                            let cfg = SimConfig {
                                world: world.clone(),
                                mix: mix.clone(),
                                filter: (!f.is_identity()).then_some(f),
                                trials: opts.trials,
                                seed: opts.seed,
                                scoring: opts.scoring,
                            };
                            let (est, runs) = run_point(&cfg, opts)?;
                            log::info!("delta={delta} n={n} alpha={alpha} alpha_s={alpha_s} alpha_h={alpha_h} rho={rho} auroc={:.4}", est.auroc);
                            rows.push(SweepRow {
                                world: grid.world.name().to_string(),
                                delta,
                                tv,
                                n,
                                alpha,
                                alpha_s,
                                alpha_h,
                                rho,
                                trials: opts.trials,
                                auroc: est.auroc,
                                ci_low: est.ci_low,
                                ci_high: est.ci_high,
                                runs_mean: runs.map(|r| r.0),
                                runs_std: runs.map(|r| r.1),
                                model_mismatch: !mix.is_iid(),
                                filter_condition: f.condition(&mix, tv),
                                approx_condition: f.approx(alpha),
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(rows)
}

/// Writes rows as CSV with a header line.
pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::config(format!("csv serialization failed: {other:?}")),
    }
}
