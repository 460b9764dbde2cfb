use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;
use stackdet_core::theory::{
    run_experiment, write_csv, ExperimentOptions, MixtureScoring, SweepGrid, SweepRow, WorldKind,
};

use crate::args::{GlobalArgs, SimulateArgs};
use crate::settings::{config_error, open_output, write_json, Settings};

#[derive(Serialize)]
struct Summary<'a> {
    grid: &'a SweepGrid,
    options: &'a ExperimentOptions,
    rows: &'a [SweepRow],
}

pub fn run(g: &GlobalArgs, a: SimulateArgs, s: &Settings) -> anyhow::Result<()> {
    let d = SweepGrid::default();
    let world = match s.or(a.world, "world", "categorical".to_string())?.as_str() {
        "categorical" => WorldKind::Categorical,
        "gaussian" => WorldKind::Gaussian {
            dim: s.or(a.dim, "dim", 2)?,
        },
        other => {
            return Err(config_error(format!(
                "--world must be categorical or gaussian, got `{other}`"
            )))
        }
    };
    let grid = SweepGrid {
        world,
        delta: s.or(a.delta, "delta", d.delta)?,
        n: s.or(a.n, "n", d.n)?,
        alpha: s.or(a.alpha, "alpha", d.alpha)?,
        alpha_s: s.or(a.alpha_s, "alpha-s", d.alpha_s)?,
        alpha_h: s.or(a.alpha_h, "alpha-h", d.alpha_h)?,
        rho: s.or(a.rho, "rho", d.rho)?,
        sequences: s.or(a.sequences, "sequences", d.sequences)?,
    };
    let lists = [&grid.delta, &grid.alpha, &grid.alpha_s, &grid.alpha_h, &grid.rho];
    if lists.iter().any(|l| l.is_empty()) || grid.n.is_empty() {
        return Err(config_error("every grid axis needs at least one value"));
    }
    let od = ExperimentOptions::default();
    let scoring = match s.or(a.scoring, "scoring", "exact".to_string())?.as_str() {
        "exact" => MixtureScoring::Exact,
        "per-sentence" => MixtureScoring::PerSentence,
        other => {
            return Err(config_error(format!(
                "--scoring must be exact or per-sentence, got `{other}`"
            )))
        }
    };
    let opts = ExperimentOptions {
        trials: s.or(a.trials, "trials", od.trials)?,
        seed: s.seed(g)?,
        scoring,
        bootstrap_resamples: s.or(a.bootstrap, "bootstrap", od.bootstrap_resamples)?,
        runs: s.or(a.runs, "runs", od.runs)?,
    };
    let output: PathBuf = s.or(a.output, "output", PathBuf::from("-"))?;
    let summary: Option<PathBuf> = s.get(a.summary, "summary")?;

    let rows = run_experiment(&grid, &opts)?;
    let mut out = open_output(&output)?;
    write_csv(&rows, &mut out)?;
    out.flush()?;
    if let Some(path) = summary {
        write_json(
            &path,
            &Summary {
                grid: &grid,
                options: &opts,
                rows: &rows,
            },
        )?;
    }
    Ok(())
}
