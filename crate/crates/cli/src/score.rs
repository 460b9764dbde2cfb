use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use stackdet_core::corpus::{parse_corpus, read_corpus};
use stackdet_core::evaluation::split_dataset;
use stackdet_core::segmentation::group_subsequences;
use stackdet_core::{Detector, DetectorModel, ExternalDetector, FilterConfig, Segmenter, StackMode, StackedDetector};

use crate::args::{BenchArgs, DetectArgs, DetectorArgs, EvalArgs, GlobalArgs};
use crate::settings::{config_error, open_output, write_json, Settings};
use crate::train::{report, split_spec};

pub fn load_detector(a: DetectorArgs, s: &Settings) -> anyhow::Result<DetectorModel> {
    let model: Option<PathBuf> = s.get(a.model, "model")?;
    let external: Option<String> = s.get(a.external, "external")?;
    let args: Vec<String> = if a.external_args.is_empty() {
        s.or(None, "external-arg", Vec::new())?
    } else {
        a.external_args
    };
    match (model, external) {
        (Some(_), Some(_)) => Err(config_error("give either --model or --external, not both")),
        (None, None) => Err(config_error("missing required --model or --external")),
        (Some(path), None) => Ok(DetectorModel::load(&path)?),
        (None, Some(cmd)) => Ok(DetectorModel::External(ExternalDetector::new(cmd, args))),
    }
}

fn stack_mode(model: &DetectorModel, training_free: bool) -> StackMode {
    match model {
        DetectorModel::LogReg(_) if !training_free => StackMode::Trained,
        _ => StackMode::TrainingFree,
    }
}

#[derive(Serialize)]
struct DetectLine<'a> {
    id: &'a str,
    score: f64,
    n_groups: usize,
    n_filtered: usize,
}

pub fn detect(g: &GlobalArgs, a: DetectArgs, s: &Settings) -> anyhow::Result<()> {
    let filter = s.filter(g)?;
    let training_free = s.flag(a.training_free, "training-free")?;
    let input: PathBuf = s.or(a.input, "input", PathBuf::from("-"))?;
    let output: PathBuf = s.or(a.output, "output", PathBuf::from("-"))?;
    let model = load_detector(a.detector, s)?;
    if matches!(model, DetectorModel::External(_)) && !training_free {
        log::info!("external detectors run in training-free mode");
    }
    let mode = stack_mode(&model, training_free);
    let det = StackedDetector::new(model, filter, mode)?;
    let reader: Box<dyn BufRead> = if input == Path::new("-") {
        Box::new(BufReader::new(std::io::stdin().lock()))
    } else {
        Box::new(BufReader::new(std::fs::File::open(&input)?))
    };
    let docs = parse_corpus(reader, &input, Segmenter::default_ref())?;
    let outcomes = det.infer_corpus(&docs)?;
    let mut out = open_output(&output)?;
    for (d, o) in docs.iter().zip(&outcomes) {
        let line = DetectLine {
            id: &d.id,
            score: o.score.value(),
            n_groups: o.n_groups,
            n_filtered: o.n_filtered,
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn eval(g: &GlobalArgs, a: EvalArgs, s: &Settings) -> anyhow::Result<()> {
    let seed = s.seed(g)?;
    let corpus: PathBuf = s.require(a.corpus, "corpus")?;
    let which = s.or(a.eval_split, "eval-split", "all".to_string())?;
    let output: PathBuf = s.or(a.output, "output", PathBuf::from("-"))?;
    let base_only = s.flag(a.base, "base")?;
    // a base-only evaluation is stacked inference with no budget
    let filter = if base_only {
        FilterConfig {
            tau: 0.0,
            ..s.filter(g)?
        }
    } else {
        s.filter(g)?
    };
    let spec = split_spec(s, a.split, seed)?;
    let model = load_detector(a.detector, s)?;
    let docs = read_corpus(&corpus)?;
    let docs = match which.as_str() {
        "all" => docs,
        "train" | "val" | "test" => {
            let sp = split_dataset(&docs, &spec)?;
            match which.as_str() {
                "train" => sp.train,
                "val" => sp.val,
                _ => sp.test,
            }
        }
        other => {
            return Err(config_error(format!(
                "--eval-split must be all, train, val or test, got `{other}`"
            )))
        }
    };
    let mode = stack_mode(&model, false);
    let det = StackedDetector::new(model, filter, mode)?;
    let rep = report(&det, &docs, seed, &format!("{}#{which}", corpus.display()))?;
    write_json(&output, &rep)
}

#[derive(Debug, Serialize)]
pub struct BenchReport {
    pub detector: String,
    pub n_docs: usize,
    pub repeats: usize,
    pub tau: f64,
    pub base_secs: f64,
    pub stacked_secs: f64,
    pub ratio: f64,
    pub base_calls: usize,
    pub stacked_calls: usize,
    pub n_groups: usize,
    pub n_filtered: usize,
}

/// Times base scoring of the full texts against stacked inference on the
/// same, already segmented, documents. Each document is timed on the
/// calling thread, base and stacked back to back, `repeats` times; the
/// reported totals sum every document's fastest repeat, which discards
/// interruptions that hit single samples.
pub fn bench_corpus<D: Detector>(
    det: &StackedDetector<D>,
    docs: &[stackdet_core::Document],
    repeats: usize,
) -> anyhow::Result<BenchReport> {
    if repeats < 1 {
        return Err(config_error("--repeats must be at least 1"));
    }
    // warm caches and lazily initialised state before timing
    det.base.score(&docs[0].text)?;
    let mut base = vec![f64::INFINITY; docs.len()];
    let mut stacked = vec![f64::INFINITY; docs.len()];
    let mut outcomes = Vec::with_capacity(docs.len());
    for r in 0..repeats {
        for (i, d) in docs.iter().enumerate() {
            let t = Instant::now();
            std::hint::black_box(det.base.score(&d.text)?);
            base[i] = base[i].min(t.elapsed().as_secs_f64());
            let t = Instant::now();
            let o = std::hint::black_box(det.infer_detailed(d)?);
            stacked[i] = stacked[i].min(t.elapsed().as_secs_f64());
            if r == 0 {
                outcomes.push(o);
            }
        }
    }
    let base_secs: f64 = base.iter().sum();
    let stacked_secs: f64 = stacked.iter().sum();
    let n_groups = docs
        .iter()
        .map(|d| group_subsequences(d, det.cfg.k).map(|g| g.len()))
        .sum::<stackdet_core::Result<usize>>()?;
    Ok(BenchReport {
        detector: det.base.name(),
        n_docs: docs.len(),
        repeats,
        tau: det.cfg.tau,
        base_secs,
        stacked_secs,
        ratio: stacked_secs / base_secs,
        base_calls: docs.len(),
        stacked_calls: outcomes.iter().map(|o| o.base_calls).sum(),
        n_groups,
        n_filtered: outcomes.iter().map(|o| o.n_filtered).sum(),
    })
}

pub fn bench(g: &GlobalArgs, a: BenchArgs, s: &Settings) -> anyhow::Result<()> {
    let filter = s.filter(g)?;
    let corpus: PathBuf = s.require(a.corpus, "corpus")?;
    let repeats = s.or(a.repeats, "repeats", 5)?;
    let output: PathBuf = s.or(a.output, "output", PathBuf::from("-"))?;
    let model = load_detector(a.detector, s)?;
    let docs = read_corpus(&corpus)?;
    if docs.is_empty() {
        return Err(stackdet_core::Error::EmptyDocument.into());
    }
    let mode = stack_mode(&model, true);
    let det = StackedDetector::new(model, filter, mode)?;
    let rep = bench_corpus(&det, &docs, repeats)?;
    log::info!("stacked/base wall-time ratio {:.3}", rep.ratio);
    write_json(&output, &rep)
}
