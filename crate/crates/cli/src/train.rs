use std::fs;
use std::path::PathBuf;

use stackdet_core::corpus::read_corpus;
use stackdet_core::detector::DEFAULT_HASH_BUCKETS;
use stackdet_core::evaluation::{split_dataset, DEFAULT_FPR_LEVELS};
use stackdet_core::{
    train_hard_em, train_plain, Detector, Document, EvalReport, FeatureMode, Label, NGramLmDetector, NGramLogRegModel,
    SplitSpec, StackMode, StackedDetector, TrainConfig,
};

use crate::args::{GlobalArgs, TrainArgs};
use crate::settings::{config_error, write_json, Settings};

pub const MODEL_LOGREG: &str = "model.bin";
pub const MODEL_LM: &str = "model.json";
pub const TRACE_FILE: &str = "trace.jsonl";
pub const REPORT_FILE: &str = "val_report.json";

pub fn split_spec(s: &Settings, cli: Option<Vec<f64>>, seed: u64) -> anyhow::Result<SplitSpec> {
    let ratios = s.or(cli, "split", SplitSpec::default().ratios.to_vec())?;
    let ratios: [f64; 3] = ratios
        .try_into()
        .map_err(|v: Vec<f64>| config_error(format!("--split needs three ratios, got {}", v.len())))?;
    if ratios.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(config_error("--split ratios must be positive"));
    }
    Ok(SplitSpec { ratios, seed })
}

pub fn report<D: Detector>(
    det: &StackedDetector<D>,
    docs: &[Document],
    seed: u64,
    corpus: &str,
) -> anyhow::Result<EvalReport> {
    let outcomes = det.infer_corpus(docs)?;
    let scores: Vec<f64> = outcomes.iter().map(|o| o.score.value()).collect();
    let labels = labels_of(docs)?;
    Ok(EvalReport::compute(
        &scores,
        &labels,
        &DEFAULT_FPR_LEVELS,
        seed,
        det.name(),
        corpus,
    )?)
}

pub fn labels_of(docs: &[Document]) -> anyhow::Result<Vec<Label>> {
    docs.iter()
        .map(|d| {
            d.label.ok_or_else(|| {
                stackdet_core::Error::DegenerateDataset(format!("document '{}' has no label", d.id)).into()
            })
        })
        .collect()
}

pub fn run(g: &GlobalArgs, a: TrainArgs, s: &Settings) -> anyhow::Result<()> {
    let corpus: PathBuf = s.require(a.corpus, "corpus")?;
    let out_dir: PathBuf = s.require(a.output, "output")?;
    let seed = s.seed(g)?;
    let filter = s.filter(g)?;
    let kind = s.or(a.detector, "detector", "logreg".to_string())?;
    let mode: FeatureMode = s
        .or(a.feature_mode, "feature-mode", "word".to_string())?
        .parse()
        .map_err(|e: String| config_error(e))?;
    let plain = s.flag(a.plain, "plain")?;
    let spec = split_spec(s, a.split, seed)?;
    let (order_default, valid) = match kind.as_str() {
        "logreg" => (2, true),
        "lm" => (1, true),
        _ => (0, false),
    };
    if !valid {
        return Err(config_error(format!("--detector must be logreg or lm, got `{kind}`")));
    }
    let order = s.or(a.order, "order", order_default)?;

    let docs = read_corpus(&corpus)?;
    let splits = split_dataset(&docs, &spec)?;
    log::info!(
        "split {} documents into {}/{}/{}",
        docs.len(),
        splits.train.len(),
        splits.val.len(),
        splits.test.len()
    );
    let corpus_id = corpus.display().to_string();
    fs::create_dir_all(&out_dir)?;

    let val_report = match kind.as_str() {
        "logreg" => {
            let buckets = s.or(a.buckets, "buckets", DEFAULT_HASH_BUCKETS)?;
            let d = TrainConfig::default();
            let tc = TrainConfig {
                epochs: s.or(a.epochs, "epochs", d.epochs)?,
                learning_rate: s.or(a.lr, "lr", d.learning_rate)?,
                batch_size: s.or(a.batch_size, "batch-size", d.batch_size)?,
                filter,
                seed,
            };
            let init = NGramLogRegModel::new(order, mode, buckets)?;
            let (model, trace) = if plain {
                train_plain(&init, &splits.train, &tc)?
            } else {
                train_hard_em(&init, &splits.train, &tc)?
            };
            model.save(&out_dir.join(MODEL_LOGREG))?;
            let mut f = std::io::BufWriter::new(fs::File::create(out_dir.join(TRACE_FILE))?);
            trace.write_jsonl(&mut f)?;
            let det = StackedDetector::new(model, filter, StackMode::Trained)?;
            report(&det, &splits.val, seed, &corpus_id)?
        }
        _ => {
            let lambda = s.or(a.lambda, "lambda", 0.1)?;
            let side = |l: Label| {
                splits
                    .train
                    .iter()
                    .filter(move |d| d.label == Some(l))
                    .map(|d| d.text.as_str())
            };
            let lm = NGramLmDetector::fit(side(Label::Human), side(Label::Machine), order, mode, lambda)?;
            lm.save(&out_dir.join(MODEL_LM))?;
            let det = StackedDetector::new(lm, filter, StackMode::TrainingFree)?;
            report(&det, &splits.val, seed, &corpus_id)?
        }
    };
    log::info!("validation AUROC {:.4}", val_report.auroc);
    write_json(&out_dir.join(REPORT_FILE), &val_report)
}
