use std::io::Write;
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use stackdet_core::corpus::{read_corpus, write_corpus};
use stackdet_core::evaluation::{consistent_sentence_proportion, inject_human_sentences};
use stackdet_core::synth::{generate, SynthConfig};
use stackdet_core::{derive_seed, Document, Label};

use crate::args::{GlobalArgs, OverlapArgs, SynthArgs};
use crate::settings::{config_error, open_output, write_json, Settings};

#[derive(Serialize)]
struct OverlapReport {
    human: String,
    machine: String,
    n_human_docs: usize,
    n_machine_docs: usize,
    proportion: f64,
}

pub fn overlap(a: OverlapArgs, s: &Settings) -> anyhow::Result<()> {
    let human: Option<PathBuf> = s.get(a.human, "human")?;
    let machine: Option<PathBuf> = s.get(a.machine, "machine")?;
    let corpus: Option<PathBuf> = s.get(a.corpus, "corpus")?;
    let output: PathBuf = s.or(a.output, "output", PathBuf::from("-"))?;
    let (h_name, m_name, h_docs, m_docs) = match (human, machine, corpus) {
        (Some(h), Some(m), None) => {
            let (hd, md) = (read_corpus(&h)?, read_corpus(&m)?);
            (h.display().to_string(), m.display().to_string(), hd, md)
        }
        (None, None, Some(c)) => {
            let docs = read_corpus(&c)?;
            let (hd, md): (Vec<Document>, Vec<Document>) =
                docs.into_iter().partition(|d| d.label == Some(Label::Human));
            let md: Vec<Document> = md.into_iter().filter(|d| d.label == Some(Label::Machine)).collect();
            let name = c.display().to_string();
            (format!("{name}#human"), format!("{name}#machine"), hd, md)
        }
        _ => {
            return Err(config_error(
                "give --human and --machine, or a single labelled --corpus",
            ))
        }
    };
    let proportion = consistent_sentence_proportion(&h_docs, &m_docs)?;
    write_json(
        &output,
        &OverlapReport {
            human: h_name,
            machine: m_name,
            n_human_docs: h_docs.len(),
            n_machine_docs: m_docs.len(),
            proportion,
        },
    )
}

pub fn synth(g: &GlobalArgs, a: SynthArgs, s: &Settings) -> anyhow::Result<()> {
    let seed = s.seed(g)?;
    let output: PathBuf = s.require(a.output, "output")?;
    let d = SynthConfig::default();
    let cfg = SynthConfig {
        n_human: s.or(a.n_human, "n-human", d.n_human)?,
        n_machine: s.or(a.n_machine, "n-machine", d.n_machine)?,
        ..d
    };
    let inject = s.or(a.inject, "inject", 0)?;
    let corpus = generate(&cfg, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[inject as u64]));
    let machine = corpus
        .machine
        .iter()
        .map(|m| inject_human_sentences(m, &corpus.human_pool, inject, &mut rng))
        .collect::<stackdet_core::Result<Vec<_>>>()?;
    let docs: Vec<Document> = corpus.human.into_iter().chain(machine).collect();
    let mut out = open_output(&output)?;
    write_corpus(&mut out, &docs)?;
    out.flush()?;
    Ok(())
}
