use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stackdet_core::detector::SparseFeatures;
use stackdet_core::stacked::{e_step, first_pass};
use stackdet_core::synth::{generate, SynthConfig};
use stackdet_core::{
    train_hard_em, train_plain, Document, FeatureMode, FilterConfig, Label, NGramLogRegModel, TrainConfig,
};

fn random_model(rng: &mut ChaCha8Rng, buckets: usize) -> NGramLogRegModel {
    let w: Vec<f64> = (0..buckets).map(|_| rng.random_range(-2.0..2.0)).collect();
    NGramLogRegModel::with_parameters(2, FeatureMode::Word, w, rng.random_range(-1.0..1.0)).unwrap()
}

fn random_batch(rng: &mut ChaCha8Rng, buckets: usize) -> Vec<(SparseFeatures, Label)> {
    (0..rng.random_range(1..8))
        .map(|_| {
            let mut idx: Vec<u32> = (0..rng.random_range(1..6))
                .map(|_| rng.random_range(0..buckets as u32))
                .collect();
            idx.sort_unstable();
            idx.dedup();
            let values = idx.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
            let label = if rng.random_bool(0.5) {
                Label::Machine
            } else {
                Label::Human
            };
            (SparseFeatures { indices: idx, values }, label)
        })
        .collect()
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let buckets = 16;
    let h = 1e-6;
    for _ in 0..50 {
        let model = random_model(&mut rng, buckets);
        let batch = random_batch(&mut rng, buckets);
        let grad = model.gradient(&batch).unwrap();
        let coords = buckets + 1;
        for c in 0..coords {
            let perturb = |delta: f64| {
                let mut w = model.weights().to_vec();
                let mut b = model.bias();
                if c < buckets {
                    w[c] += delta;
                } else {
                    b += delta;
                }
                NGramLogRegModel::with_parameters(2, FeatureMode::Word, w, b)
                    .unwrap()
                    .log_likelihood(&batch)
            };
            let fd = (perturb(h) - perturb(-h)) / (2.0 * h);
            let an = if c < buckets { grad.weights[c] } else { grad.bias };
            let scale = an.abs().max(fd.abs());
            if scale < 1e-9 {
                assert!((an - fd).abs() < 1e-9, "coordinate {c}: {an} vs {fd}");
            } else {
                assert!((an - fd).abs() / scale < 1e-5, "coordinate {c}: {an} vs {fd}");
            }
        }
    }
}

fn corpus(seed: u64, n: usize) -> Vec<Document> {
    let cfg = SynthConfig {
        n_human: n / 2,
        n_machine: n - n / 2,
        pool_size: 1,
        ..Default::default()
    };
    generate(&cfg, seed).unwrap().documents()
}

fn small_model() -> NGramLogRegModel {
    NGramLogRegModel::new(2, FeatureMode::Word, 1 << 12).unwrap()
}

#[test]
fn frozen_mask_step_does_not_decrease_objective() {
    let docs = corpus(5, 40);
    let cfg = FilterConfig::default();
    // warm the model up so the first pass actually filters something
    let tc = TrainConfig {
        epochs: 40,
        batch_size: 8,
        learning_rate: 50.0,
        ..Default::default()
    };
    let (mut model, _) = train_plain(&small_model(), &docs, &tc).unwrap();
    for _ in 0..5 {
        let refs: Vec<&Document> = docs.iter().collect();
        let masks = e_step(&model, &refs, &cfg).unwrap();
        assert_eq!(masks.len(), docs.len());
        assert!(masks.iter().any(|m| m.n_filtered() > 0));
        let feats: Vec<(SparseFeatures, Label)> = docs
            .iter()
            .map(|d| {
                let r = first_pass(&model, d, &cfg).unwrap();
                (model.featurize(&r.text), d.label.unwrap())
            })
            .collect();
        let q0 = model.log_likelihood(&feats);
        let g = model.gradient(&feats).unwrap();
        model.apply_gradient(&g, 1e-3);
        let q1 = model.log_likelihood(&feats);
        assert!(q1 >= q0, "{q1} < {q0}");
    }
}

#[test]
fn e_step_ignores_labels() {
    let docs = corpus(9, 30);
    let tc = TrainConfig {
        epochs: 40,
        batch_size: 6,
        learning_rate: 50.0,
        ..Default::default()
    };
    let (model, _) = train_plain(&small_model(), &docs, &tc).unwrap();
    let flipped: Vec<Document> = docs
        .iter()
        .map(|d| Document {
            label: d.label.map(Label::flipped),
            ..d.clone()
        })
        .collect();
    let cfg = FilterConfig::default();
    let a = e_step(&model, &docs.iter().collect::<Vec<_>>(), &cfg).unwrap();
    let b = e_step(&model, &flipped.iter().collect::<Vec<_>>(), &cfg).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().any(|m| m.n_filtered() > 0));
}

#[test]
fn zero_budget_training_is_plain_training() {
    let docs = corpus(13, 60);
    let tc = TrainConfig {
        epochs: 4,
        batch_size: 8,
        seed: 77,
        filter: FilterConfig {
            tau: 0.0,
            ..Default::default()
        },
        ..Default::default()
    };
    let (a, ta) = train_hard_em(&small_model(), &docs, &tc).unwrap();
    let (b, tb) = train_plain(&small_model(), &docs, &tc).unwrap();
    assert_eq!(a.bias().to_bits(), b.bias().to_bits());
    assert!(a
        .weights()
        .iter()
        .zip(b.weights())
        .all(|(x, y)| x.to_bits() == y.to_bits()));
    let q = |t: &stackdet_core::TrainTrace| t.records.iter().map(|r| r.mean_q.to_bits()).collect::<Vec<_>>();
    assert_eq!(q(&ta), q(&tb));
}

#[test]
fn training_is_seed_deterministic() {
    let docs = corpus(1, 40);
    let tc = TrainConfig {
        epochs: 2,
        batch_size: 5,
        seed: 3,
        ..Default::default()
    };
    let (a, _) = train_hard_em(&small_model(), &docs, &tc).unwrap();
    let (b, _) = train_hard_em(&small_model(), &docs, &tc).unwrap();
    assert_eq!(a, b);
}
