//! Training loop behaviour on small planted-attribute data.

use vtad_core::catalog::build_catalog;
use vtad_core::dataset::{build_training_samples, build_trials, split_scenario};
use vtad_core::diffnet::{score_pairs, train};
use vtad_core::synthetic::{generate, SyntheticConfig};
use vtad_core::{Scenario, SplitConfig, TrainConfig, UtteranceAllocation};

fn small_setup() -> (vtad_core::synthetic::SyntheticData, vtad_core::SplitPlan) {
    let catalog = build_catalog();
    let data = generate(
        &SyntheticConfig {
            speakers_per_gender: 20,
            utterances_per_speaker: 6,
            seed: 4,
            ..SyntheticConfig::default()
        },
        &catalog,
    )
    .unwrap();
    let mut config = SplitConfig::new(Scenario::Unseen, &catalog);
    config.k_train = 2;
    config.k_eval = 3;
    config.seed = 4;
    let plan = split_scenario(&data.records, &config, &catalog).unwrap();
    (data, plan)
}

#[test]
fn loss_decreases_over_first_epochs() {
    let catalog = build_catalog();
    let (data, plan) = small_setup();
    let alloc = UtteranceAllocation::allocate(&plan, &data.embeddings).unwrap();
    let samples = build_training_samples(&plan, &alloc, &catalog).unwrap();
    let config = TrainConfig {
        epochs: 3,
        ..TrainConfig::default()
    };
    let (_, log) = train(&config, &samples, &data.embeddings).unwrap();
    let losses: Vec<f64> = log.epochs.iter().map(|e| e.mean_loss).collect();
    assert!(losses.windows(2).all(|w| w[1] < w[0]), "{losses:?}");
}

#[test]
fn training_is_deterministic() {
    let catalog = build_catalog();
    let (data, plan) = small_setup();
    let alloc = UtteranceAllocation::allocate(&plan, &data.embeddings).unwrap();
    let samples = build_training_samples(&plan, &alloc, &catalog).unwrap();
    let config = TrainConfig {
        epochs: 2,
        seed: 11,
        ..TrainConfig::default()
    };
    let (a, log_a) = train(&config, &samples, &data.embeddings).unwrap();
    let (b, log_b) = train(&config, &samples, &data.embeddings).unwrap();
    assert_eq!(a, b);
    assert_eq!(log_a, log_b);
    let other = TrainConfig { seed: 12, ..config };
    assert_ne!(train(&other, &samples, &data.embeddings).unwrap().0, a);
}

#[test]
fn trained_model_prefers_planted_direction() {
    let catalog = build_catalog();
    let (data, plan) = small_setup();
    let alloc = UtteranceAllocation::allocate(&plan, &data.embeddings).unwrap();
    let samples = build_training_samples(&plan, &alloc, &catalog).unwrap();
    let (params, _) = train(&TrainConfig::default(), &samples, &data.embeddings).unwrap();
    let trials = build_trials(&plan, &alloc).unwrap();
    let targets: Vec<_> = trials.iter().filter(|t| t.truth).collect();
    let scores = score_pairs(
        &params,
        &data.embeddings,
        targets.iter().map(|t| (&t.a, &t.b, t.descriptor_dim)),
    )
    .unwrap();
    let above = scores.iter().filter(|&&s| s > 0.5).count() as f64 / scores.len() as f64;
    assert!(above > 0.75, "{above}");
}
