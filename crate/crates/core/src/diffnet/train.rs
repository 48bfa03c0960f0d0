use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::forward::{backward, forward, update_running_stats, Mode};
use super::loss::masked_bce_loss;
use super::optim::{Optimizer, OptimizerState};
use super::params::DiffNetParams;
use crate::dataset::{LabelVector, TrainingSample};
use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::rng::{stream, Domain};

pub const LR_ECAPA: f64 = 5e-5;
pub const LR_FACODEC: f64 = 2.5e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub hidden_size: usize,
    pub dropout_rate: f64,
    pub bn_momentum: f64,
    pub optimizer: Optimizer,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: LR_ECAPA,
            batch_size: 16,
            epochs: 10,
            hidden_size: 128,
            dropout_rate: 0.2,
            bn_momentum: 0.1,
            optimizer: Optimizer::default(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// Defaults with the learning rate matched to the embedding encoder:
    /// 2.5e-5 for FACodec timbre embeddings, 5e-5 otherwise.
    pub fn for_encoder(encoder_tag: &str) -> Self {
        Self {
            learning_rate: default_learning_rate(encoder_tag),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning_rate must be positive");
        }
        if self.batch_size < 2 {
            return fail("batch_size must be at least 2 (batch statistics)");
        }
        if self.epochs < 1 {
            return fail("epochs must be at least 1");
        }
        if self.hidden_size < 1 {
            return fail("hidden_size must be at least 1");
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return fail("dropout_rate must lie in [0, 1)");
        }
        if !(0.0..=1.0).contains(&self.bn_momentum) {
            return fail("bn_momentum must lie in [0, 1]");
        }
        Ok(())
    }
}

pub fn default_learning_rate(encoder_tag: &str) -> f64 {
    if encoder_tag.to_ascii_lowercase().contains("facodec") {
        LR_FACODEC
    } else {
        LR_ECAPA
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    pub batches: usize,
    /// Samples skipped because the trailing batch was smaller than two.
    pub dropped_samples: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub epochs: Vec<EpochStats>,
}

/// Train a fresh comparator on `samples`.
///
/// Samples are reshuffled every epoch; a trailing batch of one sample is
/// dropped because batch statistics need two. Fully deterministic per seed.
pub fn train(
    config: &TrainConfig,
    samples: &[TrainingSample],
    embeddings: &EmbeddingSet,
) -> Result<(DiffNetParams, TrainingLog)> {
    config.validate()?;
    let Some(first) = samples.first() else {
        return Err(Error::EmptyInput);
    };
    let dim = embeddings.dim();
    let output_dim = first.label.len();
    let resolved = samples
        .iter()
        .map(|s| {
            if s.label.len() != output_dim {
                return Err(Error::ShapeMismatch {
                    what: "labels",
                    expected: output_dim,
                    found: s.label.len(),
                });
            }
            Ok((
                embeddings.get_key(&s.a)?.vector.as_slice(),
                embeddings.get_key(&s.b)?.vector.as_slice(),
                &*s.label,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut params = DiffNetParams::init(2 * dim, config.hidden_size, output_dim, config.seed);
    let mut optimizer = OptimizerState::new(config.optimizer, &params);
    let mut log = TrainingLog::default();
    let mut order: Vec<usize> = (0..resolved.len()).collect();
    let mut inputs = Vec::with_capacity(config.batch_size * 2 * dim);
    let mut labels: Vec<&LabelVector> = Vec::with_capacity(config.batch_size);

    for epoch in 0..config.epochs {
        let mut rng = stream(config.seed, Domain::Shuffle, epoch as u64);
        order.shuffle(&mut rng);
        let mut total = 0.0;
        let mut batches = 0;
        let mut dropped_samples = 0;
        for (batch, chunk) in order.chunks(config.batch_size).enumerate() {
            if chunk.len() < 2 {
                dropped_samples += chunk.len();
                continue;
            }
            inputs.clear();
            labels.clear();
            for &i in chunk {
                let (a, b, label) = resolved[i];
                inputs.extend_from_slice(a);
                inputs.extend_from_slice(b);
                labels.push(label);
            }
            let mode = Mode::Train {
                dropout: config.dropout_rate,
                seed: rng.next_u64(),
            };
            let pass = forward(&params, &inputs, mode)?;
            let loss = masked_bce_loss(&labels, pass.outputs())?;
            if !loss.loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch });
            }
            let grads = backward(&params, &pass.cache, &loss.grad)?;
            optimizer.apply(&mut params, &grads, config.learning_rate);
            update_running_stats(&mut params, &pass, config.bn_momentum);
            total += loss.loss;
            batches += 1;
        }
        if batches == 0 {
            return Err(Error::DegenerateBatch {
                size: resolved.len(),
            });
        }
        log.epochs.push(EpochStats {
            epoch,
            mean_loss: total / batches as f64,
            batches,
            dropped_samples,
        });
    }
    Ok((params, log))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_reported_configuration() {
        let c = TrainConfig::default();
        assert_eq!(c.batch_size, 16);
        assert_eq!(c.epochs, 10);
        assert_eq!(c.hidden_size, 128);
        assert_eq!(c.learning_rate, 5e-5);
        assert_eq!(
            TrainConfig::for_encoder("FACodec-timbre").learning_rate,
            2.5e-5
        );
        assert_eq!(TrainConfig::for_encoder("ecapa-tdnn").learning_rate, 5e-5);
    }

    #[test]
    fn config_validation() {
        let bad = [
            TrainConfig {
                epochs: 0,
                ..TrainConfig::default()
            },
            TrainConfig {
                batch_size: 1,
                ..TrainConfig::default()
            },
            TrainConfig {
                learning_rate: 0.0,
                ..TrainConfig::default()
            },
            TrainConfig {
                dropout_rate: 1.0,
                ..TrainConfig::default()
            },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(Error::InvalidConfig(_))));
        }
        TrainConfig::default().validate().unwrap();
    }
}
