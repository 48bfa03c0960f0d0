//! The Diff-Net comparator.
//!
//! A concatenated embedding pair `[e_A ‖ e_B]` goes through
//! FC → batch norm → ReLU → dropout → FC → sigmoid, giving one confidence
//! per descriptor dimension that `B` is stronger than `A`.

use alloc::vec::Vec;

use crate::embedding::{pair_into, Embedding, EmbeddingSet};
use crate::error::{Error, Result};

mod forward;
mod loss;
mod optim;
mod params;
mod train;

pub use forward::{backward, forward, update_running_stats, Cache, ForwardPass, Mode, BN_EPS};
pub use loss::{masked_bce_loss, LossOutput, BCE_EPS};
pub use optim::{Optimizer, OptimizerState};
pub use params::{DiffNetParams, ParamGradients, TRAINABLE};
pub use train::{
    default_learning_rate, train, EpochStats, TrainConfig, TrainingLog, LR_ECAPA, LR_FACODEC,
};

/// Confidence that `b` is stronger than `a` in `descriptor_dim`.
pub fn predict_confidence(
    params: &DiffNetParams,
    a: &Embedding,
    b: &Embedding,
    descriptor_dim: usize,
) -> Result<f64> {
    if descriptor_dim >= params.output_dim {
        return Err(Error::DimensionMismatch {
            expected: params.output_dim,
            found: descriptor_dim,
        });
    }
    if 2 * a.dim() != params.input_dim {
        return Err(Error::DimensionMismatch {
            expected: params.input_dim / 2,
            found: a.dim(),
        });
    }
    let mut input = alloc::vec![0.0; params.input_dim];
    pair_into(&a.vector, &b.vector, &mut input)?;
    let pass = forward(params, &input, Mode::Infer)?;
    Ok(pass.prediction(0)[descriptor_dim])
}

/// Infer-mode scores for `(a, b, descriptor_dim)` queries, in input order.
pub fn score_pairs<'a, I>(
    params: &DiffNetParams,
    embeddings: &EmbeddingSet,
    queries: I,
) -> Result<Vec<f64>>
where
    I: IntoIterator<
        Item = (
            &'a crate::embedding::UtteranceKey,
            &'a crate::embedding::UtteranceKey,
            usize,
        ),
    >,
{
    const CHUNK: usize = 256;
    let dim = embeddings.dim();
    if 2 * dim != params.input_dim {
        return Err(Error::DimensionMismatch {
            expected: params.input_dim / 2,
            found: dim,
        });
    }
    let mut scores = Vec::new();
    let mut inputs = Vec::with_capacity(CHUNK * 2 * dim);
    let mut dims = Vec::with_capacity(CHUNK);
    let flush =
        |inputs: &mut Vec<f64>, dims: &mut Vec<usize>, scores: &mut Vec<f64>| -> Result<()> {
            if dims.is_empty() {
                return Ok(());
            }
            let pass = forward(params, inputs, Mode::Infer)?;
            for (row, &d) in dims.iter().enumerate() {
                scores.push(pass.prediction(row)[d]);
            }
            inputs.clear();
            dims.clear();
            Ok(())
        };
    for (a, b, d) in queries {
        if d >= params.output_dim {
            return Err(Error::DimensionMismatch {
                expected: params.output_dim,
                found: d,
            });
        }
        inputs.extend_from_slice(&embeddings.get_key(a)?.vector);
        inputs.extend_from_slice(&embeddings.get_key(b)?.vector);
        dims.push(d);
        if dims.len() == CHUNK {
            flush(&mut inputs, &mut dims, &mut scores)?;
        }
    }
    flush(&mut inputs, &mut dims, &mut scores)?;
    Ok(scores)
}
