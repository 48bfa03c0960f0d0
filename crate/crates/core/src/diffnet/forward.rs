//! Forward and reverse passes of FC → BN → ReLU → dropout → FC → sigmoid.

use alloc::vec::Vec;

use rand::Rng;

use super::params::{DiffNetParams, ParamGradients};
use crate::error::{Error, Result};
use crate::rng::{stream, Domain};

/// Batch-norm variance floor.
pub const BN_EPS: f64 = 1e-5;

/// Largest `f64` below one; sigmoid outputs are kept strictly inside (0, 1).
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// Batch statistics and dropout with a seeded mask.
    Train { dropout: f64, seed: u64 },
    /// Running statistics, no dropout.
    Infer,
}

/// Intermediate activations kept for [`backward`].
#[derive(Debug, Clone)]
pub struct Cache {
    rows: usize,
    input_dim: usize,
    hidden: usize,
    output_dim: usize,
    train: bool,
    inputs: Vec<f64>,
    normalized: Vec<f64>,
    inv_std: Vec<f64>,
    activated: Vec<f64>,
    dropout_scale: Vec<f64>,
    dropped: Vec<f64>,
    outputs: Vec<f64>,
    batch_mean: Vec<f64>,
    batch_var: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ForwardPass {
    pub cache: Cache,
}

impl ForwardPass {
    /// Sigmoid outputs, `rows × output_dim` row-major.
    pub fn outputs(&self) -> &[f64] {
        &self.cache.outputs
    }

    pub fn rows(&self) -> usize {
        self.cache.rows
    }

    pub fn prediction(&self, row: usize) -> &[f64] {
        let n = self.cache.output_dim;
        &self.cache.outputs[row * n..(row + 1) * n]
    }

    /// Per-unit batch mean and biased variance (train mode only).
    pub fn batch_stats(&self) -> Option<(&[f64], &[f64])> {
        self.cache.train.then_some((
            self.cache.batch_mean.as_slice(),
            self.cache.batch_var.as_slice(),
        ))
    }
}

/// `c = a·b + beta·c` with `a: m×k`, `b: k×n`; `*_t` marks operands stored
/// transposed (row-major `k×m` / `n×k`).
#[allow(clippy::too_many_arguments)]
pub(crate) fn matmul(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    a_t: bool,
    b: &[f64],
    b_t: bool,
    beta: f64,
    c: &mut [f64],
) {
    assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    if m == 0 || n == 0 {
        return;
    }
    let (rsa, csa) = if a_t { (1, m) } else { (k, 1) };
    let (rsb, csb) = if b_t { (1, k) } else { (n, 1) };
    // SAFETY: the assertion above bounds every index the strides reach.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

fn sigmoid(z: f64) -> f64 {
    let s = if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    };
    s.clamp(f64::MIN_POSITIVE, BELOW_ONE)
}

/// Run the comparator on `inputs`, a row-major batch of concatenated pairs.
pub fn forward(params: &DiffNetParams, inputs: &[f64], mode: Mode) -> Result<ForwardPass> {
    let (d, h, n) = (params.input_dim, params.hidden, params.output_dim);
    if inputs.is_empty() || !inputs.len().is_multiple_of(d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: inputs.len() % d.max(1),
        });
    }
    let rows = inputs.len() / d;
    let train = matches!(mode, Mode::Train { .. });
    if train && rows < 2 {
        return Err(Error::DegenerateBatch { size: rows });
    }

    // Affine 1.
    let mut pre = Vec::with_capacity(rows * h);
    for _ in 0..rows {
        pre.extend_from_slice(&params.b1);
    }
    matmul(rows, d, h, inputs, false, &params.w1, false, 1.0, &mut pre);

    // Batch norm.
    let (mean, var) = if train {
        let mut mean = alloc::vec![0.0; h];
        let mut var = alloc::vec![0.0; h];
        for row in pre.chunks_exact(h) {
            mean.iter_mut().zip(row).for_each(|(m, &z)| *m += z);
        }
        mean.iter_mut().for_each(|m| *m /= rows as f64);
        for row in pre.chunks_exact(h) {
            for ((v, &z), &m) in var.iter_mut().zip(row).zip(&mean) {
                *v += (z - m) * (z - m);
            }
        }
        var.iter_mut().for_each(|v| *v /= rows as f64);
        (mean, var)
    } else {
        (
            params.bn_running_mean.clone(),
            params.bn_running_var.clone(),
        )
    };
    let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / libm::sqrt(v + BN_EPS)).collect();
    let mut normalized = pre;
    for row in normalized.chunks_exact_mut(h) {
        for j in 0..h {
            row[j] = (row[j] - mean[j]) * inv_std[j];
        }
    }

    // Scale/shift, ReLU.
    let mut activated = Vec::with_capacity(rows * h);
    for row in normalized.chunks_exact(h) {
        for ((&x, &gamma), &beta) in row.iter().zip(&params.bn_gamma).zip(&params.bn_beta) {
            activated.push(gamma * x + beta);
        }
    }

    // Dropout: survivors scaled by 1/(1-p).
    let dropout_scale = match mode {
        Mode::Train { dropout, seed } if dropout > 0.0 => {
            if !(0.0..1.0).contains(&dropout) {
                return Err(Error::InvalidConfig(
                    "dropout rate must lie in [0, 1)".into(),
                ));
            }
            let keep = 1.0 / (1.0 - dropout);
            let mut rng = stream(seed, Domain::Dropout, 0);
            (0..rows * h)
                .map(|_| {
                    if rng.random::<f64>() < dropout {
                        0.0
                    } else {
                        keep
                    }
                })
                .collect()
        }
        _ => alloc::vec![1.0; rows * h],
    };
    let dropped: Vec<f64> = activated
        .iter()
        .zip(&dropout_scale)
        .map(|(&a, &s)| a.max(0.0) * s)
        .collect();

    // Affine 2, sigmoid.
    let mut outputs = Vec::with_capacity(rows * n);
    for _ in 0..rows {
        outputs.extend_from_slice(&params.b2);
    }
    matmul(
        rows,
        h,
        n,
        &dropped,
        false,
        &params.w2,
        false,
        1.0,
        &mut outputs,
    );
    outputs.iter_mut().for_each(|z| *z = sigmoid(*z));

    Ok(ForwardPass {
        cache: Cache {
            rows,
            input_dim: d,
            hidden: h,
            output_dim: n,
            train,
            inputs: inputs.to_vec(),
            normalized,
            inv_std,
            activated,
            dropout_scale,
            dropped,
            outputs,
            batch_mean: if train { mean } else { Vec::new() },
            batch_var: if train { var } else { Vec::new() },
        },
    })
}

/// Exact gradients of a scalar loss given `grad_output = ∂L/∂ŷ`.
///
/// Train-mode caches differentiate through the batch statistics; running
/// statistics never receive gradient.
pub fn backward(
    params: &DiffNetParams,
    cache: &Cache,
    grad_output: &[f64],
) -> Result<ParamGradients> {
    let (rows, d, h, n) = (cache.rows, cache.input_dim, cache.hidden, cache.output_dim);
    if d != params.input_dim || h != params.hidden || n != params.output_dim {
        return Err(Error::StaleCache);
    }
    if grad_output.len() != rows * n {
        return Err(Error::ShapeMismatch {
            what: "grad_output",
            expected: rows * n,
            found: grad_output.len(),
        });
    }
    let mut grads = ParamGradients::zeros_like(params);

    // Through the sigmoid.
    let dz2: Vec<f64> = grad_output
        .iter()
        .zip(&cache.outputs)
        .map(|(&g, &y)| g * y * (1.0 - y))
        .collect();
    for row in dz2.chunks_exact(n) {
        grads.b2.iter_mut().zip(row).for_each(|(b, &g)| *b += g);
    }
    matmul(
        h,
        rows,
        n,
        &cache.dropped,
        true,
        &dz2,
        false,
        0.0,
        &mut grads.w2,
    );

    // Back to the batch-norm output.
    let mut dact = alloc::vec![0.0; rows * h];
    matmul(rows, n, h, &dz2, false, &params.w2, true, 0.0, &mut dact);
    for ((g, &a), &s) in dact
        .iter_mut()
        .zip(&cache.activated)
        .zip(&cache.dropout_scale)
    {
        *g = if a > 0.0 { *g * s } else { 0.0 };
    }

    for (row_g, row_x) in dact.chunks_exact(h).zip(cache.normalized.chunks_exact(h)) {
        for j in 0..h {
            grads.bn_gamma[j] += row_g[j] * row_x[j];
            grads.bn_beta[j] += row_g[j];
        }
    }

    // Through the normalization.
    let mut dpre = dact;
    for row in dpre.chunks_exact_mut(h) {
        row.iter_mut()
            .zip(&params.bn_gamma)
            .for_each(|(g, &gamma)| *g *= gamma);
    }
    if cache.train {
        let b = rows as f64;
        let mut sum = alloc::vec![0.0; h];
        let mut sum_x = alloc::vec![0.0; h];
        for (row_g, row_x) in dpre.chunks_exact(h).zip(cache.normalized.chunks_exact(h)) {
            for j in 0..h {
                sum[j] += row_g[j];
                sum_x[j] += row_g[j] * row_x[j];
            }
        }
        for (row_g, row_x) in dpre
            .chunks_exact_mut(h)
            .zip(cache.normalized.chunks_exact(h))
        {
            for j in 0..h {
                row_g[j] = cache.inv_std[j] / b * (b * row_g[j] - sum[j] - row_x[j] * sum_x[j]);
            }
        }
    } else {
        for row in dpre.chunks_exact_mut(h) {
            row.iter_mut()
                .zip(&cache.inv_std)
                .for_each(|(g, &s)| *g *= s);
        }
    }

    for row in dpre.chunks_exact(h) {
        grads.b1.iter_mut().zip(row).for_each(|(b, &g)| *b += g);
    }
    matmul(
        d,
        rows,
        h,
        &cache.inputs,
        true,
        &dpre,
        false,
        0.0,
        &mut grads.w1,
    );
    Ok(grads)
}

/// Fold a train-mode pass's batch statistics into the running estimates.
///
/// The running variance tracks the unbiased batch variance.
pub fn update_running_stats(params: &mut DiffNetParams, pass: &ForwardPass, momentum: f64) {
    let Some((mean, var)) = pass.batch_stats() else {
        return;
    };
    let rows = pass.rows() as f64;
    let correction = rows / (rows - 1.0);
    for j in 0..params.hidden {
        params.bn_running_mean[j] =
            (1.0 - momentum) * params.bn_running_mean[j] + momentum * mean[j];
        params.bn_running_var[j] =
            (1.0 - momentum) * params.bn_running_var[j] + momentum * var[j] * correction;
    }
}
