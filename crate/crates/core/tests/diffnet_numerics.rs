//! Forward pass against a naive reference, gradients against central finite
//! differences, and loss masking.

#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vtad_core::dataset::LabelVector;
use vtad_core::diffnet::{
    backward, forward, masked_bce_loss, DiffNetParams, Mode, BN_EPS, TRAINABLE,
};

/// Straight-line evaluation with explicit loops, no shared helpers.
fn reference_forward(p: &DiffNetParams, x: &[f64], batch_stats: bool) -> Vec<f64> {
    let (d, h, n) = (p.input_dim, p.hidden, p.output_dim);
    let rows = x.len() / d;
    let mut z = vec![vec![0.0; h]; rows];
    for r in 0..rows {
        for j in 0..h {
            let mut acc = p.b1[j];
            for i in 0..d {
                acc += x[r * d + i] * p.w1[i * h + j];
            }
            z[r][j] = acc;
        }
    }
    let mut out = Vec::new();
    let mut stats = vec![(0.0, 0.0); h];
    for (j, s) in stats.iter_mut().enumerate() {
        if batch_stats {
            let mean = z.iter().map(|row| row[j]).sum::<f64>() / rows as f64;
            let var = z.iter().map(|row| (row[j] - mean).powi(2)).sum::<f64>() / rows as f64;
            *s = (mean, var);
        } else {
            *s = (p.bn_running_mean[j], p.bn_running_var[j]);
        }
    }
    for row in &z {
        let a: Vec<f64> = (0..h)
            .map(|j| {
                let (mean, var) = stats[j];
                let bn = p.bn_gamma[j] * (row[j] - mean) / (var + BN_EPS).sqrt() + p.bn_beta[j];
                bn.max(0.0)
            })
            .collect();
        for k in 0..n {
            let mut acc = p.b2[k];
            for j in 0..h {
                acc += a[j] * p.w2[j * n + k];
            }
            out.push(1.0 / (1.0 + (-acc).exp()));
        }
    }
    out
}

fn randomized_params(d: usize, h: usize, n: usize, rng: &mut ChaCha8Rng) -> DiffNetParams {
    let mut p = DiffNetParams::init(d, h, n, rng.random());
    for name in TRAINABLE {
        for v in p.tensor_mut(name).unwrap().iter_mut() {
            *v += rng.random_range(-0.5..0.5);
        }
    }
    for j in 0..h {
        p.bn_running_mean[j] = rng.random_range(-0.5..0.5);
        p.bn_running_var[j] = rng.random_range(0.2..2.0);
    }
    p
}

#[test]
fn forward_matches_reference_at_seed_42() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let p = randomized_params(10, 7, 5, &mut rng);
    let x: Vec<f64> = (0..6 * 10).map(|_| rng.random_range(-2.0..2.0)).collect();
    for (train, mode) in [
        (false, Mode::Infer),
        (
            true,
            Mode::Train {
                dropout: 0.0,
                seed: 0,
            },
        ),
    ] {
        let got = forward(&p, &x, mode).unwrap();
        let want = reference_forward(&p, &x, train);
        for (g, w) in got.outputs().iter().zip(&want) {
            assert!((g - w).abs() <= 1e-12, "{g} vs {w}");
        }
    }
}

fn labels_for(rows: usize, n: usize, rng: &mut ChaCha8Rng) -> Vec<LabelVector> {
    (0..rows)
        .map(|_| {
            let mut v: Vec<i8> = (0..n).map(|_| rng.random_range(-1..=1)).collect();
            let forced = rng.random_range(0..n);
            v[forced] = rng.random_range(0..=1);
            LabelVector::new(v).unwrap()
        })
        .collect()
}

fn loss_at(p: &DiffNetParams, x: &[f64], labels: &[LabelVector], mode: Mode) -> f64 {
    let pass = forward(p, x, mode).unwrap();
    masked_bce_loss(labels, pass.outputs()).unwrap().loss
}

fn max_relative_gradient_error(seed: u64, dropout: f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.random_range(2..=6);
    let h = rng.random_range(3..=8);
    let n = rng.random_range(2..=5);
    let rows = rng.random_range(2..=6);
    let p = randomized_params(2 * d, h, n, &mut rng);
    let x: Vec<f64> = (0..rows * 2 * d)
        .map(|_| rng.random_range(-1.5..1.5))
        .collect();
    let labels = labels_for(rows, n, &mut rng);
    let mode = Mode::Train {
        dropout,
        seed: rng.random(),
    };

    let pass = forward(&p, &x, mode).unwrap();
    let loss = masked_bce_loss(&labels, pass.outputs()).unwrap();
    let grads = backward(&p, &pass.cache, &loss.grad).unwrap();

    let step = 1e-5;
    let mut worst: f64 = 0.0;
    for (name, analytic) in TRAINABLE.iter().zip(grads.tensors()) {
        for i in 0..analytic.len() {
            let mut plus = p.clone();
            plus.tensor_mut(name).unwrap()[i] += step;
            let mut minus = p.clone();
            minus.tensor_mut(name).unwrap()[i] -= step;
            let numeric = (loss_at(&plus, &x, &labels, mode) - loss_at(&minus, &x, &labels, mode))
                / (2.0 * step);
            let scale = analytic[i].abs().max(numeric.abs()).max(1e-6);
            worst = worst.max((analytic[i] - numeric).abs() / scale);
        }
    }
    worst
}

#[test]
fn gradients_match_finite_differences() {
    for seed in 0..25 {
        let err = max_relative_gradient_error(seed, 0.0);
        assert!(err < 1e-4, "seed {seed}: relative error {err}");
    }
}

#[test]
fn gradients_match_with_dropout_mask() {
    for seed in 100..110 {
        let err = max_relative_gradient_error(seed, 0.3);
        assert!(err < 1e-4, "seed {seed}: relative error {err}");
    }
}

#[test]
fn infer_mode_is_pure() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = randomized_params(8, 6, 4, &mut rng);
    let x: Vec<f64> = (0..3 * 8).map(|_| rng.random_range(-1.0..1.0)).collect();
    let a = forward(&p, &x, Mode::Infer).unwrap();
    let b = forward(&p, &x, Mode::Infer).unwrap();
    assert_eq!(a.outputs(), b.outputs());
    // Row results do not depend on the rest of the batch.
    let single = forward(&p, &x[8..16], Mode::Infer).unwrap();
    assert_eq!(single.outputs(), a.prediction(1));
}

proptest! {
    #[test]
    fn masked_dimensions_never_affect_loss(
        values in prop::collection::vec((-1i8..=1, 0.001f64..0.999, 0.001f64..0.999), 2..12),
    ) {
        let mut labels: Vec<i8> = values.iter().map(|v| v.0).collect();
        labels[0] = 1;
        let label = LabelVector::new(labels.clone()).unwrap();
        let base: Vec<f64> = values.iter().map(|v| v.1).collect();
        let perturbed: Vec<f64> = values
            .iter()
            .zip(&labels)
            .map(|(v, &l)| if l == -1 { v.2 } else { v.1 })
            .collect();
        let a = masked_bce_loss(&[&label], &base).unwrap();
        let b = masked_bce_loss(&[&label], &perturbed).unwrap();
        prop_assert_eq!(a.loss, b.loss);
        for (dim, &l) in labels.iter().enumerate() {
            if l == -1 {
                prop_assert_eq!(a.grad[dim], 0.0);
            }
        }
    }

    #[test]
    fn predictions_stay_inside_unit_interval(
        seed in any::<u64>(),
        scale in 0.1f64..200.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = randomized_params(6, 5, 3, &mut rng);
        let x: Vec<f64> = (0..4 * 6).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
        for mode in [Mode::Infer, Mode::Train { dropout: 0.2, seed }] {
            let pass = forward(&p, &x, mode).unwrap();
            prop_assert!(pass.outputs().iter().all(|&y| y > 0.0 && y < 1.0));
        }
    }
}
