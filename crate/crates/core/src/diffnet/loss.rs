use alloc::vec::Vec;
use core::borrow::Borrow;

use crate::dataset::LabelVector;
use crate::error::{Error, Result};

/// Predictions are clamped to `[EPS, 1 - EPS]` before the logarithm.
pub const BCE_EPS: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct LossOutput {
    pub loss: f64,
    /// `∂L/∂ŷ`, row-major like the predictions.
    pub grad: Vec<f64>,
}

/// Masked binary cross-entropy.
///
/// Sums `-l·ln ŷ - (1-l)·ln(1-ŷ)` over the labeled dimensions of each sample
/// and averages over samples. Dimensions labeled -1 contribute neither loss
/// nor gradient.
pub fn masked_bce_loss<L: Borrow<LabelVector>>(
    labels: &[L],
    predictions: &[f64],
) -> Result<LossOutput> {
    let Some(first) = labels.first() else {
        return Err(Error::EmptyInput);
    };
    let n = first.borrow().len();
    if predictions.len() != labels.len() * n {
        return Err(Error::ShapeMismatch {
            what: "predictions",
            expected: labels.len() * n,
            found: predictions.len(),
        });
    }
    let batch = labels.len() as f64;
    let mut loss = 0.0;
    let mut grad = alloc::vec![0.0; predictions.len()];
    for (row, label) in labels.iter().enumerate() {
        let label = label.borrow();
        if label.len() != n {
            return Err(Error::ShapeMismatch {
                what: "labels",
                expected: n,
                found: label.len(),
            });
        }
        for dim in label.labeled_dims() {
            let l = f64::from(label.values()[dim]);
            let y = predictions[row * n + dim].clamp(BCE_EPS, 1.0 - BCE_EPS);
            loss -= l * libm::log(y) + (1.0 - l) * libm::log(1.0 - y);
            grad[row * n + dim] = (y - l) / (y * (1.0 - y)) / batch;
        }
    }
    Ok(LossOutput {
        loss: loss / batch,
        grad,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn label(values: &[i8]) -> LabelVector {
        LabelVector::new(values.to_vec()).unwrap()
    }

    #[test]
    fn perfect_prediction_and_mask() {
        let out = masked_bce_loss(&[label(&[1, -1])], &[1.0 - BCE_EPS, 0.3]).unwrap();
        assert!(out.loss <= 1e-6);
        assert_eq!(out.grad[1], 0.0);
    }

    #[test]
    fn half_gives_ln2() {
        let out = masked_bce_loss(&[label(&[0])], &[0.5]).unwrap();
        assert!((out.loss - core::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn two_dims_hand_value() {
        // -ln 0.8 - ln(1 - 0.2)
        let out = masked_bce_loss(&[label(&[1, 0])], &[0.8, 0.2]).unwrap();
        assert!((out.loss - 0.446_287_102_628_419_5).abs() < 1e-12);
    }

    #[test]
    fn mean_over_batch() {
        let labels = vec![label(&[1]), label(&[-1])];
        let out = masked_bce_loss(&labels, &[0.5, 0.9]).unwrap();
        assert!((out.loss - core::f64::consts::LN_2 / 2.0).abs() < 1e-15);
        assert!((out.grad[0] - (-1.0)).abs() < 1e-12);
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(
            masked_bce_loss(&[label(&[1, 0])], &[0.5]),
            Err(Error::ShapeMismatch { .. })
        ));
        assert!(matches!(
            masked_bce_loss(&[label(&[1]), label(&[1, 0])], &[0.5, 0.5, 0.5]),
            Err(Error::ShapeMismatch { .. })
        ));
        assert_eq!(
            masked_bce_loss::<LabelVector>(&[], &[]).unwrap_err(),
            Error::EmptyInput
        );
    }
}
