use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::catalog::build_catalog;
use crate::error::{Error, Result};
use crate::rng::{stream, Domain};

/// Weights, biases and batch-norm state of the two-layer comparator.
///
/// Matrices are row-major: `w1` is `input_dim × hidden`, `w2` is
/// `hidden × output_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffNetParams {
    pub input_dim: usize,
    pub hidden: usize,
    pub output_dim: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub bn_gamma: Vec<f64>,
    pub bn_beta: Vec<f64>,
    pub bn_running_mean: Vec<f64>,
    pub bn_running_var: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub catalog_fingerprint: String,
}

/// Gradients of the trainable tensors, shaped like [`DiffNetParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub bn_gamma: Vec<f64>,
    pub bn_beta: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

/// Names of the trainable tensors, in [`DiffNetParams::trainable_mut`] order.
pub const TRAINABLE: [&str; 6] = ["w1", "b1", "bn_gamma", "bn_beta", "w2", "b2"];

impl DiffNetParams {
    /// All-zero weights with identity batch-norm; every prediction is 0.5.
    pub fn zeros(input_dim: usize, hidden: usize, output_dim: usize) -> Self {
        Self {
            input_dim,
            hidden,
            output_dim,
            w1: alloc::vec![0.0; input_dim * hidden],
            b1: alloc::vec![0.0; hidden],
            bn_gamma: alloc::vec![1.0; hidden],
            bn_beta: alloc::vec![0.0; hidden],
            bn_running_mean: alloc::vec![0.0; hidden],
            bn_running_var: alloc::vec![1.0; hidden],
            w2: alloc::vec![0.0; hidden * output_dim],
            b2: alloc::vec![0.0; output_dim],
            catalog_fingerprint: build_catalog().fingerprint(),
        }
    }

    /// Fan-in scaled uniform weights, `U(-b, b)` with `b = sqrt(6 / fan_in)`.
    pub fn init(input_dim: usize, hidden: usize, output_dim: usize, seed: u64) -> Self {
        let mut params = Self::zeros(input_dim, hidden, output_dim);
        let mut rng = stream(seed, Domain::Init, 0);
        let bound1 = libm::sqrt(6.0 / input_dim.max(1) as f64);
        params
            .w1
            .iter_mut()
            .for_each(|w| *w = rng.random_range(-bound1..bound1));
        let bound2 = libm::sqrt(6.0 / hidden.max(1) as f64);
        params
            .w2
            .iter_mut()
            .for_each(|w| *w = rng.random_range(-bound2..bound2));
        params
    }

    pub fn trainable_mut(&mut self) -> [&mut Vec<f64>; 6] {
        [
            &mut self.w1,
            &mut self.b1,
            &mut self.bn_gamma,
            &mut self.bn_beta,
            &mut self.w2,
            &mut self.b2,
        ]
    }

    pub fn trainable(&self) -> [&Vec<f64>; 6] {
        [
            &self.w1,
            &self.b1,
            &self.bn_gamma,
            &self.bn_beta,
            &self.w2,
            &self.b2,
        ]
    }

    /// Every named tensor, including the running statistics.
    pub fn tensors(&self) -> [(&'static str, &Vec<f64>); 8] {
        [
            ("w1", &self.w1),
            ("b1", &self.b1),
            ("bn_gamma", &self.bn_gamma),
            ("bn_beta", &self.bn_beta),
            ("bn_running_mean", &self.bn_running_mean),
            ("bn_running_var", &self.bn_running_var),
            ("w2", &self.w2),
            ("b2", &self.b2),
        ]
    }

    pub fn tensor_mut(&mut self, name: &str) -> Option<&mut Vec<f64>> {
        Some(match name {
            "w1" => &mut self.w1,
            "b1" => &mut self.b1,
            "bn_gamma" => &mut self.bn_gamma,
            "bn_beta" => &mut self.bn_beta,
            "bn_running_mean" => &mut self.bn_running_mean,
            "bn_running_var" => &mut self.bn_running_var,
            "w2" => &mut self.w2,
            "b2" => &mut self.b2,
            _ => return None,
        })
    }

    pub fn expected_len(&self, name: &str) -> Option<usize> {
        Some(match name {
            "w1" => self.input_dim * self.hidden,
            "b1" | "bn_gamma" | "bn_beta" | "bn_running_mean" | "bn_running_var" => self.hidden,
            "w2" => self.hidden * self.output_dim,
            "b2" => self.output_dim,
            _ => return None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden == 0 || self.output_dim == 0 {
            return Err(Error::InvalidConfig(
                "network dimensions must be at least 1".into(),
            ));
        }
        for (name, tensor) in self.tensors() {
            let expected = self.expected_len(name).unwrap_or_default();
            if tensor.len() != expected {
                return Err(Error::ShapeMismatch {
                    what: name,
                    expected,
                    found: tensor.len(),
                });
            }
            if tensor.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig(alloc::format!(
                    "parameter {name} holds a non-finite value"
                )));
            }
        }
        if self.bn_running_var.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidConfig("negative running variance".into()));
        }
        Ok(())
    }
}

impl ParamGradients {
    pub fn zeros_like(params: &DiffNetParams) -> Self {
        Self {
            w1: alloc::vec![0.0; params.w1.len()],
            b1: alloc::vec![0.0; params.b1.len()],
            bn_gamma: alloc::vec![0.0; params.bn_gamma.len()],
            bn_beta: alloc::vec![0.0; params.bn_beta.len()],
            w2: alloc::vec![0.0; params.w2.len()],
            b2: alloc::vec![0.0; params.b2.len()],
        }
    }

    pub fn tensors(&self) -> [&Vec<f64>; 6] {
        [
            &self.w1,
            &self.b1,
            &self.bn_gamma,
            &self.bn_beta,
            &self.w2,
            &self.b2,
        ]
    }

    pub fn max_abs(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|t| t.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}
