use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::params::{DiffNetParams, ParamGradients};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Optimizer {
    Adam { beta1: f64, beta2: f64, eps: f64 },
    Sgd,
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl Optimizer {
    pub fn name(&self) -> &'static str {
        match self {
            Optimizer::Adam { .. } => "adam",
            Optimizer::Sgd => "sgd",
        }
    }
}

/// Moment estimates carried between steps.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    optimizer: Optimizer,
    step: u64,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl OptimizerState {
    pub fn new(optimizer: Optimizer, params: &DiffNetParams) -> Self {
        let zeros = || {
            params
                .trainable()
                .iter()
                .map(|t| alloc::vec![0.0; t.len()])
                .collect()
        };
        Self {
            optimizer,
            step: 0,
            first: zeros(),
            second: zeros(),
        }
    }

    pub fn apply(
        &mut self,
        params: &mut DiffNetParams,
        grads: &ParamGradients,
        learning_rate: f64,
    ) {
        self.step += 1;
        let grads = grads.tensors();
        match self.optimizer {
            Optimizer::Sgd => {
                for (p, g) in params.trainable_mut().into_iter().zip(grads) {
                    p.iter_mut()
                        .zip(g)
                        .for_each(|(p, g)| *p -= learning_rate * g);
                }
            }
            Optimizer::Adam { beta1, beta2, eps } => {
                let t = self.step as i32;
                let c1 = 1.0 - libm::pow(beta1, f64::from(t));
                let c2 = 1.0 - libm::pow(beta2, f64::from(t));
                for (((p, g), m), v) in params
                    .trainable_mut()
                    .into_iter()
                    .zip(grads)
                    .zip(&mut self.first)
                    .zip(&mut self.second)
                {
                    for i in 0..p.len() {
                        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                        let m_hat = m[i] / c1;
                        let v_hat = v[i] / c2;
                        p[i] -= learning_rate * m_hat / (libm::sqrt(v_hat) + eps);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sgd_step() {
        let mut p = DiffNetParams::zeros(1, 1, 1);
        let mut g = ParamGradients::zeros_like(&p);
        g.w1[0] = 2.0;
        OptimizerState::new(Optimizer::Sgd, &p).apply(&mut p, &g, 0.5);
        assert_eq!(p.w1[0], -1.0);
    }

    #[test]
    fn adam_first_step_moves_by_lr() {
        let mut p = DiffNetParams::zeros(1, 1, 1);
        let mut g = ParamGradients::zeros_like(&p);
        g.w2[0] = -3.0;
        OptimizerState::new(Optimizer::default(), &p).apply(&mut p, &g, 1e-3);
        assert!((p.w2[0] - 1e-3).abs() < 1e-10);
        assert_eq!(p.b1[0], 0.0);
    }
}
