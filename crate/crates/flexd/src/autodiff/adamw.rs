use serde::{Deserialize, Serialize};

use crate::tensor::Tensor;

/// AdamW hyperparameters: Adam moments with decoupled weight decay.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AdamWConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for AdamWConfig {
    fn default() -> Self {
        AdamWConfig {
            lr: 0.002,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.01,
        }
    }
}

/// Optimizer state: one pair of moment tensors per parameter tensor.
pub struct AdamW {
    pub cfg: AdamWConfig,
    step: u64,
    first: Vec<Tensor>,
    second: Vec<Tensor>,
}

impl AdamW {
    pub fn new(cfg: AdamWConfig) -> Self {
        AdamW {
            cfg,
            step: 0,
            first: Vec::new(),
            second: Vec::new(),
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// One update over all parameter tensors. `params` and `grads` must be
    /// parallel slices with matching shapes across calls.
    pub fn step(&mut self, params: &mut [&mut Tensor], grads: &[&Tensor]) {
        assert_eq!(params.len(), grads.len(), "params/grads length mismatch");
        if self.first.is_empty() {
            self.first = params.iter().map(|p| Tensor::zeros(p.rows(), p.cols())).collect();
            self.second = self.first.clone();
        }
        assert_eq!(self.first.len(), params.len(), "parameter group changed size");
        self.step += 1;
        let t = self.step as i32;
        let bias1 = 1.0 - self.cfg.beta1.powi(t);
        let bias2 = 1.0 - self.cfg.beta2.powi(t);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.first.iter_mut().zip(self.second.iter_mut()))
        {
            assert_eq!(p.shape(), g.shape(), "gradient shape mismatch");
            let pd = p.as_mut_slice();
            let gd = g.as_slice();
            let md = m.as_mut_slice();
            let vd = v.as_mut_slice();
            for i in 0..pd.len() {
                md[i] = self.cfg.beta1 * md[i] + (1.0 - self.cfg.beta1) * gd[i];
                vd[i] = self.cfg.beta2 * vd[i] + (1.0 - self.cfg.beta2) * gd[i] * gd[i];
                let m_hat = md[i] / bias1;
                let v_hat = vd[i] / bias2;
                pd[i] -= self.cfg.lr * (m_hat / (v_hat.sqrt() + self.cfg.eps)
                    + self.cfg.weight_decay * pd[i]);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_zero_decay_leaves_params_unchanged() {
        let cfg = AdamWConfig {
            weight_decay: 0.0,
            ..Default::default()
        };
        let mut opt = AdamW::new(cfg);
        let mut p = Tensor::col(&[1.5, -0.25]);
        let orig = p.clone();
        let g = Tensor::col(&[0.0, 0.0]);
        opt.step(&mut [&mut p], &[&g]);
        assert_eq!(p, orig);
    }

    #[test]
    fn first_step_moves_by_lr_times_sign() {
        // Bias correction makes m_hat = g and v_hat = g^2 on step one, so the
        // update is -lr * g / (|g| + eps) = -lr * sign(g) up to eps.
        let cfg = AdamWConfig {
            weight_decay: 0.0,
            ..Default::default()
        };
        let lr = cfg.lr;
        let mut opt = AdamW::new(cfg);
        let mut p = Tensor::scalar(0.0);
        let g = Tensor::scalar(0.37);
        opt.step(&mut [&mut p], &[&g]);
        assert!((p.item() + lr).abs() < 1e-9, "got {}", p.item());

        let mut opt = AdamW::new(cfg);
        let mut p = Tensor::scalar(0.0);
        let g = Tensor::scalar(-123.0);
        opt.step(&mut [&mut p], &[&g]);
        assert!((p.item() - lr).abs() < 1e-9);
    }

    #[test]
    fn decoupled_decay_shrinks_params_multiplicatively() {
        let cfg = AdamWConfig {
            weight_decay: 0.01,
            ..Default::default()
        };
        let mut opt = AdamW::new(cfg);
        let mut p = Tensor::scalar(2.0);
        let g = Tensor::scalar(0.0);
        opt.step(&mut [&mut p], &[&g]);
        let expected = 2.0 * (1.0 - cfg.lr * cfg.weight_decay);
        assert!((p.item() - expected).abs() < 1e-15);
    }

    #[test]
    fn deterministic_across_runs() {
        let run = || {
            let mut opt = AdamW::new(AdamWConfig::default());
            let mut p = Tensor::col(&[0.1, 0.2, 0.3]);
            for i in 0..10 {
                let g = Tensor::col(&[0.01 * i as f64, -0.5, 0.3]);
                opt.step(&mut [&mut p], &[&g]);
            }
            p.as_slice().to_vec()
        };
        assert_eq!(run(), run());
    }
}
