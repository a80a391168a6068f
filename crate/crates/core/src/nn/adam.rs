use super::network::Tensor;
use crate::error::{Error, Result};

/// First and second moment estimates for every parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step: u64,
    pub first: Vec<Tensor>,
    pub second: Vec<Tensor>,
}

impl AdamState {
    pub fn new(params: &[Tensor], lr: f64) -> Self {
        let zeros = || params.iter().map(|t| Tensor::zeros(t.shape.clone())).collect();
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            first: zeros(),
            second: zeros(),
        }
    }

    /// One bias-corrected update of `params` in place.
    pub fn update(&mut self, params: &mut [Tensor], grads: &[Tensor]) -> Result<()> {
        if params.len() != self.first.len() || grads.len() != params.len() {
            return Err(Error::dims("adam update", self.first.len(), grads.len()));
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(&mut self.first)
            .zip(&mut self.second)
        {
            if p.len() != g.len() {
                return Err(Error::dims("adam tensor", p.len(), g.len()));
            }
            for (((w, &d), m), v) in p
                .values
                .iter_mut()
                .zip(&g.values)
                .zip(&mut m.values)
                .zip(&mut v.values)
            {
                *m = self.beta1 * *m + (1.0 - self.beta1) * d;
                *v = self.beta2 * *v + (1.0 - self.beta2) * d * d;
                *w -= self.lr * (*m / c1) / ((*v / c2).sqrt() + self.epsilon);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut params = vec![Tensor {
            shape: vec![2],
            values: vec![1.0, -1.0],
        }];
        let grads = vec![Tensor {
            shape: vec![2],
            values: vec![0.5, -2.0],
        }];
        let mut adam = AdamState::new(&params, 0.01);
        adam.update(&mut params, &grads).unwrap();
        // Bias correction makes the first step ±lr regardless of scale.
        assert!((params[0].values[0] - 0.99).abs() < 1e-7);
        assert!((params[0].values[1] + 0.99).abs() < 1e-7);
        assert_eq!(adam.step, 1);
    }

    #[test]
    fn minimizes_quadratic() {
        let mut params = vec![Tensor {
            shape: vec![1],
            values: vec![3.0],
        }];
        let mut adam = AdamState::new(&params, 0.1);
        for _ in 0..500 {
            let g = vec![Tensor {
                shape: vec![1],
                values: vec![2.0 * params[0].values[0]],
            }];
            adam.update(&mut params, &g).unwrap();
        }
        assert!(params[0].values[0].abs() < 1e-2);
    }

    #[test]
    fn shape_mismatch() {
        let mut params = vec![Tensor::zeros(vec![2])];
        let mut adam = AdamState::new(&params, 0.1);
        assert!(adam.update(&mut params, &[Tensor::zeros(vec![3])]).is_err());
        assert!(adam.update(&mut params, &[]).is_err());
    }
}
