use super::tensor::{Real, Tensor};
use crate::error::{Error, Result};

pub const DEFAULT_LEARNING_RATE: f64 = 1e-3;

/// Adam optimizer state with bias-corrected moment estimates.
#[derive(Debug, Clone)]
pub struct AdamState<T = f32> {
    pub step: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    first: Vec<Vec<T>>,
    second: Vec<Vec<T>>,
}

impl<T: Real> AdamState<T> {
    /// Fresh state for parameters with the given element counts.
    pub fn new(learning_rate: f64, sizes: &[usize]) -> Result<Self> {
        Self::with_betas(learning_rate, 0.9, 0.999, 1e-8, sizes)
    }

    pub fn with_betas(
        learning_rate: f64,
        beta1: f64,
        beta2: f64,
        epsilon: f64,
        sizes: &[usize],
    ) -> Result<Self> {
        let in_unit = |b: f64| b > 0.0 && b < 1.0;
        if !(learning_rate > 0.0 && in_unit(beta1) && in_unit(beta2) && epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "adam: need lr > 0, 0 < beta1, beta2 < 1, epsilon > 0 \
                 (got {learning_rate}, {beta1}, {beta2}, {epsilon})"
            )));
        }
        Ok(Self {
            step: 0,
            learning_rate,
            beta1,
            beta2,
            epsilon,
            first: sizes.iter().map(|&n| vec![T::zero(); n]).collect(),
            second: sizes.iter().map(|&n| vec![T::zero(); n]).collect(),
        })
    }

    /// Applies one update to every parameter from its gradient. Gradients are
    /// left in place.
    pub fn step(&mut self, params: &mut [(&str, &mut Tensor<T>)]) -> Result<()> {
        if params.len() != self.first.len() {
            return Err(Error::InvalidArgument(format!(
                "adam: state tracks {} tensors, got {}",
                self.first.len(),
                params.len()
            )));
        }
        for ((name, p), m) in params.iter().zip(&self.first) {
            if p.grad().is_none() {
                return Err(Error::MissingGrad(name.to_string()));
            }
            if m.len() != p.len() {
                return Err(Error::shape("adam accumulator", &[m.len()], p.shape()));
            }
        }

        self.step += 1;
        let t = self.step as i32;
        let b1 = T::of(self.beta1);
        let b2 = T::of(self.beta2);
        let c1 = T::of(1.0 - self.beta1.powi(t));
        let c2 = T::of(1.0 - self.beta2.powi(t));
        let lr = T::of(self.learning_rate);
        let eps = T::of(self.epsilon);
        let one = T::one();

        for (((_, p), m), v) in params.iter_mut().zip(&mut self.first).zip(&mut self.second) {
            let grad = p.grad().expect("checked above").to_vec();
            for (((w, &g), mi), vi) in p.values_mut().iter_mut().zip(&grad).zip(m.iter_mut()).zip(v.iter_mut()) {
                *mi = b1 * *mi + (one - b1) * g;
                *vi = b2 * *vi + (one - b2) * g * g;
                let m_hat = *mi / c1;
                let v_hat = *vi / c2;
                *w = *w - lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}
