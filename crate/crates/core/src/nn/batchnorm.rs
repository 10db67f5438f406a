//! Batch normalization over `[batch, time, channels]` activations.
//!
//! Statistics are taken per channel jointly over batch and time.

use super::tensor::{btc, Real, Tensor};
use crate::error::{Error, Result};

pub const DEFAULT_MOMENTUM: f64 = 0.9;
pub const DEFAULT_EPSILON: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

/// Exponential moving averages of the per-channel mean and variance.
#[derive(Debug, Clone, PartialEq)]
pub struct RunningStats<T> {
    pub mean: Tensor<T>,
    pub var: Tensor<T>,
    pub momentum: T,
    pub epsilon: T,
}

impl<T: Real> RunningStats<T> {
    pub fn new(channels: usize) -> Self {
        Self {
            mean: Tensor::zeros(vec![channels]),
            var: Tensor::full(vec![channels], T::one()),
            momentum: T::of(DEFAULT_MOMENTUM),
            epsilon: T::of(DEFAULT_EPSILON),
        }
    }
}

/// Values saved by a train-mode forward pass.
#[derive(Debug, Clone)]
pub struct BatchNormCache<T> {
    normalized: Vec<T>,
    inv_std: Vec<T>,
    shape: Vec<usize>,
}

fn check<T: Real>(input: &Tensor<T>, gamma: &Tensor<T>, beta: &Tensor<T>) -> Result<(usize, usize)> {
    let (b, t, c) = btc("batchnorm1d", input.shape())?;
    if gamma.shape() != [c] {
        return Err(Error::shape("batchnorm1d gamma", &[c], gamma.shape()));
    }
    if beta.shape() != [c] {
        return Err(Error::shape("batchnorm1d beta", &[c], beta.shape()));
    }
    Ok((b * t, c))
}

/// Normalizes with batch statistics and folds them into `running`.
pub fn batchnorm1d_train<T: Real>(
    input: &Tensor<T>,
    gamma: &Tensor<T>,
    beta: &Tensor<T>,
    running: &mut RunningStats<T>,
) -> Result<(Tensor<T>, BatchNormCache<T>)> {
    let (rows, c) = check(input, gamma, beta)?;
    let x = input.values();
    let n = T::from_usize(rows).unwrap();

    let mut mean = vec![T::zero(); c];
    for row in x.chunks(c) {
        mean.iter_mut().zip(row).for_each(|(m, &v)| *m = *m + v);
    }
    mean.iter_mut().for_each(|m| *m = *m / n);

    let mut var = vec![T::zero(); c];
    for row in x.chunks(c) {
        for ((s, &v), &m) in var.iter_mut().zip(row).zip(&mean) {
            let d = v - m;
            *s = *s + d * d;
        }
    }
    var.iter_mut().for_each(|v| *v = *v / n);

    let eps = running.epsilon;
    let inv_std: Vec<T> = var.iter().map(|&v| (v.max(T::zero()) + eps).sqrt().recip()).collect();

    let mut normalized = Vec::with_capacity(x.len());
    let mut out = Vec::with_capacity(x.len());
    let (gm, bt) = (gamma.values(), beta.values());
    for row in x.chunks(c) {
        for ch in 0..c {
            let z = (row[ch] - mean[ch]) * inv_std[ch];
            normalized.push(z);
            out.push(gm[ch] * z + bt[ch]);
        }
    }

    let mo = running.momentum;
    let keep = T::one() - mo;
    for (r, &m) in running.mean.values_mut().iter_mut().zip(&mean) {
        *r = mo * *r + keep * m;
    }
    for (r, &v) in running.var.values_mut().iter_mut().zip(&var) {
        *r = mo * *r + keep * v;
    }

    Ok((
        Tensor::new(input.shape().to_vec(), out)?,
        BatchNormCache {
            normalized,
            inv_std,
            shape: input.shape().to_vec(),
        },
    ))
}

/// Normalizes with the running statistics. Pure.
pub fn batchnorm1d_infer<T: Real>(
    input: &Tensor<T>,
    gamma: &Tensor<T>,
    beta: &Tensor<T>,
    running: &RunningStats<T>,
) -> Result<Tensor<T>> {
    let (_, c) = check(input, gamma, beta)?;
    if running.mean.shape() != [c] || running.var.shape() != [c] {
        return Err(Error::shape("batchnorm1d running stats", &[c], running.mean.shape()));
    }
    let scale: Vec<T> = running
        .var
        .values()
        .iter()
        .zip(gamma.values())
        .map(|(&v, &g)| g / (v.max(T::zero()) + running.epsilon).sqrt())
        .collect();
    let mean = running.mean.values();
    let bt = beta.values();
    let out = input
        .values()
        .chunks(c)
        .flat_map(|row| (0..c).map(|ch| (row[ch] - mean[ch]) * scale[ch] + bt[ch]).collect::<Vec<_>>())
        .collect();
    Tensor::new(input.shape().to_vec(), out)
}

/// Mode-dispatching wrapper; the cache is present only in train mode.
pub fn batchnorm1d<T: Real>(
    input: &Tensor<T>,
    gamma: &Tensor<T>,
    beta: &Tensor<T>,
    running: &mut RunningStats<T>,
    mode: Mode,
) -> Result<(Tensor<T>, Option<BatchNormCache<T>>)> {
    match mode {
        Mode::Train => batchnorm1d_train(input, gamma, beta, running).map(|(y, c)| (y, Some(c))),
        Mode::Infer => batchnorm1d_infer(input, gamma, beta, running).map(|y| (y, None)),
    }
}

/// Returns `(grad_input, grad_gamma, grad_beta)` for a train-mode forward.
pub fn batchnorm1d_backward<T: Real>(
    grad_out: &Tensor<T>,
    cache: Option<&BatchNormCache<T>>,
    gamma: &Tensor<T>,
) -> Result<(Tensor<T>, Tensor<T>, Tensor<T>)> {
    let cache = cache.ok_or(Error::MissingCache { op: "batchnorm1d" })?;
    if grad_out.shape() != cache.shape.as_slice() {
        return Err(Error::shape("batchnorm1d backward", &cache.shape, grad_out.shape()));
    }
    let c = gamma.len();
    let dy = grad_out.values();
    let rows = dy.len() / c;
    let n = T::from_usize(rows).unwrap();

    let mut dgamma = vec![T::zero(); c];
    let mut dbeta = vec![T::zero(); c];
    for (drow, zrow) in dy.chunks(c).zip(cache.normalized.chunks(c)) {
        for ch in 0..c {
            dbeta[ch] = dbeta[ch] + drow[ch];
            dgamma[ch] = dgamma[ch] + drow[ch] * zrow[ch];
        }
    }

    // dx = gamma * inv_std / n * (n * dy - sum(dy) - z * sum(dy * z))
    let gm = gamma.values();
    let mut dx = Vec::with_capacity(dy.len());
    for (drow, zrow) in dy.chunks(c).zip(cache.normalized.chunks(c)) {
        for ch in 0..c {
            let k = gm[ch] * cache.inv_std[ch] / n;
            dx.push(k * (n * drow[ch] - dbeta[ch] - zrow[ch] * dgamma[ch]));
        }
    }

    Ok((
        Tensor::new(cache.shape.clone(), dx)?,
        Tensor::new(vec![c], dgamma)?,
        Tensor::new(vec![c], dbeta)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(c: usize) -> Tensor<f64> {
        Tensor::full(vec![c], 1.0)
    }

    #[test]
    fn standardized_input_passes_through() {
        // per channel mean 0, population variance 1
        let x = Tensor::new(vec![4, 2], vec![1.0, -1.0, -1.0, 1.0, 1.0, 1.0, -1.0, -1.0]).unwrap();
        let mut rs = RunningStats::new(2);
        let (y, _) = batchnorm1d_train(&x, &ones(2), &Tensor::zeros(vec![2]), &mut rs).unwrap();
        for (a, b) in y.values().iter().zip(x.values()) {
            assert!((a - b).abs() < 1e-4);
        }
    }

    #[test]
    fn constant_channel_maps_to_beta() {
        let x = Tensor::new(vec![3, 1], vec![7.0; 3]).unwrap();
        let beta = Tensor::new(vec![1], vec![0.25]).unwrap();
        let mut rs = RunningStats::new(1);
        let (y, _) = batchnorm1d_train(&x, &ones(1), &beta, &mut rs).unwrap();
        assert!(y.values().iter().all(|&v| v == 0.25));
    }

    #[test]
    fn running_stats_use_momentum() {
        let x = Tensor::new(vec![2, 1], vec![1.0, 3.0]).unwrap();
        let mut rs = RunningStats::new(1);
        batchnorm1d_train(&x, &ones(1), &Tensor::zeros(vec![1]), &mut rs).unwrap();
        assert!((rs.mean.values()[0] - 0.2).abs() < 1e-12);
        assert!((rs.var.values()[0] - (0.9 + 0.1)).abs() < 1e-12);
    }

    #[test]
    fn infer_is_repeatable() {
        let x = Tensor::new(vec![5, 2], (0..10).map(|v| v as f32 * 0.7).collect()).unwrap();
        let mut rs = RunningStats::<f32>::new(2);
        rs.mean.values_mut().copy_from_slice(&[0.3, -0.1]);
        let g = Tensor::full(vec![2], 1.5f32);
        let b = Tensor::full(vec![2], 0.1f32);
        let y1 = batchnorm1d_infer(&x, &g, &b, &rs).unwrap();
        let y2 = batchnorm1d_infer(&x, &g, &b, &rs).unwrap();
        assert_eq!(y1, y2);
    }

    #[test]
    fn backward_requires_cache() {
        let dy = Tensor::<f64>::zeros(vec![2, 1]);
        assert!(batchnorm1d_backward(&dy, None, &ones(1)).is_err());
    }
}
