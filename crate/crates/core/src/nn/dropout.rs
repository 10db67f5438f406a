use rand::Rng;

use super::batchnorm::Mode;
use super::tensor::{Real, Tensor};
use crate::error::{Error, Result};

/// Inverted dropout. Returns the output and, in train mode with a positive
/// rate, the per-element multiplier (0 or `1 / (1 - rate)`) for backward.
pub fn dropout_forward<T: Real, R: Rng + ?Sized>(
    input: &Tensor<T>,
    rate: f64,
    mode: Mode,
    rng: &mut R,
) -> Result<(Tensor<T>, Option<Vec<T>>)> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::InvalidArgument(format!(
            "dropout rate must lie in [0, 1), got {rate}"
        )));
    }
    if mode == Mode::Infer || rate == 0.0 {
        return Ok((input.clone(), None));
    }
    let keep = T::of(1.0 / (1.0 - rate));
    let mask: Vec<T> = (0..input.len())
        .map(|_| if rng.random::<f64>() < rate { T::zero() } else { keep })
        .collect();
    let out = input.values().iter().zip(&mask).map(|(&x, &m)| x * m).collect();
    Ok((Tensor::new(input.shape().to_vec(), out)?, Some(mask)))
}

pub fn dropout_backward<T: Real>(grad_out: &Tensor<T>, mask: Option<&[T]>) -> Result<Tensor<T>> {
    match mask {
        None => Ok(grad_out.clone()),
        Some(m) if m.len() == grad_out.len() => Tensor::new(
            grad_out.shape().to_vec(),
            grad_out.values().iter().zip(m).map(|(&g, &k)| g * k).collect(),
        ),
        Some(m) => Err(Error::shape("dropout backward", &[m.len()], grad_out.shape())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample() -> Tensor<f32> {
        Tensor::new(vec![50, 2], (0..100).map(|v| v as f32 * 0.1 - 3.0).collect()).unwrap()
    }

    #[test]
    fn zero_rate_is_identity() {
        let x = sample();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (y, mask) = dropout_forward(&x, 0.0, Mode::Train, &mut rng).unwrap();
        assert_eq!(y, x);
        assert!(mask.is_none());
    }

    #[test]
    fn infer_is_identity() {
        let x = sample();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (y, _) = dropout_forward(&x, 0.5, Mode::Infer, &mut rng).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn rate_one_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(dropout_forward(&sample(), 1.0, Mode::Train, &mut rng).is_err());
        assert!(dropout_forward(&sample(), -0.1, Mode::Train, &mut rng).is_err());
    }

    #[test]
    fn survival_fraction_concentrates() {
        // Binomial(1e5, 0.5) has standard deviation 0.0016 in fraction terms.
        let x = Tensor::<f32>::full(vec![100_000], 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let (y, _) = dropout_forward(&x, 0.5, Mode::Train, &mut rng).unwrap();
        let alive = y.values().iter().filter(|&&v| v != 0.0).count() as f64 / 1e5;
        assert!((alive - 0.5).abs() < 0.01, "{alive}");
        assert!(y.values().iter().all(|&v| v == 0.0 || v == 2.0));
    }

    #[test]
    fn preserves_expectation() {
        let x = Tensor::new(vec![4], vec![1.0f64, -2.0, 0.5, 3.0]).unwrap();
        let mut sums = [0.0f64; 4];
        let trials = 10_000;
        for seed in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (y, _) = dropout_forward(&x, 0.3, Mode::Train, &mut rng).unwrap();
            sums.iter_mut().zip(y.values()).for_each(|(s, v)| *s += v);
        }
        for (s, &v) in sums.iter().zip(x.values()) {
            let mean = s / trials as f64;
            assert!((mean - v).abs() <= 0.02 * v.abs(), "{mean} vs {v}");
        }
    }
}
