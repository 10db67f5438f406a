use super::tensor::Real;
use crate::error::{Error, Result};

/// Predictions are clamped to `[BCE_EPSILON, 1 - BCE_EPSILON]`.
pub const BCE_EPSILON: f64 = 1e-7;

/// Mean binary cross-entropy over a batch and its gradient with respect to
/// each prediction.
pub fn bce_loss<T: Real>(predicted: &[T], target: &[T]) -> Result<(T, Vec<T>)> {
    if predicted.len() != target.len() || predicted.is_empty() {
        return Err(Error::shape("bce_loss", &[predicted.len()], &[target.len()]));
    }
    if let Some(bad) = target.iter().find(|&&y| y != T::zero() && y != T::one()) {
        return Err(Error::InvalidArgument(format!(
            "bce_loss: target must be 0 or 1, got {bad:?}"
        )));
    }
    let eps = T::of(BCE_EPSILON);
    let hi = T::one() - eps;
    let n = T::from_usize(predicted.len()).unwrap();
    let mut total = T::zero();
    let mut grad = Vec::with_capacity(predicted.len());
    for (&p, &y) in predicted.iter().zip(target) {
        let clamped = p.max(eps).min(hi);
        total = total - (y * clamped.ln() + (T::one() - y) * (T::one() - clamped).ln());
        // No gradient flows through the clamp.
        let g = if p < eps || p > hi {
            T::zero()
        } else {
            (clamped - y) / (clamped * (T::one() - clamped))
        };
        grad.push(g / n);
    }
    Ok((total / n, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_with_positive_target() {
        let (l, _) = bce_loss(&[0.5f64], &[1.0]).unwrap();
        assert!((l - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn clamp_boundary() {
        let (l, _) = bce_loss(&[1.0 - 1e-7f64], &[1.0]).unwrap();
        assert!((l - 1e-7).abs() < 1e-12, "{l}");
        let (l, _) = bce_loss(&[1.0f64], &[0.0]).unwrap();
        assert!(l.is_finite());
    }

    #[test]
    fn batch_mean() {
        let p1 = (-0.2f64).exp();
        let p2 = (-0.4f64).exp();
        let (l, _) = bce_loss(&[p1, p2], &[1.0, 1.0]).unwrap();
        assert!((l - 0.3).abs() < 1e-12);
    }

    #[test]
    fn target_must_be_binary() {
        assert!(bce_loss(&[0.5f64], &[0.5]).is_err());
        assert!(bce_loss(&[0.5f64], &[2.0]).is_err());
    }
}
