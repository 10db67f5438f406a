use super::tensor::{btc, like_btc, Real, Tensor};
use crate::error::{Error, Result};

/// Forward result of a max-pool: pooled values plus the flat input index of
/// each window's maximum.
#[derive(Debug, Clone)]
pub struct MaxPoolOutput<T> {
    pub output: Tensor<T>,
    pub argmax: Vec<usize>,
    pub input_shape: Vec<usize>,
}

/// Non-overlapping max-pool along time; trailing timesteps that do not fill a
/// window are dropped. Ties pick the earliest index.
pub fn maxpool1d_forward<T: Real>(input: &Tensor<T>, size: usize) -> Result<MaxPoolOutput<T>> {
    let (b, t, c) = btc("maxpool1d", input.shape())?;
    if size == 0 {
        return Err(Error::InvalidArgument("maxpool1d: size must be at least 1".into()));
    }
    if size > t {
        return Err(Error::InvalidArgument(format!(
            "maxpool1d: window {size} exceeds input length {t}"
        )));
    }
    let out_t = t / size;
    let x = input.values();
    let mut out = Vec::with_capacity(b * out_t * c);
    let mut argmax = Vec::with_capacity(b * out_t * c);
    for s in 0..b {
        for w in 0..out_t {
            for ch in 0..c {
                let mut best = s * t * c + (w * size) * c + ch;
                for k in 1..size {
                    let idx = s * t * c + (w * size + k) * c + ch;
                    if x[idx] > x[best] {
                        best = idx;
                    }
                }
                out.push(x[best]);
                argmax.push(best);
            }
        }
    }
    Ok(MaxPoolOutput {
        output: Tensor::new(like_btc(input.shape(), b, out_t, c), out)?,
        argmax,
        input_shape: input.shape().to_vec(),
    })
}

/// Routes each upstream gradient to the position that won its window.
pub fn maxpool1d_backward<T: Real>(
    grad_out: &Tensor<T>,
    argmax: &[usize],
    input_shape: &[usize],
) -> Result<Tensor<T>> {
    if grad_out.len() != argmax.len() {
        return Err(Error::shape("maxpool1d backward", &[argmax.len()], grad_out.shape()));
    }
    let mut dx = Tensor::zeros(input_shape.to_vec());
    let d = dx.values_mut();
    for (&i, &g) in argmax.iter().zip(grad_out.values()) {
        d[i] = d[i] + g;
    }
    Ok(dx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_max() {
        let x = Tensor::new(vec![6, 1], vec![1.0f32, 3.0, 2.0, 5.0, 4.0, 6.0]).unwrap();
        let p = maxpool1d_forward(&x, 3).unwrap();
        assert_eq!(p.output.values(), &[3.0, 6.0]);
        assert_eq!(p.argmax, vec![1, 5]);
    }

    #[test]
    fn remainder_dropped() {
        let x = Tensor::<f32>::zeros(vec![187, 4]);
        assert_eq!(maxpool1d_forward(&x, 3).unwrap().output.shape(), &[62, 4]);
        let x = Tensor::<f32>::zeros(vec![2, 187, 4]);
        assert_eq!(maxpool1d_forward(&x, 3).unwrap().output.shape(), &[2, 62, 4]);
    }

    #[test]
    fn window_larger_than_input() {
        let x = Tensor::<f32>::zeros(vec![187, 1]);
        assert!(maxpool1d_forward(&x, 200).is_err());
        assert!(maxpool1d_forward(&x, 0).is_err());
    }

    #[test]
    fn backward_routes_to_winner() {
        let x = Tensor::new(vec![4, 1], vec![0.0f64, 2.0, 5.0, 1.0]).unwrap();
        let p = maxpool1d_forward(&x, 2).unwrap();
        let dy = Tensor::new(vec![2, 1], vec![10.0, 20.0]).unwrap();
        let dx = maxpool1d_backward(&dy, &p.argmax, &p.input_shape).unwrap();
        assert_eq!(dx.values(), &[0.0, 10.0, 20.0, 0.0]);
    }
}
