//! Elementwise activations, the absolute difference and the dense layer.

use super::tensor::{Real, Tensor};
use crate::error::{Error, Result};

fn map<T: Real>(x: &Tensor<T>, f: impl Fn(T) -> T) -> Tensor<T> {
    Tensor::new(x.shape().to_vec(), x.values().iter().map(|&v| f(v)).collect())
        .expect("same shape")
}

fn same_shape<T: Real>(op: &'static str, a: &Tensor<T>, b: &Tensor<T>) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::shape(op, a.shape(), b.shape()));
    }
    Ok(())
}

pub fn relu<T: Real>(x: &Tensor<T>) -> Tensor<T> {
    map(x, |v| if v > T::zero() { v } else { T::zero() })
}

/// Subgradient at zero is taken as zero.
pub fn relu_backward<T: Real>(grad_out: &Tensor<T>, input: &Tensor<T>) -> Result<Tensor<T>> {
    same_shape("relu backward", input, grad_out)?;
    Tensor::new(
        input.shape().to_vec(),
        grad_out
            .values()
            .iter()
            .zip(input.values())
            .map(|(&g, &x)| if x > T::zero() { g } else { T::zero() })
            .collect(),
    )
}

#[inline]
pub fn sigmoid_scalar<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

pub fn sigmoid<T: Real>(x: &Tensor<T>) -> Tensor<T> {
    map(x, sigmoid_scalar)
}

/// Backward through the sigmoid given its forward *output*.
pub fn sigmoid_backward<T: Real>(grad_out: &Tensor<T>, output: &Tensor<T>) -> Result<Tensor<T>> {
    same_shape("sigmoid backward", output, grad_out)?;
    Tensor::new(
        output.shape().to_vec(),
        grad_out
            .values()
            .iter()
            .zip(output.values())
            .map(|(&g, &s)| g * s * (T::one() - s))
            .collect(),
    )
}

pub fn abs_diff<T: Real>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    same_shape("abs_diff", a, b)?;
    Tensor::new(
        a.shape().to_vec(),
        a.values().iter().zip(b.values()).map(|(&x, &y)| (x - y).abs()).collect(),
    )
}

/// Gradients of `|a - b|` with respect to `a` and `b`. The subgradient at
/// `a == b` is zero.
pub fn abs_diff_backward<T: Real>(
    grad_out: &Tensor<T>,
    a: &Tensor<T>,
    b: &Tensor<T>,
) -> Result<(Tensor<T>, Tensor<T>)> {
    same_shape("abs_diff backward", a, b)?;
    same_shape("abs_diff backward", a, grad_out)?;
    let da: Vec<T> = grad_out
        .values()
        .iter()
        .zip(a.values().iter().zip(b.values()))
        .map(|(&g, (&x, &y))| {
            if x > y {
                g
            } else if x < y {
                -g
            } else {
                T::zero()
            }
        })
        .collect();
    let db = da.iter().map(|&v| -v).collect();
    Ok((
        Tensor::new(a.shape().to_vec(), da)?,
        Tensor::new(a.shape().to_vec(), db)?,
    ))
}

/// `x · W + b` for a batch `x` of shape `[batch, in]`, weights `[in, out]`
/// and bias `[out]`. A rank-1 `x` is treated as a batch of one.
pub fn dense<T: Real>(x: &Tensor<T>, weight: &Tensor<T>, bias: &Tensor<T>) -> Result<Tensor<T>> {
    let (rows, inp) = rows_cols(x)?;
    let [w_in, out] = *weight.shape() else {
        return Err(Error::shape("dense weight", &[inp, 0], weight.shape()));
    };
    if w_in != inp {
        return Err(Error::shape("dense: input vs weight", x.shape(), weight.shape()));
    }
    if bias.shape() != [out] {
        return Err(Error::shape("dense bias", &[out], bias.shape()));
    }
    let w = weight.values();
    let mut y = Vec::with_capacity(rows * out);
    for row in x.values().chunks(inp) {
        for o in 0..out {
            let mut acc = bias.values()[o];
            for (i, &xv) in row.iter().enumerate() {
                acc = acc + xv * w[i * out + o];
            }
            y.push(acc);
        }
    }
    let shape = if x.shape().len() == 1 { vec![out] } else { vec![rows, out] };
    Tensor::new(shape, y)
}

/// Returns `(grad_x, grad_weight, grad_bias)`.
pub fn dense_backward<T: Real>(
    grad_out: &Tensor<T>,
    x: &Tensor<T>,
    weight: &Tensor<T>,
) -> Result<(Tensor<T>, Tensor<T>, Tensor<T>)> {
    let (rows, inp) = rows_cols(x)?;
    let out = weight.shape().get(1).copied().unwrap_or(0);
    if weight.shape() != [inp, out] || grad_out.len() != rows * out {
        return Err(Error::shape("dense backward", &[rows, out], grad_out.shape()));
    }
    let w = weight.values();
    let mut dx = Vec::with_capacity(rows * inp);
    let mut dw = vec![T::zero(); inp * out];
    let mut db = vec![T::zero(); out];
    for (row, g) in x.values().chunks(inp).zip(grad_out.values().chunks(out)) {
        for i in 0..inp {
            let mut s = T::zero();
            for o in 0..out {
                s = s + w[i * out + o] * g[o];
                dw[i * out + o] = dw[i * out + o] + row[i] * g[o];
            }
            dx.push(s);
        }
        db.iter_mut().zip(g).for_each(|(a, &v)| *a = *a + v);
    }
    Ok((
        Tensor::new(x.shape().to_vec(), dx)?,
        Tensor::new(vec![inp, out], dw)?,
        Tensor::new(vec![out], db)?,
    ))
}

fn rows_cols<T: Real>(x: &Tensor<T>) -> Result<(usize, usize)> {
    match *x.shape() {
        [n] => Ok((1, n)),
        [r, n] => Ok((r, n)),
        _ => Err(Error::shape("dense input", &[0, 0], x.shape())),
    }
}
