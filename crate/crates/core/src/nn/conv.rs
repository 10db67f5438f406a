//! 1-D convolution with zero "same" padding.
//!
//! Layouts are channels-last: inputs are `[time, channels]` or
//! `[batch, time, channels]`, filters are `[kernel, in_channels, out_channels]`.
//! For a kernel of length `k` the input is padded with `(k - 1) / 2` zeros on
//! the left and the remainder on the right, so the output keeps the input's
//! time extent.

use rayon::prelude::*;

use super::tensor::{btc, Real, Tensor};
use crate::error::{Error, Result};

/// Gradients of a convolution with respect to its input, filters and bias.
#[derive(Debug, Clone)]
pub struct Conv1dGrads<T> {
    pub input: Tensor<T>,
    pub filters: Tensor<T>,
    pub bias: Tensor<T>,
}

struct Geometry {
    batch: usize,
    time: usize,
    in_ch: usize,
    out_ch: usize,
    kernel: usize,
    left: usize,
}

fn geometry<T: Real>(input: &[usize], filters: &Tensor<T>) -> Result<Geometry> {
    let (batch, time, in_ch) = btc("conv1d", input)?;
    let [kernel, f_in, out_ch] = *filters.shape() else {
        return Err(Error::shape("conv1d filters", &[0, in_ch, 0], filters.shape()));
    };
    if f_in != in_ch {
        return Err(Error::ShapeMismatch {
            op: "conv1d: input channels vs filter channels",
            expected: input.to_vec(),
            actual: filters.shape().to_vec(),
        });
    }
    if kernel > time {
        return Err(Error::InvalidArgument(format!(
            "conv1d: kernel length {kernel} exceeds input length {time}"
        )));
    }
    Ok(Geometry {
        batch,
        time,
        in_ch,
        out_ch,
        kernel,
        left: (kernel - 1) / 2,
    })
}

/// Range of kernel taps `j` for which `t + j - left` lands inside `0..time`.
#[inline]
fn taps(t: usize, g: &Geometry) -> std::ops::Range<usize> {
    let lo = g.left.saturating_sub(t);
    let hi = (g.time + g.left - t).min(g.kernel);
    lo..hi
}

pub fn conv1d_forward<T: Real>(
    input: &Tensor<T>,
    filters: &Tensor<T>,
    bias: &Tensor<T>,
) -> Result<Tensor<T>> {
    let g = geometry(input.shape(), filters)?;
    if bias.shape() != [g.out_ch] {
        return Err(Error::shape("conv1d bias", &[g.out_ch], bias.shape()));
    }
    let w = filters.values();
    let b = bias.values();
    let sample_in = g.time * g.in_ch;
    let sample_out = g.time * g.out_ch;
    let mut out = vec![T::zero(); g.batch * sample_out];

    out.par_chunks_mut(sample_out)
        .zip(input.values().par_chunks(sample_in))
        .for_each(|(y, x)| {
            for t in 0..g.time {
                let row = &mut y[t * g.out_ch..(t + 1) * g.out_ch];
                row.copy_from_slice(b);
                for j in taps(t, &g) {
                    let src = t + j - g.left;
                    let xs = &x[src * g.in_ch..(src + 1) * g.in_ch];
                    let wj = &w[j * g.in_ch * g.out_ch..(j + 1) * g.in_ch * g.out_ch];
                    for (c, &xv) in xs.iter().enumerate() {
                        if xv == T::zero() {
                            continue;
                        }
                        let wc = &wj[c * g.out_ch..(c + 1) * g.out_ch];
                        for (o, &wv) in row.iter_mut().zip(wc) {
                            *o = *o + xv * wv;
                        }
                    }
                }
            }
        });

    let shape = input.shape().iter().take(input.shape().len() - 1).copied().chain([g.out_ch]).collect();
    Tensor::new(shape, out)
}

pub fn conv1d_backward<T: Real>(
    grad_out: &Tensor<T>,
    cached_input: Option<&Tensor<T>>,
    filters: &Tensor<T>,
) -> Result<Conv1dGrads<T>> {
    let input = cached_input.ok_or(Error::MissingCache { op: "conv1d" })?;
    let g = geometry(input.shape(), filters)?;
    let (gb, gt, go) = btc("conv1d backward", grad_out.shape())?;
    if (gb, gt, go) != (g.batch, g.time, g.out_ch) {
        return Err(Error::shape(
            "conv1d backward grad_out",
            &[g.batch, g.time, g.out_ch],
            grad_out.shape(),
        ));
    }
    let w = filters.values();
    let sample_in = g.time * g.in_ch;
    let sample_out = g.time * g.out_ch;
    let wlen = w.len();

    // Per-sample filter/bias gradients are reduced in batch order afterwards,
    // which keeps the sum independent of scheduling.
    let partials: Vec<(Vec<T>, Vec<T>, Vec<T>)> = input
        .values()
        .par_chunks(sample_in)
        .zip(grad_out.values().par_chunks(sample_out))
        .map(|(x, dy)| {
            let mut dx = vec![T::zero(); sample_in];
            let mut dw = vec![T::zero(); wlen];
            let mut db = vec![T::zero(); g.out_ch];
            for t in 0..g.time {
                let dyt = &dy[t * g.out_ch..(t + 1) * g.out_ch];
                for (acc, &d) in db.iter_mut().zip(dyt) {
                    *acc = *acc + d;
                }
                for j in taps(t, &g) {
                    let src = t + j - g.left;
                    let base = j * g.in_ch * g.out_ch;
                    for c in 0..g.in_ch {
                        let off = base + c * g.out_ch;
                        let wc = &w[off..off + g.out_ch];
                        let dwc = &mut dw[off..off + g.out_ch];
                        let xv = x[src * g.in_ch + c];
                        let mut s = T::zero();
                        for ((&wv, dwv), &d) in wc.iter().zip(dwc.iter_mut()).zip(dyt) {
                            s = s + wv * d;
                            *dwv = *dwv + xv * d;
                        }
                        dx[src * g.in_ch + c] = dx[src * g.in_ch + c] + s;
                    }
                }
            }
            (dx, dw, db)
        })
        .collect();

    let mut dx = Vec::with_capacity(g.batch * sample_in);
    let mut dw = vec![T::zero(); wlen];
    let mut db = vec![T::zero(); g.out_ch];
    for (px, pw, pb) in partials {
        dx.extend_from_slice(&px);
        dw.iter_mut().zip(&pw).for_each(|(a, &b)| *a = *a + b);
        db.iter_mut().zip(&pb).for_each(|(a, &b)| *a = *a + b);
    }

    Ok(Conv1dGrads {
        input: Tensor::new(input.shape().to_vec(), dx)?,
        filters: Tensor::new(filters.shape().to_vec(), dw)?,
        bias: Tensor::new(vec![g.out_ch], db)?,
    })
}
