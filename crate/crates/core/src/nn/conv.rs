//! 1-D convolution over the time axis with zero same-padding.

use super::{missing_forward_state, Activation, Layer, Mode, Param};
use crate::error::{Error, Result};
use crate::rng::StreamRng;
use crate::tensor::{gemm_nn, gemm_nt, gemm_tn, Tensor};

/// Input (batch, time, in_ch) -> output (batch, time, out_ch); the time axis
/// length is preserved exactly. Implemented as im2col followed by a single
/// matmul with the (kernel*in_ch, out_ch) weight matrix.
pub struct Conv1d {
    in_channels: usize,
    out_channels: usize,
    kernel: usize,
    activation: Activation,
    w: Param,
    b: Param,
    cache: Option<Cache>,
}

struct Cache {
    cols: Vec<f64>,
    preact: Vec<f64>,
    batch: usize,
    time: usize,
}

impl Conv1d {
    pub fn new(in_channels: usize, out_channels: usize, kernel: usize, activation: Activation) -> Self {
        assert!(kernel % 2 == 1, "kernel size must be odd for same padding");
        Conv1d {
            in_channels,
            out_channels,
            kernel,
            activation,
            w: Param::new("w", &[kernel * in_channels, out_channels], kernel * in_channels),
            b: Param::new("b", &[out_channels], 0),
            cache: None,
        }
    }

    fn im2col(&self, input: &Tensor, batch: usize, time: usize) -> Vec<f64> {
        let (ci, k) = (self.in_channels, self.kernel);
        let pad = k / 2;
        let mut cols = vec![0.0; batch * time * k * ci];
        for bi in 0..batch {
            for t in 0..time {
                let row = (bi * time + t) * k * ci;
                for dk in 0..k {
                    let src_t = t as isize + dk as isize - pad as isize;
                    if src_t < 0 || src_t >= time as isize {
                        continue;
                    }
                    let src = (bi * time + src_t as usize) * ci;
                    cols[row + dk * ci..row + (dk + 1) * ci]
                        .copy_from_slice(&input.data()[src..src + ci]);
                }
            }
        }
        cols
    }
}

impl Layer for Conv1d {
    fn forward(&mut self, input: &Tensor, mode: Mode, _rng: &mut StreamRng) -> Result<Tensor> {
        let shape = input.shape();
        if shape.len() != 3 || shape[2] != self.in_channels {
            return Err(Error::ShapeMismatch {
                expected: vec![0, 0, self.in_channels],
                actual: shape.to_vec(),
            });
        }
        let (batch, time) = (shape[0], shape[1]);
        let (kc, co) = (self.kernel * self.in_channels, self.out_channels);
        let rows = batch * time;

        let cols = self.im2col(input, batch, time);
        let mut pre = vec![0.0; rows * co];
        gemm_nn(false, rows, kc, co, &cols, self.w.value.data(), &mut pre);
        for r in 0..rows {
            for (p, bv) in pre[r * co..(r + 1) * co].iter_mut().zip(self.b.value.data()) {
                *p += bv;
            }
        }
        let out_data: Vec<f64> = pre.iter().map(|&p| self.activation.apply(p)).collect();

        if mode == Mode::Train {
            self.cache = Some(Cache {
                cols,
                preact: pre,
                batch,
                time,
            });
        } else {
            self.cache = None;
        }
        Tensor::from_vec(&[batch, time, co], out_data)
    }

    fn backward(&mut self, upstream: &Tensor) -> Result<Tensor> {
        let cache = self.cache.take().ok_or_else(|| missing_forward_state("conv1d"))?;
        let (batch, time) = (cache.batch, cache.time);
        upstream.require_shape(&[batch, time, self.out_channels])?;
        let (ci, k, co) = (self.in_channels, self.kernel, self.out_channels);
        let kc = k * ci;
        let rows = batch * time;
        let pad = k / 2;

        let dpre: Vec<f64> = upstream
            .data()
            .iter()
            .zip(&cache.preact)
            .map(|(&u, &p)| u * self.activation.grad(p))
            .collect();

        gemm_tn(true, rows, kc, co, &cache.cols, &dpre, self.w.grad.data_mut());
        for r in 0..rows {
            for (g, d) in self.b.grad.data_mut().iter_mut().zip(&dpre[r * co..(r + 1) * co]) {
                *g += d;
            }
        }

        // col2im: scatter column gradients back onto input positions.
        let mut dcols = vec![0.0; rows * kc];
        gemm_nt(false, rows, kc, co, &dpre, self.w.value.data(), &mut dcols);
        let mut dx = Tensor::zeros(&[batch, time, ci]);
        for bi in 0..batch {
            for t in 0..time {
                let row = (bi * time + t) * kc;
                for dk in 0..k {
                    let src_t = t as isize + dk as isize - pad as isize;
                    if src_t < 0 || src_t >= time as isize {
                        continue;
                    }
                    let dst = (bi * time + src_t as usize) * ci;
                    for c in 0..ci {
                        dx.data_mut()[dst + c] += dcols[row + dk * ci + c];
                    }
                }
            }
        }
        Ok(dx)
    }

    fn params(&self) -> Vec<&Param> {
        vec![&self.w, &self.b]
    }

    fn params_mut(&mut self) -> Vec<&mut Param> {
        vec![&mut self.w, &mut self.b]
    }
}
