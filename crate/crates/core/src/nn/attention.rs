//! Scaled dot-product attention over the time axis.

use super::{missing_forward_state, Layer, Mode, Param};
use crate::error::{Error, Result};
use crate::rng::StreamRng;
use crate::tensor::Tensor;

/// Parameter-free attention pooling: the final time step's hidden vector is
/// the query, every time step is a key and value. Scores are scaled by
/// 1/sqrt(hidden), softmaxed over time, and the output is the weighted
/// context vector (batch, hidden).
pub struct DotAttention {
    cache: Option<Cache>,
}

struct Cache {
    input: Tensor,
    weights: Vec<f64>, // (batch, time) softmax weights
}

impl DotAttention {
    pub fn new() -> Self {
        DotAttention { cache: None }
    }
}

impl Default for DotAttention {
    fn default() -> Self {
        Self::new()
    }
}

impl Layer for DotAttention {
    fn forward(&mut self, input: &Tensor, mode: Mode, _rng: &mut StreamRng) -> Result<Tensor> {
        let shape = input.shape();
        if shape.len() != 3 {
            return Err(Error::ShapeMismatch {
                expected: vec![0, 0, 0],
                actual: shape.to_vec(),
            });
        }
        let (batch, time, h) = (shape[0], shape[1], shape[2]);
        let scale = 1.0 / (h as f64).sqrt();
        let x = input.data();

        let mut weights = vec![0.0; batch * time];
        let mut out = Tensor::zeros(&[batch, h]);
        for bi in 0..batch {
            let q = &x[(bi * time + time - 1) * h..(bi * time + time) * h];
            let scores = &mut weights[bi * time..(bi + 1) * time];
            for t in 0..time {
                let key = &x[(bi * time + t) * h..(bi * time + t + 1) * h];
                scores[t] = q.iter().zip(key).map(|(a, b)| a * b).sum::<f64>() * scale;
            }
            let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for s in scores.iter_mut() {
                *s = (*s - max).exp();
                total += *s;
            }
            for s in scores.iter_mut() {
                *s /= total;
            }
            let ctx = &mut out.data_mut()[bi * h..(bi + 1) * h];
            for t in 0..time {
                let w = scores[t];
                let val = &x[(bi * time + t) * h..(bi * time + t + 1) * h];
                for (c, v) in ctx.iter_mut().zip(val) {
                    *c += w * v;
                }
            }
        }

        if mode == Mode::Train {
            self.cache = Some(Cache {
                input: input.clone(),
                weights,
            });
        } else {
            self.cache = None;
        }
        Ok(out)
    }

    fn backward(&mut self, upstream: &Tensor) -> Result<Tensor> {
        let cache = self.cache.take().ok_or_else(|| missing_forward_state("attention"))?;
        let shape = cache.input.shape();
        let (batch, time, h) = (shape[0], shape[1], shape[2]);
        upstream.require_shape(&[batch, h])?;
        let scale = 1.0 / (h as f64).sqrt();
        let x = cache.input.data();

        let mut dx = Tensor::zeros(shape);
        for bi in 0..batch {
            let dout = &upstream.data()[bi * h..(bi + 1) * h];
            let alpha = &cache.weights[bi * time..(bi + 1) * time];
            let q = &x[(bi * time + time - 1) * h..(bi * time + time) * h];

            // value path and raw score gradients
            let mut dalpha = vec![0.0; time];
            for t in 0..time {
                let val = &x[(bi * time + t) * h..(bi * time + t + 1) * h];
                dalpha[t] = dout.iter().zip(val).map(|(a, b)| a * b).sum();
                let dst = &mut dx.data_mut()[(bi * time + t) * h..(bi * time + t + 1) * h];
                for (d, u) in dst.iter_mut().zip(dout) {
                    *d += alpha[t] * u;
                }
            }
            // softmax backward: ds_t = alpha_t (dalpha_t - sum_u alpha_u dalpha_u)
            let inner: f64 = alpha.iter().zip(&dalpha).map(|(a, d)| a * d).sum();
            let ds: Vec<f64> = alpha
                .iter()
                .zip(&dalpha)
                .map(|(a, d)| a * (d - inner))
                .collect();
            // score paths: s_t = scale * q . x_t, with q = x_{T-1}
            let mut dq = vec![0.0; h];
            for t in 0..time {
                let key = &x[(bi * time + t) * h..(bi * time + t + 1) * h];
                let dst_base = (bi * time + t) * h;
                for u in 0..h {
                    dx.data_mut()[dst_base + u] += ds[t] * scale * q[u];
                    dq[u] += ds[t] * scale * key[u];
                }
            }
            let last = (bi * time + time - 1) * h;
            for u in 0..h {
                dx.data_mut()[last + u] += dq[u];
            }
        }
        Ok(dx)
    }

    fn params(&self) -> Vec<&Param> {
        Vec::new()
    }

    fn params_mut(&mut self) -> Vec<&mut Param> {
        Vec::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn output_is_a_context_vector() {
        let mut att = DotAttention::new();
        let mut rng = rng::stream(2, 0, 0);
        let x = Tensor::from_vec(
            &[2, 3, 2],
            (0..12).map(|i| (i as f64 * 0.37).sin()).collect(),
        )
        .unwrap();
        let y = att.forward(&x, Mode::Infer, &mut rng).unwrap();
        assert_eq!(y.shape(), &[2, 2]);
    }

    #[test]
    fn constant_sequence_returns_the_constant() {
        // identical steps get uniform weights, so the context equals any step
        let mut att = DotAttention::new();
        let mut rng = rng::stream(2, 0, 0);
        let x = Tensor::from_vec(&[1, 4, 2], vec![[0.3, -0.7]; 4].concat()).unwrap();
        let y = att.forward(&x, Mode::Infer, &mut rng).unwrap();
        assert!((y.data()[0] - 0.3).abs() < 1e-12);
        assert!((y.data()[1] + 0.7).abs() < 1e-12);
    }
}
