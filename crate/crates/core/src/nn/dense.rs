//! Fully connected layer applied along the trailing feature axis.

use super::{missing_forward_state, Activation, Layer, Mode, Param};
use crate::error::Result;
use crate::rng::StreamRng;
use crate::tensor::{gemm_nn, gemm_nt, gemm_tn, Tensor};

/// `y = act(x W + b)`. Leading axes are flattened, so the same layer serves
/// (batch, in) heads and per-time-step (batch, time, in) heads.
pub struct Dense {
    in_features: usize,
    out_features: usize,
    activation: Activation,
    w: Param,
    b: Param,
    cache: Option<Cache>,
}

struct Cache {
    input: Tensor,
    preact: Vec<f64>,
    rows: usize,
}

impl Dense {
    pub fn new(in_features: usize, out_features: usize, activation: Activation) -> Self {
        Dense {
            in_features,
            out_features,
            activation,
            w: Param::new("w", &[in_features, out_features], in_features),
            b: Param::new("b", &[out_features], 0),
            cache: None,
        }
    }
}

impl Layer for Dense {
    fn forward(&mut self, input: &Tensor, mode: Mode, _rng: &mut StreamRng) -> Result<Tensor> {
        let shape = input.shape();
        if shape.is_empty() || *shape.last().unwrap() != self.in_features {
            return Err(crate::error::Error::ShapeMismatch {
                expected: vec![self.in_features],
                actual: shape.to_vec(),
            });
        }
        let rows: usize = shape[..shape.len() - 1].iter().product();
        let (n_in, n_out) = (self.in_features, self.out_features);

        let mut pre = vec![0.0; rows * n_out];
        gemm_nn(false, rows, n_in, n_out, input.data(), self.w.value.data(), &mut pre);
        for r in 0..rows {
            for (p, bias) in pre[r * n_out..(r + 1) * n_out].iter_mut().zip(self.b.value.data()) {
                *p += bias;
            }
        }
        let mut out_shape = shape.to_vec();
        *out_shape.last_mut().unwrap() = n_out;
        let out_data: Vec<f64> = pre.iter().map(|&p| self.activation.apply(p)).collect();

        if mode == Mode::Train {
            self.cache = Some(Cache {
                input: input.clone(),
                preact: pre,
                rows,
            });
        } else {
            self.cache = None;
        }
        Tensor::from_vec(&out_shape, out_data)
    }

    fn backward(&mut self, upstream: &Tensor) -> Result<Tensor> {
        let cache = self.cache.take().ok_or_else(|| missing_forward_state("dense"))?;
        let (rows, n_in, n_out) = (cache.rows, self.in_features, self.out_features);
        let mut dpre: Vec<f64> = upstream
            .data()
            .iter()
            .zip(&cache.preact)
            .map(|(&u, &p)| u * self.activation.grad(p))
            .collect();
        debug_assert_eq!(dpre.len(), rows * n_out);

        gemm_tn(true, rows, n_in, n_out, cache.input.data(), &dpre, self.w.grad.data_mut());
        for r in 0..rows {
            for (g, d) in self.b.grad.data_mut().iter_mut().zip(&dpre[r * n_out..(r + 1) * n_out]) {
                *g += d;
            }
        }
        let mut dx = Tensor::zeros(cache.input.shape());
        gemm_nt(false, rows, n_in, n_out, &dpre, self.w.value.data(), dx.data_mut());
        dpre.clear();
        Ok(dx)
    }

    fn params(&self) -> Vec<&Param> {
        vec![&self.w, &self.b]
    }

    fn params_mut(&mut self) -> Vec<&mut Param> {
        vec![&mut self.w, &mut self.b]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn test_rng() -> StreamRng {
        rng::stream(1, rng::tags::TRAIN_INIT, 0)
    }

    #[test]
    fn linear_dense_matches_hand_computation() {
        let mut layer = Dense::new(2, 1, Activation::Linear);
        layer.w.value = Tensor::from_vec(&[2, 1], vec![2.0, -1.0]).unwrap();
        layer.b.value = Tensor::from_vec(&[1], vec![0.5]).unwrap();
        let x = Tensor::from_vec(&[2, 2], vec![1.0, 1.0, 3.0, 0.0]).unwrap();
        let y = layer.forward(&x, Mode::Infer, &mut test_rng()).unwrap();
        assert_eq!(y.data(), &[1.5, 6.5]);
    }

    #[test]
    fn relu_zeroes_negative_preactivations() {
        let mut layer = Dense::new(1, 1, Activation::Relu);
        layer.w.value = Tensor::from_vec(&[1, 1], vec![1.0]).unwrap();
        let x = Tensor::from_vec(&[2, 1], vec![-3.0, 4.0]).unwrap();
        let y = layer.forward(&x, Mode::Infer, &mut test_rng()).unwrap();
        assert_eq!(y.data(), &[0.0, 4.0]);
    }

    #[test]
    fn applies_along_trailing_axis_of_rank3_input() {
        let mut layer = Dense::new(2, 3, Activation::Linear);
        let x = Tensor::zeros(&[2, 5, 2]);
        let y = layer.forward(&x, Mode::Infer, &mut test_rng()).unwrap();
        assert_eq!(y.shape(), &[2, 5, 3]);
    }

    #[test]
    fn backward_without_forward_is_invalid_state() {
        let mut layer = Dense::new(2, 1, Activation::Linear);
        assert!(layer.backward(&Tensor::zeros(&[1, 1])).is_err());
    }

    #[test]
    fn single_linear_unit_gradient_closed_form() {
        // Loss = mean((w x + b - y)^2): dL/dw = 2 (w x + b - y) x / n.
        let mut layer = Dense::new(1, 1, Activation::Linear);
        layer.w.value = Tensor::from_vec(&[1, 1], vec![0.7]).unwrap();
        layer.b.value = Tensor::from_vec(&[1], vec![0.2]).unwrap();
        let x = Tensor::from_vec(&[2, 1], vec![1.5, -0.5]).unwrap();
        let target = [1.0, 0.0];

        let y = layer.forward(&x, Mode::Train, &mut test_rng()).unwrap();
        let n = 2.0;
        let dloss: Vec<f64> = y
            .data()
            .iter()
            .zip(target)
            .map(|(&p, t)| 2.0 * (p - t) / n)
            .collect();
        layer
            .backward(&Tensor::from_vec(&[2, 1], dloss).unwrap())
            .unwrap();

        let expected_dw: f64 = x
            .data()
            .iter()
            .zip(target)
            .map(|(&xi, t)| 2.0 * (0.7 * xi + 0.2 - t) * xi / n)
            .sum();
        assert!((layer.w.grad.data()[0] - expected_dw).abs() < 1e-12);
    }
}
