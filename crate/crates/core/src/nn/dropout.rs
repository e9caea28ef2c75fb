//! Inverted dropout: surviving units are scaled by 1/keep so inference is
//! the identity.

use super::{missing_forward_state, Layer, Mode, Param};
use crate::error::Result;
use crate::rng::StreamRng;
use crate::tensor::Tensor;

pub struct Dropout {
    rate: f64,
    cache: Option<Tensor>,
}

impl Dropout {
    pub fn new(rate: f64) -> Self {
        assert!((0.0..1.0).contains(&rate), "dropout rate must lie in [0, 1)");
        Dropout { rate, cache: None }
    }
}

impl Layer for Dropout {
    fn forward(&mut self, input: &Tensor, mode: Mode, rng: &mut StreamRng) -> Result<Tensor> {
        if mode == Mode::Infer || self.rate == 0.0 {
            self.cache = None;
            return Ok(input.clone());
        }
        let keep = 1.0 - self.rate;
        let mut mask = Tensor::zeros(input.shape());
        for m in mask.data_mut() {
            *m = if crate::rng::uniform01(rng) < keep {
                1.0 / keep
            } else {
                0.0
            };
        }
        let out: Vec<f64> = input.data().iter().zip(mask.data()).map(|(x, m)| x * m).collect();
        let out = Tensor::from_vec(input.shape(), out)?;
        self.cache = Some(mask);
        Ok(out)
    }

    fn backward(&mut self, upstream: &Tensor) -> Result<Tensor> {
        let mask = self.cache.take().ok_or_else(|| missing_forward_state("dropout"))?;
        upstream.require_shape(mask.shape())?;
        let data: Vec<f64> = upstream.data().iter().zip(mask.data()).map(|(u, m)| u * m).collect();
        Tensor::from_vec(mask.shape(), data)
    }

    fn params(&self) -> Vec<&Param> {
        Vec::new()
    }

    fn params_mut(&mut self) -> Vec<&mut Param> {
        Vec::new()
    }
}
