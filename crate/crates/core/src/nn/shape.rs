//! Parameter-free glue layers used when composing the forecasting
//! architectures: last-step selection, context repetition, and trailing-axis
//! squeeze.

use super::{missing_forward_state, Layer, Mode, Param};
use crate::error::{Error, Result};
use crate::rng::StreamRng;
use crate::tensor::Tensor;

/// (batch, time, f) -> (batch, f), keeping the final time step.
pub struct LastStep {
    cache: Option<(usize, usize, usize)>,
}

impl LastStep {
    pub fn new() -> Self {
        LastStep { cache: None }
    }
}

impl Default for LastStep {
    fn default() -> Self {
        Self::new()
    }
}

impl Layer for LastStep {
    fn forward(&mut self, input: &Tensor, mode: Mode, _rng: &mut StreamRng) -> Result<Tensor> {
        let shape = input.shape();
        if shape.len() != 3 {
            return Err(Error::ShapeMismatch {
                expected: vec![0, 0, 0],
                actual: shape.to_vec(),
            });
        }
        let (batch, time, f) = (shape[0], shape[1], shape[2]);
        let mut out = Tensor::zeros(&[batch, f]);
        for bi in 0..batch {
            let src = (bi * time + time - 1) * f;
            out.data_mut()[bi * f..(bi + 1) * f].copy_from_slice(&input.data()[src..src + f]);
        }
        self.cache = if mode == Mode::Train {
            Some((batch, time, f))
        } else {
            None
        };
        Ok(out)
    }

    fn backward(&mut self, upstream: &Tensor) -> Result<Tensor> {
        let (batch, time, f) = self.cache.take().ok_or_else(|| missing_forward_state("last_step"))?;
        upstream.require_shape(&[batch, f])?;
        let mut dx = Tensor::zeros(&[batch, time, f]);
        for bi in 0..batch {
            let dst = (bi * time + time - 1) * f;
            dx.data_mut()[dst..dst + f].copy_from_slice(&upstream.data()[bi * f..(bi + 1) * f]);
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

/// (batch, f) -> (batch, steps, f), tiling the vector over a new time axis.
pub struct RepeatVector {
    steps: usize,
    cache: Option<(usize, usize)>,
}

impl RepeatVector {
    pub fn new(steps: usize) -> Self {
        assert!(steps >= 1);
        RepeatVector { steps, cache: None }
    }
}

impl Layer for RepeatVector {
    fn forward(&mut self, input: &Tensor, mode: Mode, _rng: &mut StreamRng) -> Result<Tensor> {
        let shape = input.shape();
        if shape.len() != 2 {
            return Err(Error::ShapeMismatch {
                expected: vec![0, 0],
                actual: shape.to_vec(),
            });
        }
        let (batch, f) = (shape[0], shape[1]);
        let mut out = Tensor::zeros(&[batch, self.steps, f]);
        for bi in 0..batch {
            let src = &input.data()[bi * f..(bi + 1) * f];
            for t in 0..self.steps {
                let dst = (bi * self.steps + t) * f;
                out.data_mut()[dst..dst + f].copy_from_slice(src);
            }
        }
        self.cache = if mode == Mode::Train { Some((batch, f)) } else { None };
        Ok(out)
    }

    fn backward(&mut self, upstream: &Tensor) -> Result<Tensor> {
        let (batch, f) = self.cache.take().ok_or_else(|| missing_forward_state("repeat_vector"))?;
        upstream.require_shape(&[batch, self.steps, f])?;
        let mut dx = Tensor::zeros(&[batch, f]);
        for bi in 0..batch {
            for t in 0..self.steps {
                let src = (bi * self.steps + t) * f;
                for u in 0..f {
                    dx.data_mut()[bi * f + u] += upstream.data()[src + u];
                }
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

/// (batch, time, 1) -> (batch, time).
pub struct SqueezeLast {
    cache: Option<(usize, usize)>,
}

impl SqueezeLast {
    pub fn new() -> Self {
        SqueezeLast { cache: None }
    }
}

impl Default for SqueezeLast {
    fn default() -> Self {
        Self::new()
    }
}

impl Layer for SqueezeLast {
    fn forward(&mut self, input: &Tensor, mode: Mode, _rng: &mut StreamRng) -> Result<Tensor> {
        let shape = input.shape();
        if shape.len() != 3 || shape[2] != 1 {
            return Err(Error::ShapeMismatch {
                expected: vec![0, 0, 1],
                actual: shape.to_vec(),
            });
        }
        let (batch, time) = (shape[0], shape[1]);
        self.cache = if mode == Mode::Train { Some((batch, time)) } else { None };
        Tensor::from_vec(&[batch, time], input.data().to_vec())
    }

    fn backward(&mut self, upstream: &Tensor) -> Result<Tensor> {
        let (batch, time) = self.cache.take().ok_or_else(|| missing_forward_state("squeeze"))?;
        upstream.require_shape(&[batch, time])?;
        Tensor::from_vec(&[batch, time, 1], upstream.data().to_vec())
    }

    fn params(&self) -> Vec<&Param> {
        Vec::new()
    }

    fn params_mut(&mut self) -> Vec<&mut Param> {
        Vec::new()
    }
}
