//! Dense row-major tensor of 64-bit reals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; shape.iter().product()],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(Error::invalid_argument(format!(
                "shape {shape:?} needs {expected} values, got {}",
                data.len()
            )));
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn filled(shape: &[usize], value: f64) -> Self {
        Tensor {
            shape: shape.to_vec(),
            data: vec![value; shape.iter().product()],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn fill(&mut self, value: f64) {
        self.data.iter_mut().for_each(|v| *v = value);
    }

    pub fn at2(&self, i: usize, j: usize) -> f64 {
        debug_assert_eq!(self.rank(), 2);
        self.data[i * self.shape[1] + j]
    }

    pub fn at3(&self, i: usize, j: usize, k: usize) -> f64 {
        debug_assert_eq!(self.rank(), 3);
        self.data[(i * self.shape[1] + j) * self.shape[2] + k]
    }

    pub fn set3(&mut self, i: usize, j: usize, k: usize, v: f64) {
        debug_assert_eq!(self.rank(), 3);
        let idx = (i * self.shape[1] + j) * self.shape[2] + k;
        self.data[idx] = v;
    }

    pub fn same_shape(&self, other: &Tensor) -> bool {
        self.shape == other.shape
    }

    pub fn require_shape(&self, expected: &[usize]) -> Result<()> {
        if self.shape != expected {
            return Err(Error::ShapeMismatch {
                expected: expected.to_vec(),
                actual: self.shape.clone(),
            });
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Reverse the middle (time) axis of a rank-3 tensor.
    pub fn reverse_time(&self) -> Result<Tensor> {
        if self.rank() != 3 {
            return Err(Error::invalid_argument(format!(
                "reverse_time expects rank-3 input, got shape {:?}",
                self.shape
            )));
        }
        let (b, t, f) = (self.shape[0], self.shape[1], self.shape[2]);
        let mut out = Tensor::zeros(&self.shape);
        for bi in 0..b {
            for ti in 0..t {
                let src = (bi * t + ti) * f;
                let dst = (bi * t + (t - 1 - ti)) * f;
                out.data[dst..dst + f].copy_from_slice(&self.data[src..src + f]);
            }
        }
        Ok(out)
    }

    /// Select rows `indices` along the leading axis.
    pub fn gather_rows(&self, indices: &[usize]) -> Result<Tensor> {
        if self.rank() == 0 || self.shape[0] == 0 {
            return Err(Error::invalid_argument("gather_rows on empty tensor"));
        }
        let row: usize = self.shape[1..].iter().product();
        let mut shape = self.shape.clone();
        shape[0] = indices.len();
        let mut data = Vec::with_capacity(indices.len() * row);
        for &i in indices {
            if i >= self.shape[0] {
                return Err(Error::invalid_argument(format!(
                    "row {i} out of range {}",
                    self.shape[0]
                )));
            }
            data.extend_from_slice(&self.data[i * row..(i + 1) * row]);
        }
        Tensor::from_vec(&shape, data)
    }

    /// Contiguous row range `[start, end)` along the leading axis.
    pub fn slice_rows(&self, start: usize, end: usize) -> Result<Tensor> {
        if start > end || end > self.shape[0] {
            return Err(Error::invalid_argument(format!(
                "row range {start}..{end} out of bounds 0..{}",
                self.shape[0]
            )));
        }
        let row: usize = self.shape[1..].iter().product();
        let mut shape = self.shape.clone();
        shape[0] = end - start;
        Tensor::from_vec(&shape, self.data[start * row..end * row].to_vec())
    }
}

/// Row-block size: a block of C rows stays cache-resident while the large
/// operand streams through once.
const GEMM_ROW_BLOCK: usize = 32;

/// `c[m x n] (+)= a[m x k] * b[k x n]`; `accumulate = false` overwrites `c`.
///
/// B is the big operand at the shapes the recurrent layers produce, so the
/// loop keeps a block of C rows hot and walks B exactly once per block.
pub fn gemm_nn(accumulate: bool, m: usize, k: usize, n: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    if !accumulate {
        c.iter_mut().for_each(|v| *v = 0.0);
    }
    let mut i0 = 0;
    while i0 < m {
        let i1 = (i0 + GEMM_ROW_BLOCK).min(m);
        for p in 0..k {
            let brow = &b[p * n..(p + 1) * n];
            for i in i0..i1 {
                let av = a[i * k + p];
                if av == 0.0 {
                    continue;
                }
                let crow = &mut c[i * n..(i + 1) * n];
                for (cv, bv) in crow.iter_mut().zip(brow) {
                    *cv += av * bv;
                }
            }
        }
        i0 = i1;
    }
}

/// `c[k x n] (+)= a^T * b` with `a[m x k]`, `b[m x n]`.
///
/// C (the weight-gradient matrix) is the big operand; process it in column
/// panels so each panel is written once while A and B stay in cache.
pub fn gemm_tn(accumulate: bool, m: usize, k: usize, n: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), m * n);
    debug_assert_eq!(c.len(), k * n);
    if !accumulate {
        c.iter_mut().for_each(|v| *v = 0.0);
    }
    const PANEL: usize = 512;
    let mut j0 = 0;
    while j0 < n {
        let j1 = (j0 + PANEL).min(n);
        for i in 0..m {
            let bpan = &b[i * n + j0..i * n + j1];
            for p in 0..k {
                let av = a[i * k + p];
                if av == 0.0 {
                    continue;
                }
                let cpan = &mut c[p * n + j0..p * n + j1];
                for (cv, bv) in cpan.iter_mut().zip(bpan) {
                    *cv += av * bv;
                }
            }
        }
        j0 = j1;
    }
}

/// `c[m x k] (+)= a * b^T` with `a[m x n]`, `b[k x n]`.
///
/// B is the big operand; stream each of its rows once against every cached
/// A row.
pub fn gemm_nt(accumulate: bool, m: usize, k: usize, n: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    debug_assert_eq!(a.len(), m * n);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * k);
    if !accumulate {
        c.iter_mut().for_each(|v| *v = 0.0);
    }
    let mut i0 = 0;
    while i0 < m {
        let i1 = (i0 + GEMM_ROW_BLOCK).min(m);
        for p in 0..k {
            let brow = &b[p * n..(p + 1) * n];
            for i in i0..i1 {
                let arow = &a[i * n..(i + 1) * n];
                let dot: f64 = arow.iter().zip(brow).map(|(x, y)| x * y).sum();
                c[i * k + p] += dot;
            }
        }
        i0 = i1;
    }
}
