//! Recurrent layers: LSTM and GRU cells unrolled over the time axis, plus a
//! bidirectional wrapper. Inputs are (batch, time, features); outputs keep
//! the full sequence (batch, time, hidden). Backward runs reverse-mode
//! accumulation through time.

use super::{missing_forward_state, Layer, Mode, Param};
use crate::error::{Error, Result};
use crate::rng::StreamRng;
use crate::tensor::{gemm_nn, gemm_nt, gemm_tn, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecurrentKind {
    Lstm,
    Gru,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn check_rank3(input: &Tensor, in_features: usize) -> Result<(usize, usize)> {
    let shape = input.shape();
    if shape.len() != 3 || shape[2] != in_features {
        return Err(Error::ShapeMismatch {
            expected: vec![0, 0, in_features],
            actual: shape.to_vec(),
        });
    }
    Ok((shape[0], shape[1]))
}

/// Copy timestep `t` of a (batch, time, f) tensor into a (batch, f) scratch.
fn gather_step(data: &[f64], batch: usize, time: usize, f: usize, t: usize, out: &mut [f64]) {
    for bi in 0..batch {
        let src = (bi * time + t) * f;
        out[bi * f..(bi + 1) * f].copy_from_slice(&data[src..src + f]);
    }
}

fn scatter_step(data: &mut [f64], batch: usize, time: usize, f: usize, t: usize, src: &[f64]) {
    for bi in 0..batch {
        let dst = (bi * time + t) * f;
        data[dst..dst + f].copy_from_slice(&src[bi * f..(bi + 1) * f]);
    }
}

// ---------------------------------------------------------------------------
// LSTM
// ---------------------------------------------------------------------------

/// Gate order inside the packed 4h-wide weight matrices: input, forget,
/// candidate, output.
///
/// i = sigm(x Wx_i + h Wh_i + b_i)        f = sigm(x Wx_f + h Wh_f + b_f)
/// g = tanh(x Wx_g + h Wh_g + b_g)        o = sigm(x Wx_o + h Wh_o + b_o)
/// c_t = f*c_{t-1} + i*g                  h_t = o * tanh(c_t)
pub struct LstmCell {
    in_features: usize,
    hidden: usize,
    wx: Param,
    wh: Param,
    b: Param,
    cache: Option<LstmCache>,
}

struct LstmStep {
    i: Vec<f64>,
    f: Vec<f64>,
    g: Vec<f64>,
    o: Vec<f64>,
    c: Vec<f64>,
    tanh_c: Vec<f64>,
}

struct LstmCache {
    input: Tensor,
    steps: Vec<LstmStep>,
    /// h_{-1}..h_{T-1}: the hidden state *entering* each step.
    h_prev: Vec<Vec<f64>>,
}

impl LstmCell {
    pub fn new(in_features: usize, hidden: usize) -> Self {
        LstmCell {
            in_features,
            hidden,
            wx: Param::new("wx", &[in_features, 4 * hidden], in_features),
            wh: Param::new("wh", &[hidden, 4 * hidden], hidden),
            b: Param::new("b", &[4 * hidden], 0),
            cache: None,
        }
    }

    pub fn hidden_units(&self) -> usize {
        self.hidden
    }
}

impl Layer for LstmCell {
    fn forward(&mut self, input: &Tensor, mode: Mode, _rng: &mut StreamRng) -> Result<Tensor> {
        let (batch, time) = check_rank3(input, self.in_features)?;
        let (h, f_in) = (self.hidden, self.in_features);
        let g4 = 4 * h;

        let mut out = Tensor::zeros(&[batch, time, h]);
        let mut steps = Vec::with_capacity(time);
        let mut h_prev_all = Vec::with_capacity(time);
        let mut h_state = vec![0.0; batch * h];
        let mut c_state = vec![0.0; batch * h];
        let mut x_t = vec![0.0; batch * f_in];
        let mut z = vec![0.0; batch * g4];

        for t in 0..time {
            gather_step(input.data(), batch, time, f_in, t, &mut x_t);
            gemm_nn(false, batch, f_in, g4, &x_t, self.wx.value.data(), &mut z);
            gemm_nn(true, batch, h, g4, &h_state, self.wh.value.data(), &mut z);
            for bi in 0..batch {
                for (zv, bv) in z[bi * g4..(bi + 1) * g4].iter_mut().zip(self.b.value.data()) {
                    *zv += bv;
                }
            }

            let mut step = LstmStep {
                i: vec![0.0; batch * h],
                f: vec![0.0; batch * h],
                g: vec![0.0; batch * h],
                o: vec![0.0; batch * h],
                c: vec![0.0; batch * h],
                tanh_c: vec![0.0; batch * h],
            };
            for bi in 0..batch {
                for u in 0..h {
                    let base = bi * g4;
                    let k = bi * h + u;
                    let iv = sigmoid(z[base + u]);
                    let fv = sigmoid(z[base + h + u]);
                    let gv = z[base + 2 * h + u].tanh();
                    let ov = sigmoid(z[base + 3 * h + u]);
                    let cv = fv * c_state[k] + iv * gv;
                    let tc = cv.tanh();
                    step.i[k] = iv;
                    step.f[k] = fv;
                    step.g[k] = gv;
                    step.o[k] = ov;
                    step.c[k] = cv;
                    step.tanh_c[k] = tc;
                }
            }
            h_prev_all.push(h_state.clone());
            for bi in 0..batch {
                for u in 0..h {
                    let k = bi * h + u;
                    c_state[k] = step.c[k];
                    h_state[k] = step.o[k] * step.tanh_c[k];
                }
            }
            scatter_step(out.data_mut(), batch, time, h, t, &h_state);
            steps.push(step);
        }

        if mode == Mode::Train {
            self.cache = Some(LstmCache {
                input: input.clone(),
                steps,
                h_prev: h_prev_all,
            });
        } else {
            self.cache = None;
        }
        Ok(out)
    }

    fn backward(&mut self, upstream: &Tensor) -> Result<Tensor> {
        let cache = self.cache.take().ok_or_else(|| missing_forward_state("lstm"))?;
        let (batch, time) = check_rank3(&cache.input, self.in_features)?;
        upstream.require_shape(&[batch, time, self.hidden])?;
        let (h, f_in) = (self.hidden, self.in_features);
        let g4 = 4 * h;

        let mut dx = Tensor::zeros(cache.input.shape());
        let mut dh_carry = vec![0.0; batch * h];
        let mut dc_carry = vec![0.0; batch * h];
        let mut x_t = vec![0.0; batch * f_in];
        let mut up_t = vec![0.0; batch * h];
        let mut dz = vec![0.0; batch * g4];
        let mut dx_t = vec![0.0; batch * f_in];

        for t in (0..time).rev() {
            gather_step(upstream.data(), batch, time, h, t, &mut up_t);
            let step = &cache.steps[t];
            for bi in 0..batch {
                for u in 0..h {
                    let k = bi * h + u;
                    let dh = up_t[k] + dh_carry[k];
                    let tc = step.tanh_c[k];
                    let do_ = dh * tc;
                    let dc = dh * step.o[k] * (1.0 - tc * tc) + dc_carry[k];
                    let c_prev = if t == 0 { 0.0 } else { cache.steps[t - 1].c[k] };
                    let di = dc * step.g[k];
                    let dg = dc * step.i[k];
                    let df = dc * c_prev;
                    dc_carry[k] = dc * step.f[k];

                    let base = bi * g4;
                    dz[base + u] = di * step.i[k] * (1.0 - step.i[k]);
                    dz[base + h + u] = df * step.f[k] * (1.0 - step.f[k]);
                    dz[base + 2 * h + u] = dg * (1.0 - step.g[k] * step.g[k]);
                    dz[base + 3 * h + u] = do_ * step.o[k] * (1.0 - step.o[k]);
                }
            }

            gather_step(cache.input.data(), batch, time, f_in, t, &mut x_t);
            gemm_tn(true, batch, f_in, g4, &x_t, &dz, self.wx.grad.data_mut());
            gemm_tn(true, batch, h, g4, &cache.h_prev[t], &dz, self.wh.grad.data_mut());
            for bi in 0..batch {
                for (gb, d) in self.b.grad.data_mut().iter_mut().zip(&dz[bi * g4..(bi + 1) * g4]) {
                    *gb += d;
                }
            }
            gemm_nt(false, batch, f_in, g4, &dz, self.wx.value.data(), &mut dx_t);
            scatter_step(dx.data_mut(), batch, time, f_in, t, &dx_t);
            gemm_nt(false, batch, h, g4, &dz, self.wh.value.data(), &mut dh_carry);
        }
        Ok(dx)
    }

    fn params(&self) -> Vec<&Param> {
        vec![&self.wx, &self.wh, &self.b]
    }

    fn params_mut(&mut self) -> Vec<&mut Param> {
        vec![&mut self.wx, &mut self.wh, &mut self.b]
    }
}

// ---------------------------------------------------------------------------
// GRU
// ---------------------------------------------------------------------------

/// Classic GRU with the reset gate applied to the previous hidden state
/// before the candidate matmul:
///
/// r = sigm(x Wx_r + h Wh_r + b_r)        z = sigm(x Wx_z + h Wh_z + b_z)
/// n = tanh(x Wx_n + (r*h) Wh_n + b_n)    h_t = (1-z)*n + z*h_{t-1}
///
/// Packed layouts: `wx` is (in, 3h) with column blocks [r|z|n], `wh_rz` is
/// (h, 2h) with [r|z], `wh_n` is (h, h).
pub struct GruCell {
    in_features: usize,
    hidden: usize,
    wx: Param,
    wh_rz: Param,
    wh_n: Param,
    b: Param,
    cache: Option<GruCache>,
}

struct GruStep {
    r: Vec<f64>,
    z: Vec<f64>,
    n: Vec<f64>,
    rh: Vec<f64>,
}

struct GruCache {
    input: Tensor,
    steps: Vec<GruStep>,
    h_prev: Vec<Vec<f64>>,
}

impl GruCell {
    pub fn new(in_features: usize, hidden: usize) -> Self {
        GruCell {
            in_features,
            hidden,
            wx: Param::new("wx", &[in_features, 3 * hidden], in_features),
            wh_rz: Param::new("wh_rz", &[hidden, 2 * hidden], hidden),
            wh_n: Param::new("wh_n", &[hidden, hidden], hidden),
            b: Param::new("b", &[3 * hidden], 0),
            cache: None,
        }
    }

    pub fn hidden_units(&self) -> usize {
        self.hidden
    }
}

impl Layer for GruCell {
    fn forward(&mut self, input: &Tensor, mode: Mode, _rng: &mut StreamRng) -> Result<Tensor> {
        let (batch, time) = check_rank3(input, self.in_features)?;
        let (h, f_in) = (self.hidden, self.in_features);
        let g3 = 3 * h;
        let g2 = 2 * h;

        let mut out = Tensor::zeros(&[batch, time, h]);
        let mut steps = Vec::with_capacity(time);
        let mut h_prev_all = Vec::with_capacity(time);
        let mut h_state = vec![0.0; batch * h];
        let mut x_t = vec![0.0; batch * f_in];
        let mut zx = vec![0.0; batch * g3];
        let mut zh = vec![0.0; batch * g2];
        let mut zn_h = vec![0.0; batch * h];

        for t in 0..time {
            gather_step(input.data(), batch, time, f_in, t, &mut x_t);
            gemm_nn(false, batch, f_in, g3, &x_t, self.wx.value.data(), &mut zx);
            gemm_nn(false, batch, h, g2, &h_state, self.wh_rz.value.data(), &mut zh);

            let mut step = GruStep {
                r: vec![0.0; batch * h],
                z: vec![0.0; batch * h],
                n: vec![0.0; batch * h],
                rh: vec![0.0; batch * h],
            };
            let b = self.b.value.data();
            for bi in 0..batch {
                for u in 0..h {
                    let k = bi * h + u;
                    let rv = sigmoid(zx[bi * g3 + u] + zh[bi * g2 + u] + b[u]);
                    let zv = sigmoid(zx[bi * g3 + h + u] + zh[bi * g2 + h + u] + b[h + u]);
                    step.r[k] = rv;
                    step.z[k] = zv;
                    step.rh[k] = rv * h_state[k];
                }
            }
            gemm_nn(false, batch, h, h, &step.rh, self.wh_n.value.data(), &mut zn_h);
            for bi in 0..batch {
                for u in 0..h {
                    let k = bi * h + u;
                    step.n[k] = (zx[bi * g3 + 2 * h + u] + zn_h[k] + b[2 * h + u]).tanh();
                }
            }
            h_prev_all.push(h_state.clone());
            for k in 0..batch * h {
                h_state[k] = (1.0 - step.z[k]) * step.n[k] + step.z[k] * h_state[k];
            }
            scatter_step(out.data_mut(), batch, time, h, t, &h_state);
            steps.push(step);
        }

        if mode == Mode::Train {
            self.cache = Some(GruCache {
                input: input.clone(),
                steps,
                h_prev: h_prev_all,
            });
        } else {
            self.cache = None;
        }
        Ok(out)
    }

    fn backward(&mut self, upstream: &Tensor) -> Result<Tensor> {
        let cache = self.cache.take().ok_or_else(|| missing_forward_state("gru"))?;
        let (batch, time) = check_rank3(&cache.input, self.in_features)?;
        upstream.require_shape(&[batch, time, self.hidden])?;
        let (h, f_in) = (self.hidden, self.in_features);
        let g3 = 3 * h;
        let g2 = 2 * h;

        let mut dx = Tensor::zeros(cache.input.shape());
        let mut dh_carry = vec![0.0; batch * h];
        let mut x_t = vec![0.0; batch * f_in];
        let mut up_t = vec![0.0; batch * h];
        let mut dz_all = vec![0.0; batch * g3];
        let mut dz_rz = vec![0.0; batch * g2];
        let mut dzn = vec![0.0; batch * h];
        let mut drh = vec![0.0; batch * h];
        let mut dx_t = vec![0.0; batch * f_in];
        let mut dh_from_rz = vec![0.0; batch * h];

        for t in (0..time).rev() {
            gather_step(upstream.data(), batch, time, h, t, &mut up_t);
            let step = &cache.steps[t];
            let h_prev = &cache.h_prev[t];

            for k in 0..batch * h {
                let dh = up_t[k] + dh_carry[k];
                let dz_gate = dh * (h_prev[k] - step.n[k]);
                let dn = dh * (1.0 - step.z[k]);
                dh_carry[k] = dh * step.z[k];
                dzn[k] = dn * (1.0 - step.n[k] * step.n[k]);
                // stash the raw z-gate grad; sigmoid derivative applied below
                drh[k] = dz_gate;
            }
            // n-candidate path: gradients through wh_n
            gemm_tn(true, batch, h, h, &step.rh, &dzn, self.wh_n.grad.data_mut());
            let mut drh_in = vec![0.0; batch * h];
            gemm_nt(false, batch, h, h, &dzn, self.wh_n.value.data(), &mut drh_in);

            for bi in 0..batch {
                for u in 0..h {
                    let k = bi * h + u;
                    let dr = drh_in[k] * h_prev[k];
                    dh_carry[k] += drh_in[k] * step.r[k];
                    let dzr = dr * step.r[k] * (1.0 - step.r[k]);
                    let dzz = drh[k] * step.z[k] * (1.0 - step.z[k]);
                    dz_rz[bi * g2 + u] = dzr;
                    dz_rz[bi * g2 + h + u] = dzz;
                    dz_all[bi * g3 + u] = dzr;
                    dz_all[bi * g3 + h + u] = dzz;
                    dz_all[bi * g3 + 2 * h + u] = dzn[k];
                }
            }

            gather_step(cache.input.data(), batch, time, f_in, t, &mut x_t);
            gemm_tn(true, batch, f_in, g3, &x_t, &dz_all, self.wx.grad.data_mut());
            gemm_tn(true, batch, h, g2, h_prev, &dz_rz, self.wh_rz.grad.data_mut());
            {
                let gb = self.b.grad.data_mut();
                for bi in 0..batch {
                    for u in 0..g3 {
                        gb[u] += dz_all[bi * g3 + u];
                    }
                }
            }
            gemm_nt(false, batch, f_in, g3, &dz_all, self.wx.value.data(), &mut dx_t);
            scatter_step(dx.data_mut(), batch, time, f_in, t, &dx_t);
            gemm_nt(false, batch, h, g2, &dz_rz, self.wh_rz.value.data(), &mut dh_from_rz);
            for k in 0..batch * h {
                dh_carry[k] += dh_from_rz[k];
            }
        }
        Ok(dx)
    }

    fn params(&self) -> Vec<&Param> {
        vec![&self.wx, &self.wh_rz, &self.wh_n, &self.b]
    }

    fn params_mut(&mut self) -> Vec<&mut Param> {
        vec![&mut self.wx, &mut self.wh_rz, &mut self.wh_n, &mut self.b]
    }
}

// ---------------------------------------------------------------------------
// Bidirectional wrapper
// ---------------------------------------------------------------------------

/// Runs one recurrent layer forward in time and a second over the reversed
/// sequence, then concatenates per-time-step outputs: (batch, time, 2h).
pub struct Bidirectional {
    forward_layer: Box<dyn Layer>,
    backward_layer: Box<dyn Layer>,
    hidden: usize,
}

impl Bidirectional {
    pub fn new(kind: RecurrentKind, in_features: usize, hidden: usize) -> Self {
        let make = |_: usize| -> Box<dyn Layer> {
            match kind {
                RecurrentKind::Lstm => Box::new(LstmCell::new(in_features, hidden)),
                RecurrentKind::Gru => Box::new(GruCell::new(in_features, hidden)),
            }
        };
        Bidirectional {
            forward_layer: make(0),
            backward_layer: make(1),
            hidden,
        }
    }

    pub fn forward_cell(&self) -> &dyn Layer {
        self.forward_layer.as_ref()
    }

    pub fn forward_cell_mut(&mut self) -> &mut dyn Layer {
        self.forward_layer.as_mut()
    }
}

impl Layer for Bidirectional {
    fn forward(&mut self, input: &Tensor, mode: Mode, rng: &mut StreamRng) -> Result<Tensor> {
        let shape = input.shape();
        if shape.len() != 3 {
            return Err(Error::ShapeMismatch {
                expected: vec![0, 0, 0],
                actual: shape.to_vec(),
            });
        }
        let (batch, time) = (shape[0], shape[1]);
        let h = self.hidden;

        let out_f = self.forward_layer.forward(input, mode, rng)?;
        let reversed = input.reverse_time()?;
        let out_b = self.backward_layer.forward(&reversed, mode, rng)?.reverse_time()?;

        let mut out = Tensor::zeros(&[batch, time, 2 * h]);
        for bi in 0..batch {
            for t in 0..time {
                let dst = (bi * time + t) * 2 * h;
                let src = (bi * time + t) * h;
                out.data_mut()[dst..dst + h].copy_from_slice(&out_f.data()[src..src + h]);
                out.data_mut()[dst + h..dst + 2 * h].copy_from_slice(&out_b.data()[src..src + h]);
            }
        }
        Ok(out)
    }

    fn backward(&mut self, upstream: &Tensor) -> Result<Tensor> {
        let shape = upstream.shape();
        if shape.len() != 3 || shape[2] != 2 * self.hidden {
            return Err(Error::ShapeMismatch {
                expected: vec![0, 0, 2 * self.hidden],
                actual: shape.to_vec(),
            });
        }
        let (batch, time, h) = (shape[0], shape[1], self.hidden);

        let mut up_f = Tensor::zeros(&[batch, time, h]);
        let mut up_b = Tensor::zeros(&[batch, time, h]);
        for bi in 0..batch {
            for t in 0..time {
                let src = (bi * time + t) * 2 * h;
                let dst = (bi * time + t) * h;
                up_f.data_mut()[dst..dst + h].copy_from_slice(&upstream.data()[src..src + h]);
                up_b.data_mut()[dst..dst + h]
                    .copy_from_slice(&upstream.data()[src + h..src + 2 * h]);
            }
        }

        let dx_f = self.forward_layer.backward(&up_f)?;
        let dx_b = self
            .backward_layer
            .backward(&up_b.reverse_time()?)?
            .reverse_time()?;

        let mut dx = dx_f;
        for (a, b) in dx.data_mut().iter_mut().zip(dx_b.data()) {
            *a += b;
        }
        Ok(dx)
    }

    fn params(&self) -> Vec<&Param> {
        let mut p = self.forward_layer.params();
        p.extend(self.backward_layer.params());
        p
    }

    fn params_mut(&mut self) -> Vec<&mut Param> {
        let mut p = self.forward_layer.params_mut();
        p.extend(self.backward_layer.params_mut());
        p
    }
}
