use rayon::prelude::*;

use super::kernels::{axpy, dot, ROW_CHUNK, SAMPLE_CHUNK};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::Scalar;

/// Input gradient (when requested), weight gradient, bias gradient.
type ParamGrads<S> = (Option<Vec<S>>, Vec<S>, Vec<S>);

/// Valid 1D convolution summing over all input channels.
///
/// `weight` is laid out `[out][tap][in]`, so the filter of one output channel
/// lines up with a contiguous input window.
#[derive(Clone, Debug, PartialEq)]
pub struct Conv1d<S> {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub weight: Vec<S>,
    pub bias: Vec<S>,
}

impl<S: Scalar> Conv1d<S> {
    pub fn zeros(in_channels: usize, out_channels: usize, kernel: usize, stride: usize) -> Self {
        Self {
            in_channels,
            out_channels,
            kernel,
            stride,
            weight: vec![S::zero(); out_channels * kernel * in_channels],
            bias: vec![S::zero(); out_channels],
        }
    }

    fn window(&self) -> usize {
        self.kernel * self.in_channels
    }

    pub fn out_len(&self, in_len: usize) -> Result<usize> {
        if self.kernel == 0 || self.stride == 0 {
            return Err(Error::invalid("convolution kernel and stride must be positive"));
        }
        if in_len < self.kernel {
            return Err(Error::invalid(format!("input length {in_len} shorter than kernel {}", self.kernel)));
        }
        if !(in_len - self.kernel).is_multiple_of(self.stride) {
            return Err(Error::invalid(format!(
                "input length {in_len} does not tile with kernel {} stride {}",
                self.kernel, self.stride
            )));
        }
        Ok((in_len - self.kernel) / self.stride + 1)
    }

    pub(crate) fn forward_batch(&self, x: &[S], batch: usize, in_len: usize) -> Result<Vec<S>> {
        let out_len = self.out_len(in_len)?;
        let (cin, cout, win) = (self.in_channels, self.out_channels, self.window());
        if x.len() != batch * in_len * cin {
            return Err(Error::invalid("convolution input size mismatch"));
        }
        let mut y = vec![S::zero(); batch * out_len * cout];
        y.par_chunks_mut(out_len * cout)
            .zip(x.par_chunks(in_len * cin))
            .for_each(|(ys, xs)| {
                for p in 0..out_len {
                    let start = p * self.stride * cin;
                    let xw = &xs[start..start + win];
                    let row = &mut ys[p * cout..(p + 1) * cout];
                    for (o, out) in row.iter_mut().enumerate() {
                        *out = self.bias[o] + dot(&self.weight[o * win..(o + 1) * win], xw);
                    }
                }
            });
        Ok(y)
    }

    /// Returns `(dx, dw, db)`; `dx` is skipped when not needed.
    pub(crate) fn backward_batch(
        &self,
        x: &[S],
        dy: &[S],
        batch: usize,
        in_len: usize,
        need_dx: bool,
    ) -> Result<ParamGrads<S>> {
        let out_len = self.out_len(in_len)?;
        let (cin, cout, win) = (self.in_channels, self.out_channels, self.window());
        if dy.len() != batch * out_len * cout || x.len() != batch * in_len * cin {
            return Err(Error::invalid("convolution gradient size mismatch"));
        }
        let partials: Vec<(Vec<S>, Vec<S>)> = x
            .par_chunks(SAMPLE_CHUNK * in_len * cin)
            .zip(dy.par_chunks(SAMPLE_CHUNK * out_len * cout))
            .map(|(xc, dyc)| {
                let mut dw = vec![S::zero(); self.weight.len()];
                let mut db = vec![S::zero(); cout];
                for (xs, dys) in xc.chunks(in_len * cin).zip(dyc.chunks(out_len * cout)) {
                    for p in 0..out_len {
                        let start = p * self.stride * cin;
                        let xw = &xs[start..start + win];
                        for o in 0..cout {
                            let g = dys[p * cout + o];
                            if g != S::zero() {
                                axpy(g, xw, &mut dw[o * win..(o + 1) * win]);
                                db[o] += g;
                            }
                        }
                    }
                }
                (dw, db)
            })
            .collect();
        let mut dw = vec![S::zero(); self.weight.len()];
        let mut db = vec![S::zero(); cout];
        for (pw, pb) in &partials {
            axpy(S::one(), pw, &mut dw);
            axpy(S::one(), pb, &mut db);
        }
        let dx = need_dx.then(|| {
            let mut dx = vec![S::zero(); batch * in_len * cin];
            dx.par_chunks_mut(in_len * cin)
                .zip(dy.par_chunks(out_len * cout))
                .for_each(|(dxs, dys)| {
                    for p in 0..out_len {
                        let start = p * self.stride * cin;
                        let dxw = &mut dxs[start..start + win];
                        for o in 0..cout {
                            let g = dys[p * cout + o];
                            if g != S::zero() {
                                axpy(g, &self.weight[o * win..(o + 1) * win], dxw);
                            }
                        }
                    }
                });
            dx
        });
        Ok((dx, dw, db))
    }

    pub fn forward(&self, x: &Tensor<S>) -> Result<Tensor<S>> {
        self.check_channels(x)?;
        let y = self.forward_batch(x.data(), 1, x.len())?;
        Tensor::new(self.out_len(x.len())?, self.out_channels, y)
    }

    /// Gradients with respect to the input, the weights and the biases.
    pub fn backward(&self, x: &Tensor<S>, grad_out: &Tensor<S>) -> Result<(Tensor<S>, Vec<S>, Vec<S>)> {
        self.check_channels(x)?;
        if grad_out.shape() != (self.out_len(x.len())?, self.out_channels) {
            return Err(Error::invalid("convolution output gradient has the wrong shape"));
        }
        let (dx, dw, db) = self.backward_batch(x.data(), grad_out.data(), 1, x.len(), true)?;
        let dx = dx.expect("requested");
        Ok((Tensor::new(x.len(), self.in_channels, dx)?, dw, db))
    }

    fn check_channels(&self, x: &Tensor<S>) -> Result<()> {
        if x.channels() != self.in_channels {
            return Err(Error::invalid(format!(
                "convolution expects {} channels, got {}",
                self.in_channels,
                x.channels()
            )));
        }
        Ok(())
    }
}

/// Max pooling along positions, per channel. Output length uses floor, so a
/// trailing partial window is dropped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MaxPool1d {
    pub window: usize,
    pub stride: usize,
}

impl MaxPool1d {
    pub fn new(window: usize, stride: usize) -> Self {
        Self { window, stride }
    }

    pub fn out_len(&self, in_len: usize) -> Result<usize> {
        if self.window == 0 || self.stride == 0 {
            return Err(Error::invalid("pooling window and stride must be positive"));
        }
        if in_len < self.window {
            return Err(Error::invalid(format!("input length {in_len} shorter than pool window {}", self.window)));
        }
        Ok((in_len - self.window) / self.stride + 1)
    }

    /// Pooled values and, per output, the flat input index it came from.
    /// Ties go to the earliest position.
    pub(crate) fn forward_batch<S: Scalar>(
        &self,
        x: &[S],
        batch: usize,
        in_len: usize,
        channels: usize,
    ) -> Result<(Vec<S>, Vec<u32>)> {
        let out_len = self.out_len(in_len)?;
        if x.len() != batch * in_len * channels {
            return Err(Error::invalid("pooling input size mismatch"));
        }
        let mut y = vec![S::zero(); batch * out_len * channels];
        let mut arg = vec![0u32; batch * out_len * channels];
        y.par_chunks_mut(out_len * channels)
            .zip(arg.par_chunks_mut(out_len * channels))
            .zip(x.par_chunks(in_len * channels))
            .for_each(|((ys, args), xs)| {
                for p in 0..out_len {
                    let base = p * self.stride;
                    for c in 0..channels {
                        let mut best = base * channels + c;
                        for k in 1..self.window {
                            let idx = (base + k) * channels + c;
                            if xs[idx] > xs[best] {
                                best = idx;
                            }
                        }
                        ys[p * channels + c] = xs[best];
                        args[p * channels + c] = best as u32;
                    }
                }
            });
        Ok((y, arg))
    }

    pub(crate) fn backward_batch<S: Scalar>(
        &self,
        dy: &[S],
        arg: &[u32],
        batch: usize,
        in_len: usize,
        channels: usize,
    ) -> Vec<S> {
        let per_out = dy.len() / batch.max(1);
        let mut dx = vec![S::zero(); batch * in_len * channels];
        dx.par_chunks_mut(in_len * channels)
            .zip(dy.par_chunks(per_out.max(1)))
            .zip(arg.par_chunks(per_out.max(1)))
            .for_each(|((dxs, dys), args)| {
                for (g, &a) in dys.iter().zip(args) {
                    dxs[a as usize] += *g;
                }
            });
        dx
    }

    pub fn forward<S: Scalar>(&self, x: &Tensor<S>) -> Result<Tensor<S>> {
        let (y, _) = self.forward_batch(x.data(), 1, x.len(), x.channels())?;
        Tensor::new(self.out_len(x.len())?, x.channels(), y)
    }

    /// Routes each output gradient to the input position that won the max.
    pub fn backward<S: Scalar>(&self, x: &Tensor<S>, grad_out: &Tensor<S>) -> Result<Tensor<S>> {
        let (_, arg) = self.forward_batch(x.data(), 1, x.len(), x.channels())?;
        if grad_out.shape() != (self.out_len(x.len())?, x.channels()) {
            return Err(Error::invalid("pooling output gradient has the wrong shape"));
        }
        let dx = self.backward_batch(grad_out.data(), &arg, 1, x.len(), x.channels());
        Tensor::new(x.len(), x.channels(), dx)
    }
}

/// Fully connected layer; `weight` is `[out][in]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense<S> {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weight: Vec<S>,
    pub bias: Vec<S>,
}

impl<S: Scalar> Dense<S> {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            weight: vec![S::zero(); in_dim * out_dim],
            bias: vec![S::zero(); out_dim],
        }
    }

    pub(crate) fn forward_batch(&self, x: &[S], batch: usize) -> Result<Vec<S>> {
        let (din, dout) = (self.in_dim, self.out_dim);
        if x.len() != batch * din {
            return Err(Error::invalid(format!(
                "dense layer expects {din} inputs per sample, got {}",
                x.len() / batch.max(1)
            )));
        }
        // Computed as [out][batch] so each worker owns a block of weight rows.
        let mut yt = vec![S::zero(); dout * batch];
        yt.par_chunks_mut(ROW_CHUNK * batch)
            .enumerate()
            .for_each(|(ci, block)| {
                let j0 = ci * ROW_CHUNK;
                let rows = block.len() / batch;
                for b0 in (0..batch).step_by(SAMPLE_CHUNK) {
                    let b1 = (b0 + SAMPLE_CHUNK).min(batch);
                    for r in 0..rows {
                        let j = j0 + r;
                        let w = &self.weight[j * din..(j + 1) * din];
                        for b in b0..b1 {
                            block[r * batch + b] = self.bias[j] + dot(w, &x[b * din..(b + 1) * din]);
                        }
                    }
                }
            });
        let mut y = vec![S::zero(); batch * dout];
        for j in 0..dout {
            for b in 0..batch {
                y[b * dout + j] = yt[j * batch + b];
            }
        }
        Ok(y)
    }

    pub(crate) fn backward_batch(
        &self,
        x: &[S],
        dy: &[S],
        batch: usize,
        need_dx: bool,
    ) -> Result<ParamGrads<S>> {
        let (din, dout) = (self.in_dim, self.out_dim);
        if x.len() != batch * din || dy.len() != batch * dout {
            return Err(Error::invalid("dense gradient size mismatch"));
        }
        let mut dw = vec![S::zero(); din * dout];
        let mut db = vec![S::zero(); dout];
        dw.par_chunks_mut(ROW_CHUNK * din)
            .zip(db.par_chunks_mut(ROW_CHUNK))
            .enumerate()
            .for_each(|(ci, (dwc, dbc))| {
                let j0 = ci * ROW_CHUNK;
                for (r, dbj) in dbc.iter_mut().enumerate() {
                    let j = j0 + r;
                    let row = &mut dwc[r * din..(r + 1) * din];
                    for b in 0..batch {
                        let g = dy[b * dout + j];
                        if g != S::zero() {
                            axpy(g, &x[b * din..(b + 1) * din], row);
                            *dbj += g;
                        }
                    }
                }
            });
        let dx = need_dx.then(|| {
            let mut dx = vec![S::zero(); batch * din];
            dx.par_chunks_mut(SAMPLE_CHUNK * din)
                .enumerate()
                .for_each(|(ci, dxc)| {
                    let b0 = ci * SAMPLE_CHUNK;
                    let n = dxc.len() / din;
                    for j0 in (0..dout).step_by(ROW_CHUNK) {
                        let j1 = (j0 + ROW_CHUNK).min(dout);
                        for bb in 0..n {
                            let b = b0 + bb;
                            let target = &mut dxc[bb * din..(bb + 1) * din];
                            for j in j0..j1 {
                                let g = dy[b * dout + j];
                                if g != S::zero() {
                                    axpy(g, &self.weight[j * din..(j + 1) * din], target);
                                }
                            }
                        }
                    }
                });
            dx
        });
        Ok((dx, dw, db))
    }

    /// Treats the input as flat, so a pooled `len x channels` map feeds in directly.
    pub fn forward(&self, x: &Tensor<S>) -> Result<Tensor<S>> {
        let y = self.forward_batch(x.data(), 1)?;
        Tensor::new(self.out_dim, 1, y)
    }

    pub fn backward(&self, x: &Tensor<S>, grad_out: &Tensor<S>) -> Result<(Tensor<S>, Vec<S>, Vec<S>)> {
        if grad_out.data().len() != self.out_dim {
            return Err(Error::invalid("dense output gradient has the wrong size"));
        }
        let (dx, dw, db) = self.backward_batch(x.data(), grad_out.data(), 1, true)?;
        let dx = dx.expect("requested");
        Ok((Tensor::new(x.len(), x.channels(), dx)?, dw, db))
    }
}

/// `max(x, 0)` elementwise.
pub fn relu<S: Scalar>(x: &Tensor<S>) -> Tensor<S> {
    let data = x.data().iter().map(|&v| v.max(S::zero())).collect();
    Tensor::new(x.len(), x.channels(), data).expect("same shape")
}

/// Passes the gradient where the input is strictly positive.
pub fn relu_backward<S: Scalar>(x: &Tensor<S>, grad_out: &Tensor<S>) -> Result<Tensor<S>> {
    if x.shape() != grad_out.shape() {
        return Err(Error::invalid("relu gradient shape mismatch"));
    }
    let data = relu_backward_slice(x.data(), grad_out.data());
    Tensor::new(x.len(), x.channels(), data)
}

pub(crate) fn relu_slice<S: Scalar>(x: &[S]) -> Vec<S> {
    x.iter().map(|&v| v.max(S::zero())).collect()
}

pub(crate) fn relu_backward_slice<S: Scalar>(x: &[S], dy: &[S]) -> Vec<S> {
    x.iter()
        .zip(dy)
        .map(|(&v, &g)| if v > S::zero() { g } else { S::zero() })
        .collect()
}
