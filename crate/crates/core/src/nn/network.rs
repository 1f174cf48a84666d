use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::layers::{relu_backward_slice, relu_slice, Conv1d, Dense, MaxPool1d};
use super::loss::{softmax, softmax_xent};
use super::tensor::{check_finite, Tensor};
use crate::error::{Error, Result};
use crate::features::FEATURE_DIM;
use crate::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub enum Layer<S> {
    Conv(Conv1d<S>),
    Pool(MaxPool1d),
    Dense(Dense<S>),
    Relu,
}

impl<S: Scalar> Layer<S> {
    pub fn name(&self) -> &'static str {
        match self {
            Layer::Conv(_) => "conv",
            Layer::Pool(_) => "pool",
            Layer::Dense(_) => "dense",
            Layer::Relu => "relu",
        }
    }

    /// Output `(len, channels)` for an input of the given shape.
    pub fn out_shape(&self, (len, ch): (usize, usize)) -> Result<(usize, usize)> {
        match self {
            Layer::Conv(c) => {
                if c.in_channels != ch {
                    return Err(Error::invalid(format!("conv expects {} channels, got {ch}", c.in_channels)));
                }
                Ok((c.out_len(len)?, c.out_channels))
            }
            Layer::Pool(p) => Ok((p.out_len(len)?, ch)),
            Layer::Dense(d) => {
                if d.in_dim != len * ch {
                    return Err(Error::invalid(format!("dense expects {} inputs, got {}", d.in_dim, len * ch)));
                }
                Ok((d.out_dim, 1))
            }
            Layer::Relu => Ok((len, ch)),
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            Layer::Conv(c) => c.weight.len() + c.bias.len(),
            Layer::Dense(d) => d.weight.len() + d.bias.len(),
            _ => 0,
        }
    }
}

/// Hyperparameters of the conv/pool/dense stack.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NetworkSpec {
    pub input_len: usize,
    pub maps: usize,
    pub kernel: usize,
    pub pool_window: usize,
    pub pool_stride: usize,
    pub hidden: usize,
}

impl Default for NetworkSpec {
    fn default() -> Self {
        Self {
            input_len: FEATURE_DIM,
            maps: 100,
            kernel: 3,
            pool_window: 3,
            pool_stride: 2,
            hidden: 1000,
        }
    }
}

impl NetworkSpec {
    /// Same topology with fewer maps and hidden units, for fast checks.
    pub fn reduced(maps: usize, hidden: usize) -> Self {
        Self { maps, hidden, ..Self::default() }
    }
}

/// Gradients laid out like the network's parameters: one `(dw, db)` per layer,
/// empty for parameterless layers.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients<S> {
    pub layers: Vec<(Vec<S>, Vec<S>)>,
}

impl<S: Scalar> Gradients<S> {
    pub fn max_abs(&self) -> S {
        self.layers
            .iter()
            .flat_map(|(w, b)| w.iter().chain(b))
            .fold(S::zero(), |m, v| m.max(v.abs()))
    }
}

/// Result of a batched forward/backward pass.
#[derive(Clone, Debug)]
pub struct BatchResult<S> {
    /// Mean cross-entropy over the batch.
    pub loss: S,
    pub correct: usize,
    /// Gradient of the mean loss.
    pub grads: Gradients<S>,
}

/// Intermediate values kept from the forward pass.
struct Trace<S> {
    /// Input of every layer, then the logits.
    acts: Vec<Vec<S>>,
    shapes: Vec<(usize, usize)>,
    pool_args: Vec<Option<Vec<u32>>>,
}

/// The 1D CNN: conv, pool, conv, pool, three dense layers with ReLU between
/// them, softmax over two classes. Class 0 is "single compressed" (tampered),
/// class 1 "double compressed".
#[derive(Clone, Debug, PartialEq)]
pub struct Network<S> {
    input_len: usize,
    input_channels: usize,
    layers: Vec<Layer<S>>,
}

impl<S: Scalar> Network<S> {
    /// Builds the stack with Xavier-uniform weights and zero biases.
    pub fn new(spec: NetworkSpec, seed: u64) -> Result<Self> {
        if spec.maps == 0 || spec.hidden == 0 || spec.kernel == 0 {
            return Err(Error::invalid("network dimensions must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pool = MaxPool1d::new(spec.pool_window, spec.pool_stride);
        let c1 = Conv1d::zeros(1, spec.maps, spec.kernel, 1);
        let l1 = pool.out_len(c1.out_len(spec.input_len)?)?;
        let c2 = Conv1d::zeros(spec.maps, spec.maps, spec.kernel, 1);
        let l2 = pool.out_len(c2.out_len(l1)?)?;
        let mut layers = vec![
            Layer::Conv(c1),
            Layer::Pool(pool),
            Layer::Conv(c2),
            Layer::Pool(pool),
            Layer::Dense(Dense::zeros(l2 * spec.maps, spec.hidden)),
            Layer::Relu,
            Layer::Dense(Dense::zeros(spec.hidden, spec.hidden)),
            Layer::Relu,
            Layer::Dense(Dense::zeros(spec.hidden, 2)),
        ];
        for layer in &mut layers {
            let (weight, fan_in, fan_out) = match layer {
                Layer::Conv(c) => (&mut c.weight, c.kernel * c.in_channels, c.kernel * c.out_channels),
                Layer::Dense(d) => (&mut d.weight, d.in_dim, d.out_dim),
                _ => continue,
            };
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for w in weight.iter_mut() {
                *w = S::from_f64_lossy(rng.gen_range(-limit..limit));
            }
        }
        Self::from_layers(spec.input_len, 1, layers)
    }

    /// Assembles a network from explicit layers, checking that shapes chain and
    /// end in two logits.
    pub fn from_layers(input_len: usize, input_channels: usize, layers: Vec<Layer<S>>) -> Result<Self> {
        let net = Self {
            input_len,
            input_channels,
            layers,
        };
        let last = *net.shapes()?.last().expect("non-empty");
        if last.0 * last.1 != 2 {
            return Err(Error::invalid(format!("network must end in 2 outputs, got {}", last.0 * last.1)));
        }
        for layer in &net.layers {
            match layer {
                Layer::Conv(c) => {
                    if c.weight.len() != c.out_channels * c.kernel * c.in_channels || c.bias.len() != c.out_channels {
                        return Err(Error::invalid("conv parameter size mismatch"));
                    }
                    check_finite(&c.weight)?;
                    check_finite(&c.bias)?;
                }
                Layer::Dense(d) => {
                    if d.weight.len() != d.in_dim * d.out_dim || d.bias.len() != d.out_dim {
                        return Err(Error::invalid("dense parameter size mismatch"));
                    }
                    check_finite(&d.weight)?;
                    check_finite(&d.bias)?;
                }
                _ => {}
            }
        }
        Ok(net)
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    pub fn input_channels(&self) -> usize {
        self.input_channels
    }

    pub fn input_dim(&self) -> usize {
        self.input_len * self.input_channels
    }

    pub fn layers(&self) -> &[Layer<S>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer<S>] {
        &mut self.layers
    }

    /// Input shape followed by every layer's output shape.
    pub fn shapes(&self) -> Result<Vec<(usize, usize)>> {
        let mut shape = (self.input_len, self.input_channels);
        let mut out = vec![shape];
        for layer in &self.layers {
            shape = layer.out_shape(shape)?;
            out.push(shape);
        }
        Ok(out)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    /// Mutable views of every parameter buffer in declaration order.
    pub fn params_mut(&mut self) -> Vec<&mut Vec<S>> {
        let mut out = Vec::new();
        for layer in &mut self.layers {
            match layer {
                Layer::Conv(c) => {
                    out.push(&mut c.weight);
                    out.push(&mut c.bias);
                }
                Layer::Dense(d) => {
                    out.push(&mut d.weight);
                    out.push(&mut d.bias);
                }
                _ => {}
            }
        }
        out
    }

    fn check_input(&self, x: &[S], batch: usize) -> Result<()> {
        if batch == 0 || x.len() != batch * self.input_dim() {
            return Err(Error::invalid(format!(
                "expected {batch} samples of {} values, got {} values",
                self.input_dim(),
                x.len()
            )));
        }
        check_finite(x)
    }

    fn forward_trace(&self, x: &[S], batch: usize, keep: bool) -> Result<Trace<S>> {
        self.check_input(x, batch)?;
        let mut shape = (self.input_len, self.input_channels);
        let mut cur = x.to_vec();
        let mut trace = Trace {
            acts: Vec::new(),
            shapes: Vec::new(),
            pool_args: Vec::new(),
        };
        for layer in &self.layers {
            let next_shape = layer.out_shape(shape)?;
            let (next, arg) = match layer {
                Layer::Conv(c) => (c.forward_batch(&cur, batch, shape.0)?, None),
                Layer::Pool(p) => {
                    let (y, a) = p.forward_batch(&cur, batch, shape.0, shape.1)?;
                    (y, Some(a))
                }
                Layer::Dense(d) => (d.forward_batch(&cur, batch)?, None),
                Layer::Relu => (relu_slice(&cur), None),
            };
            if keep {
                trace.acts.push(cur);
                trace.shapes.push(shape);
                trace.pool_args.push(arg);
            }
            cur = next;
            shape = next_shape;
        }
        check_finite(&cur)?;
        trace.acts.push(cur);
        Ok(trace)
    }

    /// Raw two-class logits for each sample of a flat batch.
    pub fn logits_batch(&self, x: &[S], batch: usize) -> Result<Vec<[S; 2]>> {
        let t = self.forward_trace(x, batch, false)?;
        Ok(t.acts[0].chunks(2).map(|c| [c[0], c[1]]).collect())
    }

    /// Class probabilities `(tampered, authentic)` for each sample.
    pub fn predict_batch(&self, x: &[S], batch: usize) -> Result<Vec<[S; 2]>> {
        Ok(self.logits_batch(x, batch)?.into_iter().map(softmax).collect())
    }

    pub fn predict(&self, x: &[S]) -> Result<[S; 2]> {
        Ok(self.predict_batch(x, 1)?[0])
    }

    pub fn predict_tensor(&self, x: &Tensor<S>) -> Result<[S; 2]> {
        if x.shape() != (self.input_len, self.input_channels) {
            return Err(Error::invalid("input tensor shape does not match the network"));
        }
        self.predict(x.data())
    }

    /// Mean loss and its gradient over a flat batch with class labels 0/1.
    pub fn loss_and_grads(&self, x: &[S], labels: &[usize], batch: usize) -> Result<BatchResult<S>> {
        if labels.len() != batch {
            return Err(Error::invalid("label count does not match batch"));
        }
        let trace = self.forward_trace(x, batch, true)?;
        let logits = trace.acts.last().expect("logits");
        let scale = S::one() / S::from_f64_lossy(batch as f64);
        let mut loss = S::zero();
        let mut correct = 0;
        let mut dy = vec![S::zero(); batch * 2];
        for (b, &label) in labels.iter().enumerate() {
            let (p, l, g) = softmax_xent([logits[2 * b], logits[2 * b + 1]], label)?;
            loss += l;
            let predicted = if p[0] > p[1] { 0 } else { 1 };
            correct += usize::from(predicted == label);
            dy[2 * b] = g[0] * scale;
            dy[2 * b + 1] = g[1] * scale;
        }
        let mut grads = vec![(Vec::new(), Vec::new()); self.layers.len()];
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let input = &trace.acts[i];
            let (len, ch) = trace.shapes[i];
            let need_dx = i > 0;
            dy = match layer {
                Layer::Conv(c) => {
                    let (dx, dw, db) = c.backward_batch(input, &dy, batch, len, need_dx)?;
                    grads[i] = (dw, db);
                    dx.unwrap_or_default()
                }
                Layer::Pool(p) => {
                    let arg = trace.pool_args[i].as_ref().expect("pool trace");
                    p.backward_batch(&dy, arg, batch, len, ch)
                }
                Layer::Dense(d) => {
                    let (dx, dw, db) = d.backward_batch(input, &dy, batch, need_dx)?;
                    grads[i] = (dw, db);
                    dx.unwrap_or_default()
                }
                Layer::Relu => relu_backward_slice(input, &dy),
            };
        }
        Ok(BatchResult {
            loss: loss * scale,
            correct,
            grads: Gradients { layers: grads },
        })
    }

    /// Smallest distance of any ReLU input from 0 and any pool window's winner
    /// from its runner-up. Finite differences are unreliable near these kinks.
    pub fn kink_margin(&self, x: &[S]) -> Result<S> {
        let trace = self.forward_trace(x, 1, true)?;
        let mut margin = S::infinity();
        for (i, layer) in self.layers.iter().enumerate() {
            let input = &trace.acts[i];
            match layer {
                Layer::Relu => {
                    for v in input {
                        margin = margin.min(v.abs());
                    }
                }
                Layer::Pool(p) => {
                    let (len, ch) = trace.shapes[i];
                    let out = p.out_len(len)?;
                    for o in 0..out {
                        for c in 0..ch {
                            let mut vals: Vec<S> = (0..p.window).map(|k| input[(o * p.stride + k) * ch + c]).collect();
                            vals.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
                            margin = margin.min(vals[0] - vals[1]);
                        }
                    }
                }
                _ => {}
            }
        }
        Ok(margin)
    }

    /// Converts parameters to another precision.
    pub fn cast<T: Scalar>(&self) -> Network<T> {
        let conv = |v: &[S]| v.iter().map(|x| T::from_f64_lossy(x.to_f64_lossy())).collect::<Vec<T>>();
        let layers = self
            .layers
            .iter()
            .map(|l| match l {
                Layer::Conv(c) => Layer::Conv(Conv1d {
                    in_channels: c.in_channels,
                    out_channels: c.out_channels,
                    kernel: c.kernel,
                    stride: c.stride,
                    weight: conv(&c.weight),
                    bias: conv(&c.bias),
                }),
                Layer::Pool(p) => Layer::Pool(*p),
                Layer::Dense(d) => Layer::Dense(Dense {
                    in_dim: d.in_dim,
                    out_dim: d.out_dim,
                    weight: conv(&d.weight),
                    bias: conv(&d.bias),
                }),
                Layer::Relu => Layer::Relu,
            })
            .collect();
        Network {
            input_len: self.input_len,
            input_channels: self.input_channels,
            layers,
        }
    }
}
