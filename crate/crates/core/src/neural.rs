//! Dense feed-forward networks with hand-written backpropagation and Adam.
//!
//! Batches are stored `(examples, features)`. Gradients returned by
//! [`DenseNetwork::backward`] are those of `sum(upstream ⊙ output)`, summed over
//! the batch; callers fold in any `1/N`.
//!
//! # Checkpoint layout
//!
//! Plain UTF-8 text, `\n` line endings, values in shortest round-trip decimal:
//!
//! ```text
//! quadftc-network 1
//! layers <L>
//! layer <in> <out> <relu|sigmoid|linear>     # repeated L times, each followed by
//! <in weights of row 0, space separated>     #   <out> weight rows (row-major,
//! ...                                        #   one output unit per line)
//! <out biases, space separated>              #   and one bias line
//! ```

use crate::rng::SplitMix64;
use crate::scalar::Real;
use ndarray::{Array1, Array2, ArrayView2, Axis};
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

const MAGIC: &str = "quadftc-network";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum NetError {
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("networks have different architectures")]
    ArchitectureMismatch,
    #[error("checkpoint line {line}: {msg}")]
    Checkpoint { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Sigmoid,
    Linear,
}

impl Activation {
    fn apply<T: Real>(self, z: T) -> T {
        match self {
            Self::Relu => z.max(T::zero()),
            Self::Sigmoid => T::one() / (T::one() + (-z).exp()),
            Self::Linear => z,
        }
    }

    /// Derivative expressed through the activation output `a`.
    fn slope<T: Real>(self, a: T) -> T {
        match self {
            Self::Relu => {
                if a > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Self::Sigmoid => a * (T::one() - a),
            Self::Linear => T::one(),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Relu => "relu",
            Self::Sigmoid => "sigmoid",
            Self::Linear => "linear",
        })
    }
}

impl FromStr for Activation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "relu" => Ok(Self::Relu),
            "sigmoid" => Ok(Self::Sigmoid),
            "linear" => Ok(Self::Linear),
            _ => Err(format!("unknown activation `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T: Real> {
    /// `out × in`.
    pub weights: Array2<T>,
    pub bias: Array1<T>,
    pub activation: Activation,
}

impl<T: Real> Dense<T> {
    pub fn inputs(&self) -> usize {
        self.weights.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseNetwork<T: Real> {
    layers: Vec<Dense<T>>,
}

/// Layer inputs and outputs kept from a forward pass for backpropagation.
/// `activations[0]` is the batch input, `activations[k + 1]` the output of
/// layer `k`.
#[derive(Debug, Clone)]
pub struct ForwardCache<T: Real> {
    pub activations: Vec<Array2<T>>,
}

impl<T: Real> ForwardCache<T> {
    pub fn output(&self) -> &Array2<T> {
        self.activations.last().expect("cache holds the input at least")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T: Real> {
    pub weights: Vec<Array2<T>>,
    pub biases: Vec<Array1<T>>,
    /// With respect to the network input, one row per example.
    pub input: Array2<T>,
}

impl<T: Real> Gradients<T> {
    /// Parameter gradients in [`DenseNetwork::params`] order.
    pub fn flat(&self) -> Vec<T> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter().copied());
            out.extend(b.iter().copied());
        }
        out
    }

    pub fn scale(&mut self, k: T) {
        for w in &mut self.weights {
            w.mapv_inplace(|x| x * k);
        }
        for b in &mut self.biases {
            b.mapv_inplace(|x| x * k);
        }
        self.input.mapv_inplace(|x| x * k);
    }
}

impl<T: Real> DenseNetwork<T> {
    pub fn from_layers(layers: Vec<Dense<T>>) -> Result<Self, NetError> {
        if layers.is_empty() {
            return Err(NetError::ShapeMismatch {
                expected: 1,
                got: 0,
            });
        }
        for pair in layers.windows(2) {
            if pair[0].outputs() != pair[1].inputs() {
                return Err(NetError::ShapeMismatch {
                    expected: pair[0].outputs(),
                    got: pair[1].inputs(),
                });
            }
        }
        for l in &layers {
            if l.bias.len() != l.outputs() {
                return Err(NetError::ShapeMismatch {
                    expected: l.outputs(),
                    got: l.bias.len(),
                });
            }
        }
        Ok(Self { layers })
    }

    /// `sizes = [in, h1, ..., out]`. Hidden layers use `hidden`, the last uses
    /// `output`. Every weight and bias is drawn uniform in ±1/√fan_in, the last
    /// layer's then multiplied by `final_scale`. Draw order: layer by layer,
    /// weights row-major, then biases.
    pub fn init(
        sizes: &[usize],
        hidden: Activation,
        output: Activation,
        final_scale: f64,
        rng: &mut SplitMix64,
    ) -> Self {
        assert!(sizes.len() >= 2, "need at least input and output sizes");
        let n = sizes.len() - 1;
        let mut layers = Vec::with_capacity(n);
        for k in 0..n {
            let (fan_in, fan_out) = (sizes[k], sizes[k + 1]);
            let mut bound = 1.0 / (fan_in as f64).sqrt();
            if k == n - 1 {
                bound *= final_scale;
            }
            let weights = Array2::from_shape_fn((fan_out, fan_in), |_| {
                T::lit(rng.uniform_in(-bound, bound))
            });
            let bias = Array1::from_shape_fn(fan_out, |_| T::lit(rng.uniform_in(-bound, bound)));
            let activation = if k == n - 1 { output } else { hidden };
            layers.push(Dense {
                weights,
                bias,
                activation,
            });
        }
        Self { layers }
    }

    pub fn layers(&self) -> &[Dense<T>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense<T>] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.layers.len() == other.layers.len()
            && self.layers.iter().zip(&other.layers).all(|(a, b)| {
                a.weights.dim() == b.weights.dim() && a.activation == b.activation
            })
    }

    pub fn forward(&self, input: &[T]) -> Result<Vec<T>, NetError> {
        let x = ArrayView2::from_shape((1, input.len()), input).map_err(|_| {
            NetError::ShapeMismatch {
                expected: self.input_dim(),
                got: input.len(),
            }
        })?;
        Ok(self.forward_batch(x)?.into_raw_vec_and_offset().0)
    }

    pub fn forward_batch(&self, input: ArrayView2<T>) -> Result<Array2<T>, NetError> {
        self.check_input(input.ncols())?;
        let mut x = input.to_owned();
        for l in &self.layers {
            x = layer_forward(l, x.view());
        }
        Ok(x)
    }

    pub fn forward_cached(&self, input: ArrayView2<T>) -> Result<ForwardCache<T>, NetError> {
        self.check_input(input.ncols())?;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(input.to_owned());
        for l in &self.layers {
            let next = layer_forward(l, activations.last().unwrap().view());
            activations.push(next);
        }
        Ok(ForwardCache { activations })
    }

    /// Gradients of `sum(upstream ⊙ output)` for the batch held in `cache`.
    pub fn backward(
        &self,
        cache: &ForwardCache<T>,
        upstream: ArrayView2<T>,
    ) -> Result<Gradients<T>, NetError> {
        let out = cache.output();
        if upstream.dim() != out.dim() {
            return Err(NetError::ShapeMismatch {
                expected: out.len(),
                got: upstream.len(),
            });
        }
        let n = self.layers.len();
        let mut weights = Vec::with_capacity(n);
        let mut biases = Vec::with_capacity(n);
        let mut delta = upstream.to_owned();
        for k in (0..n).rev() {
            let l = &self.layers[k];
            let a = &cache.activations[k + 1];
            delta.zip_mut_with(a, |d, &av| *d = *d * l.activation.slope(av));
            weights.push(delta.t().dot(&cache.activations[k]));
            biases.push(delta.sum_axis(Axis(0)));
            delta = delta.dot(&l.weights);
        }
        weights.reverse();
        biases.reverse();
        Ok(Gradients {
            weights,
            biases,
            input: delta,
        })
    }

    /// Single-example convenience wrapper around [`Self::backward`].
    pub fn backward_single(&self, input: &[T], upstream: &[T]) -> Result<Gradients<T>, NetError> {
        let x = ArrayView2::from_shape((1, input.len()), input).map_err(|_| {
            NetError::ShapeMismatch {
                expected: self.input_dim(),
                got: input.len(),
            }
        })?;
        let cache = self.forward_cached(x)?;
        let up = ArrayView2::from_shape((1, upstream.len()), upstream).map_err(|_| {
            NetError::ShapeMismatch {
                expected: self.output_dim(),
                got: upstream.len(),
            }
        })?;
        self.backward(&cache, up)
    }

    /// All parameters flattened: per layer, weights row-major then biases.
    pub fn params(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend(l.weights.iter().copied());
            out.extend(l.bias.iter().copied());
        }
        out
    }

    pub fn set_params(&mut self, flat: &[T]) -> Result<(), NetError> {
        if flat.len() != self.param_count() {
            return Err(NetError::ShapeMismatch {
                expected: self.param_count(),
                got: flat.len(),
            });
        }
        let mut it = flat.iter().copied();
        for l in &mut self.layers {
            for w in l.weights.iter_mut() {
                *w = it.next().unwrap();
            }
            for b in l.bias.iter_mut() {
                *b = it.next().unwrap();
            }
        }
        Ok(())
    }

    fn check_input(&self, got: usize) -> Result<(), NetError> {
        if got != self.input_dim() {
            return Err(NetError::ShapeMismatch {
                expected: self.input_dim(),
                got,
            });
        }
        Ok(())
    }

    pub fn save<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{MAGIC} {FORMAT_VERSION}")?;
        writeln!(w, "layers {}", self.layers.len())?;
        for l in &self.layers {
            writeln!(w, "layer {} {} {}", l.inputs(), l.outputs(), l.activation)?;
            for row in l.weights.rows() {
                write_row(&mut w, row.iter())?;
            }
            write_row(&mut w, l.bias.iter())?;
        }
        Ok(())
    }

    pub fn load<R: BufRead>(r: R) -> Result<Self, NetError> {
        let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| -> Result<(usize, String), NetError> {
            match lines.next() {
                Some((n, Ok(s))) => Ok((n, s)),
                Some((_, Err(e))) => Err(e.into()),
                None => Err(NetError::Checkpoint {
                    line: 0,
                    msg: format!("unexpected end of file, wanted {what}"),
                }),
            }
        };
        let bad = |line: usize, msg: String| NetError::Checkpoint { line, msg };

        let (n, head) = next("header")?;
        let expected_head = format!("{MAGIC} {FORMAT_VERSION}");
        if head.trim() != expected_head {
            return Err(bad(n, format!("expected `{expected_head}`")));
        }
        let (n, count) = next("layer count")?;
        let count: usize = count
            .strip_prefix("layers ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| bad(n, "expected `layers <count>`".into()))?;
        let mut layers = Vec::with_capacity(count);
        for _ in 0..count {
            let (n, spec) = next("layer header")?;
            let parts: Vec<&str> = spec.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "layer" {
                return Err(bad(n, "expected `layer <in> <out> <activation>`".into()));
            }
            let inputs: usize = parts[1].parse().map_err(|_| bad(n, "bad input size".into()))?;
            let outputs: usize = parts[2].parse().map_err(|_| bad(n, "bad output size".into()))?;
            let activation: Activation = parts[3].parse().map_err(|e| bad(n, e))?;
            let mut weights = Array2::zeros((outputs, inputs));
            for mut row in weights.rows_mut() {
                let (n, text) = next("weight row")?;
                let vals = parse_row::<T>(&text, inputs).map_err(|e| bad(n, e))?;
                row.assign(&Array1::from(vals));
            }
            let (n, text) = next("bias row")?;
            let bias = Array1::from(parse_row::<T>(&text, outputs).map_err(|e| bad(n, e))?);
            layers.push(Dense {
                weights,
                bias,
                activation,
            });
        }
        Self::from_layers(layers)
    }
}

fn layer_forward<T: Real>(l: &Dense<T>, x: ArrayView2<T>) -> Array2<T> {
    let mut z = x.dot(&l.weights.t());
    z += &l.bias;
    let act = l.activation;
    z.mapv_inplace(|v| act.apply(v));
    z
}

fn write_row<'a, T: Real, W: Write>(w: &mut W, vals: impl Iterator<Item = &'a T>) -> io::Result<()> {
    let mut first = true;
    for v in vals {
        if !first {
            w.write_all(b" ")?;
        }
        first = false;
        write!(w, "{v}")?;
    }
    w.write_all(b"\n")
}

fn parse_row<T: Real>(text: &str, expected: usize) -> Result<Vec<T>, String> {
    let vals: Vec<T> = text
        .split_whitespace()
        .map(|t| t.parse::<T>().map_err(|_| format!("bad number `{t}`")))
        .collect::<Result<_, _>>()?;
    if vals.len() != expected {
        return Err(format!("expected {expected} values, found {}", vals.len()));
    }
    if vals.iter().any(|v| !v.is_finite()) {
        return Err("non-finite parameter".into());
    }
    Ok(vals)
}

/// `target ← tau·online + (1 − tau)·target`, parameter by parameter.
pub fn soft_update<T: Real>(
    target: &mut DenseNetwork<T>,
    online: &DenseNetwork<T>,
    tau: T,
) -> Result<(), NetError> {
    if !target.same_shape(online) {
        return Err(NetError::ArchitectureMismatch);
    }
    let keep = T::one() - tau;
    for (t, o) in target.layers.iter_mut().zip(&online.layers) {
        t.weights.zip_mut_with(&o.weights, |a, &b| *a = tau * b + keep * *a);
        t.bias.zip_mut_with(&o.bias, |a, &b| *a = tau * b + keep * *a);
    }
    Ok(())
}

/// Adam with bias-corrected moments. Steps descend the gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam<T: Real> {
    pub lr: T,
    pub beta1: T,
    pub beta2: T,
    pub eps: T,
    pub steps: u64,
    m_w: Vec<Array2<T>>,
    v_w: Vec<Array2<T>>,
    m_b: Vec<Array1<T>>,
    v_b: Vec<Array1<T>>,
}

impl<T: Real> Adam<T> {
    pub fn new(net: &DenseNetwork<T>, lr: T) -> Self {
        let zw: Vec<Array2<T>> = net
            .layers
            .iter()
            .map(|l| Array2::zeros(l.weights.dim()))
            .collect();
        let zb: Vec<Array1<T>> = net.layers.iter().map(|l| Array1::zeros(l.bias.len())).collect();
        Self {
            lr,
            beta1: T::lit(0.9),
            beta2: T::lit(0.999),
            eps: T::lit(1e-8),
            steps: 0,
            m_w: zw.clone(),
            v_w: zw,
            m_b: zb.clone(),
            v_b: zb,
        }
    }

    pub fn step(&mut self, net: &mut DenseNetwork<T>, grads: &Gradients<T>) -> Result<(), NetError> {
        if grads.weights.len() != net.layers.len()
            || net
                .layers
                .iter()
                .zip(&grads.weights)
                .any(|(l, g)| l.weights.dim() != g.dim())
            || self.m_w.len() != net.layers.len()
        {
            return Err(NetError::ArchitectureMismatch);
        }
        self.steps += 1;
        let t = self.steps as i32;
        let c1 = T::one() - self.beta1.powi(t);
        let c2 = T::one() - self.beta2.powi(t);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.lr, self.eps);
        let update = |p: &mut T, g: T, m: &mut T, v: &mut T| {
            *m = b1 * *m + (T::one() - b1) * g;
            *v = b2 * *v + (T::one() - b2) * g * g;
            let mh = *m / c1;
            let vh = *v / c2;
            *p -= lr * mh / (vh.sqrt() + eps);
        };
        for k in 0..net.layers.len() {
            let l = &mut net.layers[k];
            ndarray::Zip::from(&mut l.weights)
                .and(&grads.weights[k])
                .and(&mut self.m_w[k])
                .and(&mut self.v_w[k])
                .for_each(|p, &g, m, v| update(p, g, m, v));
            ndarray::Zip::from(&mut l.bias)
                .and(&grads.biases[k])
                .and(&mut self.m_b[k])
                .and(&mut self.v_b[k])
                .for_each(|p, &g, m, v| update(p, g, m, v));
        }
        Ok(())
    }
}

/// Largest relative error between backpropagated parameter and input
/// gradients and central finite differences of `c · forward(x)`.
///
/// Relative error is `|a − n| / max(|a| + |n|, floor)`.
pub fn gradient_check(
    net: &DenseNetwork<f64>,
    input: &[f64],
    upstream: &[f64],
    h: f64,
    floor: f64,
) -> Result<f64, NetError> {
    let loss = |n: &DenseNetwork<f64>, x: &[f64]| -> Result<f64, NetError> {
        Ok(n.forward(x)?.iter().zip(upstream).map(|(y, c)| y * c).sum())
    };
    let grads = net.backward_single(input, upstream)?;
    let rel = |a: f64, n: f64| (a - n).abs() / (a.abs() + n.abs()).max(floor);
    let mut worst = 0.0f64;

    let base = net.params();
    let analytic = grads.flat();
    let mut probe = net.clone();
    let mut p = base.clone();
    for i in 0..base.len() {
        p[i] = base[i] + h;
        probe.set_params(&p)?;
        let up = loss(&probe, input)?;
        p[i] = base[i] - h;
        probe.set_params(&p)?;
        let down = loss(&probe, input)?;
        p[i] = base[i];
        worst = worst.max(rel(analytic[i], (up - down) / (2.0 * h)));
    }

    let mut x = input.to_vec();
    for i in 0..x.len() {
        x[i] = input[i] + h;
        let up = loss(net, &x)?;
        x[i] = input[i] - h;
        let down = loss(net, &x)?;
        x[i] = input[i];
        worst = worst.max(rel(grads.input[[0, i]], (up - down) / (2.0 * h)));
    }
    Ok(worst)
}
