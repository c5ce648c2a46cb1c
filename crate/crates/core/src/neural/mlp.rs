use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::sampling::stream_rng;

/// Hidden-layer nonlinearity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Relu,
    Elu,
}

impl Activation {
    pub fn name(&self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
            Activation::Elu => "elu",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            "elu" => Ok(Activation::Elu),
            other => Err(Error::invalid(format!("unknown activation {other:?}"))),
        }
    }

    #[inline]
    pub fn apply(&self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
            Activation::Elu => {
                if z > 0.0 {
                    z
                } else {
                    z.exp_m1()
                }
            }
        }
    }

    /// Derivative expressed through the pre-activation `z` and the output `a = σ(z)`.
    #[inline]
    fn derivative(&self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Elu => {
                if z > 0.0 {
                    1.0
                } else {
                    a + 1.0
                }
            }
        }
    }
}

/// Affine map `z ↦ W z + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub weights: DMatrix<f64>,
    pub bias: DVector<f64>,
}

impl Layer {
    pub fn zeros(n_out: usize, n_in: usize) -> Self {
        Self {
            weights: DMatrix::zeros(n_out, n_in),
            bias: DVector::zeros(n_out),
        }
    }

    pub fn n_in(&self) -> usize {
        self.weights.ncols()
    }

    pub fn n_out(&self) -> usize {
        self.weights.nrows()
    }
}

/// Feedforward network `A_{L+1} ∘ σ ∘ A_L ∘ ⋯ ∘ σ ∘ A_0`. The last layer has no
/// activation.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    layers: Vec<Layer>,
    activation: Activation,
}

/// Intermediate values of a batched forward pass (columns are samples).
pub struct ForwardCache {
    pre: Vec<DMatrix<f64>>,
    post: Vec<DMatrix<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &DMatrix<f64> {
        self.pre.last().expect("a network has at least one layer")
    }
}

impl Mlp {
    pub fn from_layers(layers: Vec<Layer>, activation: Activation) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::invalid("a network needs at least one layer"));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.bias.len() != l.n_out() {
                return Err(Error::DimensionMismatch {
                    expected: l.n_out(),
                    found: l.bias.len(),
                });
            }
            if i > 0 && layers[i - 1].n_out() != l.n_in() {
                return Err(Error::DimensionMismatch {
                    expected: layers[i - 1].n_out(),
                    found: l.n_in(),
                });
            }
        }
        Ok(Self { layers, activation })
    }

    /// All parameters zero.
    pub fn zeros(dims: &[usize], activation: Activation) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::invalid("need at least input and output dimensions"));
        }
        let layers = dims.windows(2).map(|w| Layer::zeros(w[1], w[0])).collect();
        Self::from_layers(layers, activation)
    }

    /// Weights uniform on `±√(6/fan_in)`, zero biases.
    pub fn he_uniform(dims: &[usize], activation: Activation, seed: u64) -> Result<Self> {
        let mut net = Self::zeros(dims, activation)?;
        let mut rng = stream_rng(seed, 0);
        for l in &mut net.layers {
            let bound = (6.0 / l.n_in().max(1) as f64).sqrt();
            for w in l.weights.iter_mut() {
                *w = rng.gen_range(-bound..bound);
            }
        }
        Ok(net)
    }

    /// `depth` hidden layers of `width` units.
    pub fn with_architecture(n_in: usize, n_out: usize, depth: usize, width: usize, activation: Activation, seed: u64) -> Result<Self> {
        let mut dims = vec![n_in];
        dims.extend(std::iter::repeat_n(width, depth));
        dims.push(n_out);
        Self::he_uniform(&dims, activation, seed)
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn into_layers(self) -> Vec<Layer> {
        self.layers
    }

    pub fn layer_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.input_dim()];
        dims.extend(self.layers.iter().map(Layer::n_out));
        dims
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].n_in()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty").n_out()
    }

    /// Number of hidden activation layers.
    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    /// Largest hidden width (0 for an affine network).
    pub fn width(&self) -> usize {
        self.layers[..self.layers.len() - 1].iter().map(Layer::n_out).max().unwrap_or(0)
    }

    pub fn num_parameters(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Parameters flattened layer by layer: weights (column-major), then bias.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_parameters());
        for l in &self.layers {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(l.bias.as_slice());
        }
        out
    }

    pub fn set_parameters(&mut self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.num_parameters() {
            return Err(Error::DimensionMismatch {
                expected: self.num_parameters(),
                found: theta.len(),
            });
        }
        let mut at = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.as_mut_slice().copy_from_slice(&theta[at..at + nw]);
            at += nw;
            let nb = l.bias.len();
            l.bias.as_mut_slice().copy_from_slice(&theta[at..at + nb]);
            at += nb;
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        let mut a = DVector::from_column_slice(x);
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            let mut z = &l.weights * &a + &l.bias;
            if i < last {
                z.apply(|v| *v = self.activation.apply(*v));
            }
            a = z;
        }
        Ok(a.as_slice().to_vec())
    }

    /// Forward pass over the columns of `x` (`input_dim × batch`).
    pub fn forward_batch(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        Ok(self.forward_cached(x)?.pre.pop().expect("non-empty"))
    }

    /// Evaluates many points given as rows.
    pub fn forward_points(&self, xs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let x = points_to_columns(xs, self.input_dim())?;
        let out = self.forward_batch(&x)?;
        Ok(out.column_iter().map(|c| c.iter().copied().collect()).collect())
    }

    pub fn forward_cached(&self, x: &DMatrix<f64>) -> Result<ForwardCache> {
        if x.nrows() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                found: x.nrows(),
            });
        }
        let last = self.layers.len() - 1;
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post: Vec<DMatrix<f64>> = Vec::with_capacity(last);
        for (i, l) in self.layers.iter().enumerate() {
            let input = if i == 0 { x } else { &post[i - 1] };
            let mut z = &l.weights * input;
            for mut col in z.column_iter_mut() {
                col += &l.bias;
            }
            if i < last {
                post.push(z.map(|v| self.activation.apply(v)));
            }
            pre.push(z);
        }
        Ok(ForwardCache { pre, post })
    }

    /// Reverse-mode gradient of a loss whose derivative with respect to the network output
    /// is `grad_out` (`output_dim × batch`). Returned in the layout of [`Mlp::parameters`].
    pub fn backward(&self, x: &DMatrix<f64>, cache: &ForwardCache, grad_out: &DMatrix<f64>) -> Vec<f64> {
        let n = self.layers.len();
        let mut grads: Vec<Layer> = Vec::with_capacity(n);
        let mut delta = grad_out.clone();
        for i in (0..n).rev() {
            let input = if i == 0 { x } else { &cache.post[i - 1] };
            let gw = &delta * input.transpose();
            let gb = delta.column_sum();
            if i > 0 {
                let mut back = self.layers[i].weights.transpose() * &delta;
                let z = &cache.pre[i - 1];
                let a = &cache.post[i - 1];
                for ((b, zv), av) in back.iter_mut().zip(z.iter()).zip(a.iter()) {
                    *b *= self.activation.derivative(*zv, *av);
                }
                delta = back;
            }
            grads.push(Layer { weights: gw, bias: gb });
        }
        grads.reverse();
        let mut out = Vec::with_capacity(self.num_parameters());
        for g in &grads {
            out.extend_from_slice(g.weights.as_slice());
            out.extend_from_slice(g.bias.as_slice());
        }
        out
    }

    /// Text serialization: a header with activation and dimensions, then each layer's
    /// weights (row-major) and bias with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let dims: Vec<String> = self.layer_dims().iter().map(|d| d.to_string()).collect();
        let _ = writeln!(out, "mlp {}", self.activation.name());
        let _ = writeln!(out, "dims {}", dims.join(" "));
        for (i, l) in self.layers.iter().enumerate() {
            let _ = writeln!(out, "weights {i}");
            for r in 0..l.n_out() {
                let row: Vec<String> = (0..l.n_in()).map(|c| format!("{:.16e}", l.weights[(r, c)])).collect();
                let _ = writeln!(out, "{}", row.join(" "));
            }
            let _ = writeln!(out, "bias {i}");
            let row: Vec<String> = l.bias.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let mut next = |what: &str| lines.next().ok_or_else(|| Error::parse(0, format!("unexpected end of input, expected {what}")));
        let (ln, head) = next("header")?;
        let activation = match head.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["mlp", act] => Activation::parse(act).map_err(|e| Error::parse(ln + 1, e.to_string()))?,
            _ => return Err(Error::parse(ln + 1, "expected `mlp <activation>`")),
        };
        let (ln, dims_line) = next("dims")?;
        let dims = dims_line
            .strip_prefix("dims")
            .ok_or_else(|| Error::parse(ln + 1, "expected `dims ...`"))?
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|e| Error::parse(ln + 1, e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        if dims.len() < 2 {
            return Err(Error::parse(ln + 1, "need at least two dimensions"));
        }
        let parse_row = |ln: usize, line: &str, n: usize| -> Result<Vec<f64>> {
            let row = line
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| Error::parse(ln + 1, e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            if row.len() != n {
                return Err(Error::parse(ln + 1, format!("expected {n} values, found {}", row.len())));
            }
            Ok(row)
        };
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for (i, w) in dims.windows(2).enumerate() {
            let (n_in, n_out) = (w[0], w[1]);
            let (ln, tag) = next("weights")?;
            if tag.trim() != format!("weights {i}") {
                return Err(Error::parse(ln + 1, format!("expected `weights {i}`")));
            }
            let mut weights = DMatrix::zeros(n_out, n_in);
            for r in 0..n_out {
                let (ln, line) = next("weight row")?;
                for (c, v) in parse_row(ln, line, n_in)?.into_iter().enumerate() {
                    weights[(r, c)] = v;
                }
            }
            let (ln, tag) = next("bias")?;
            if tag.trim() != format!("bias {i}") {
                return Err(Error::parse(ln + 1, format!("expected `bias {i}`")));
            }
            let (ln, line) = next("bias row")?;
            let bias = DVector::from_vec(parse_row(ln, line, n_out)?);
            layers.push(Layer { weights, bias });
        }
        Self::from_layers(layers, activation)
    }
}

/// Stacks points (rows) into a `d × n` column matrix.
pub fn points_to_columns(xs: &[Vec<f64>], d: usize) -> Result<DMatrix<f64>> {
    if let Some(bad) = xs.iter().find(|x| x.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: bad.len(),
        });
    }
    Ok(DMatrix::from_fn(d, xs.len(), |i, j| xs[j][i]))
}
