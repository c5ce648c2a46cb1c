//! Ground-truth parametric operators and training data.
//!
//! The main oracle maps a parameter `x ∈ [-1,1]^d` to the nodal values on a uniform
//! `K`-grid of the solution of the two-point problem `−(a(·;x) u′)′ = f` on `(0,1)` with
//! `u(0) = u(1) = 0`. The solution is written in closed form as
//!
//! ```text
//! u(z) = ∫₀^z (C − F(t)) / a(t) dt,   F(t) = ∫₀^t f,   C = ∫₀¹ F/a ÷ ∫₀¹ 1/a,
//! ```
//!
//! and the integrals are evaluated cellwise with Gauss–Legendre quadrature.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Exp1, Gamma, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::legendre::{DiscreteNorm, NormKind};
use crate::quadrature::{gauss_legendre, Rule1D, SparseGridRule};
use crate::sampling::{stream_rng, uniform_point};

/// Mean value of the affine coefficient.
pub const AFFINE_MEAN: f64 = 2.62;
/// `β_c` of the layered log-coefficient.
pub const LOG_BETA_C: f64 = 0.125;

/// Parametric diffusion coefficient `a(z; x)`.
#[derive(Clone, Debug, PartialEq)]
pub enum CoefficientField {
    /// `2.62 + Σ_{j≤d} x_j sin(πjz) / j^{3/2}`.
    AffineA1 { d: usize },
    /// Layered exponential field with `β_c = 1/8`, truncated after `d` terms.
    LogA2 { d: usize },
    /// `mean + Σ_j x_j amplitudes[j] sin(π(j+1)z)`.
    CustomAffine { mean: f64, amplitudes: Vec<f64> },
}

impl CoefficientField {
    pub fn dim(&self) -> usize {
        match self {
            CoefficientField::AffineA1 { d } | CoefficientField::LogA2 { d } => *d,
            CoefficientField::CustomAffine { amplitudes, .. } => amplitudes.len(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CoefficientField::AffineA1 { .. } => "affine-a1",
            CoefficientField::LogA2 { .. } => "log-a2",
            CoefficientField::CustomAffine { .. } => "custom-affine",
        }
    }

    /// `b_j = ‖∂a/∂x_j‖_∞` for the affine families; for the log field, the sup norm of the
    /// `j`-th term of the exponent.
    pub fn holomorphy_sequence(&self) -> Vec<f64> {
        match self {
            CoefficientField::AffineA1 { d } => (1..=*d).map(|j| (j as f64).powf(-1.5)).collect(),
            CoefficientField::LogA2 { d } => (1..=*d).map(log_a2_amplitude).collect(),
            CoefficientField::CustomAffine { amplitudes, .. } => amplitudes.iter().map(|a| a.abs()).collect(),
        }
    }

    /// Guaranteed lower bound on `a` over `[0,1] × [-1,1]^d`.
    pub fn r_min(&self) -> f64 {
        let b = self.holomorphy_sequence();
        match self {
            CoefficientField::AffineA1 { .. } => AFFINE_MEAN - b.iter().sum::<f64>(),
            CoefficientField::LogA2 { .. } => (1.0 - b.iter().sum::<f64>()).exp(),
            CoefficientField::CustomAffine { mean, .. } => mean - b.iter().sum::<f64>(),
        }
    }

    /// `a(z; x)`. Nonpositive values (possible only for custom fields) are an error.
    pub fn eval(&self, z: f64, x: &[f64]) -> Result<f64> {
        let d = self.dim();
        if x.len() < d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: x.len(),
            });
        }
        let value = match self {
            CoefficientField::AffineA1 { d } => {
                AFFINE_MEAN
                    + (1..=*d)
                        .map(|j| x[j - 1] * (PI * z * j as f64).sin() * (j as f64).powf(-1.5))
                        .sum::<f64>()
            }
            CoefficientField::LogA2 { d } => {
                let beta = LOG_BETA_C / log_beta_p();
                let mut exponent = 1.0;
                if *d >= 1 {
                    exponent += x[0] * (PI.sqrt() * beta / 2.0).sqrt();
                }
                for j in 2..=*d {
                    let half = (j / 2) as f64;
                    let arg = half * PI * z / log_beta_p();
                    let shape = if j % 2 == 0 { arg.sin() } else { arg.cos() };
                    exponent += log_zeta(j) * shape * x[j - 1];
                }
                exponent.exp()
            }
            CoefficientField::CustomAffine { mean, amplitudes } => {
                mean + amplitudes
                    .iter()
                    .enumerate()
                    .map(|(j, c)| x[j] * c * (PI * z * (j + 1) as f64).sin())
                    .sum::<f64>()
            }
        };
        if !(value > 0.0) {
            return Err(Error::InvalidField(format!("a({z}) = {value} is not positive")));
        }
        Ok(value)
    }
}

fn log_beta_p() -> f64 {
    1f64.max(2.0 * LOG_BETA_C)
}

fn log_zeta(j: usize) -> f64 {
    let beta = LOG_BETA_C / log_beta_p();
    let half = (j / 2) as f64;
    (PI.sqrt() * beta).sqrt() * (-(half * PI * beta).powi(2) / 8.0).exp()
}

fn log_a2_amplitude(j: usize) -> f64 {
    if j == 1 {
        let beta = LOG_BETA_C / log_beta_p();
        (PI.sqrt() * beta / 2.0).sqrt()
    } else {
        log_zeta(j)
    }
}

/// Right-hand side `f(z)` given by polynomial coefficients in `z` (lowest degree first).
#[derive(Clone, Debug, PartialEq)]
pub struct Source {
    coefficients: Vec<f64>,
}

impl Source {
    pub fn constant(c: f64) -> Self {
        Self {
            coefficients: vec![c],
        }
    }

    pub fn polynomial(coefficients: Vec<f64>) -> Self {
        Self { coefficients }
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * z + c)
    }

    /// `F(z) = ∫₀^z f`.
    pub fn antiderivative(&self, z: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (i, c)| acc * z + c / (i + 1) as f64)
            * z
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|&c| c == 0.0)
    }
}

impl Default for Source {
    fn default() -> Self {
        Self::constant(10.0)
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coefficients.len() == 1 {
            write!(f, "{}", self.coefficients[0])
        } else {
            let parts: Vec<String> = self.coefficients.iter().map(|c| c.to_string()).collect();
            write!(f, "poly:{}", parts.join(";"))
        }
    }
}

impl FromStr for Source {
    type Err = Error;

    /// `"10"` for a constant, `"poly:c0;c1;…"` for a polynomial in `z`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse = |t: &str| t.trim().parse::<f64>().map_err(|_| Error::invalid(format!("bad source {s:?}")));
        match s.strip_prefix("poly:") {
            Some(rest) => Ok(Source::polynomial(rest.split(';').map(parse).collect::<Result<_>>()?)),
            None => Ok(Source::constant(parse(s)?)),
        }
    }
}

fn cell_rule(k: usize) -> Result<Rule1D> {
    let n = 1024usize.div_ceil(k.max(2) - 1).clamp(4, 64);
    gauss_legendre(n)
}

/// Nodal values of the solution on the uniform `K`-grid of `[0,1]`.
pub fn solve_diffusion_1d(field: &CoefficientField, x: &[f64], source: &Source, k: usize) -> Result<Vec<f64>> {
    let rule = cell_rule(k)?;
    solve_with_rule(field, x, source, k, &rule)
}

fn solve_with_rule(field: &CoefficientField, x: &[f64], source: &Source, k: usize, rule: &Rule1D) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(Error::invalid("grid needs at least two nodes"));
    }
    if source.is_zero() {
        return Ok(vec![0.0; k]);
    }
    let h = 1.0 / (k - 1) as f64;
    let cells = k - 1;
    let mut inv_a = vec![0.0; cells];
    let mut flux_a = vec![0.0; cells];
    for c in 0..cells {
        let z0 = c as f64 * h;
        let (mut s0, mut s1) = (0.0, 0.0);
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            // rule weights are probability-normalized on [-1,1]; cell length is h
            let z = z0 + 0.5 * h * (t + 1.0);
            let a = field.eval(z, x)?;
            s0 += w / a;
            s1 += w * source.antiderivative(z) / a;
        }
        inv_a[c] = s0 * h;
        flux_a[c] = s1 * h;
    }
    let c_const = flux_a.iter().sum::<f64>() / inv_a.iter().sum::<f64>();
    let mut u = vec![0.0; k];
    for c in 0..cells {
        u[c + 1] = u[c] + c_const * inv_a[c] - flux_a[c];
    }
    Ok(u)
}

/// The flux constant `C = a u′ + F`.
pub fn flux_constant(field: &CoefficientField, x: &[f64], source: &Source, k: usize) -> Result<f64> {
    let rule = cell_rule(k)?;
    let h = 1.0 / (k - 1) as f64;
    let (mut s0, mut s1) = (0.0, 0.0);
    for c in 0..k - 1 {
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            let z = c as f64 * h + 0.5 * h * (t + 1.0);
            let a = field.eval(z, x)?;
            s0 += w / a;
            s1 += w * source.antiderivative(z) / a;
        }
    }
    Ok(s1 / s0)
}

/// Which ground truth an oracle evaluates.
#[derive(Clone, Debug, PartialEq)]
pub enum OracleKind {
    Diffusion { field: CoefficientField, source: Source },
    /// `x ↦ √3 · scale · (Σ_i c_i x_i) · y`.
    SyntheticAffine {
        coefficients: Vec<f64>,
        direction: Vec<f64>,
        scale: f64,
    },
}

/// Ground-truth operator `x ∈ [-1,1]^{input_dim} ↦ y ∈ R^K`. Only the first `d` inputs are
/// active; trailing inputs (used to pad the encoder) are ignored.
#[derive(Clone, Debug)]
pub struct OperatorOracle {
    kind: OracleKind,
    d: usize,
    input_dim: usize,
    holomorphy_b: Vec<f64>,
    output_norm: DiscreteNorm,
    cell_rule: Option<Rule1D>,
}

impl OperatorOracle {
    /// Diffusion solution map on a `K`-node grid with trapezoid output masses.
    pub fn diffusion(field: CoefficientField, source: Source, k: usize, norm: NormKind) -> Result<Self> {
        let d = field.dim();
        let holomorphy_b = field.holomorphy_sequence();
        let output_norm = DiscreteNorm::trapezoid(norm, k)?;
        if field.r_min() <= 0.0 {
            return Err(Error::InvalidField(format!(
                "coefficient lower bound {} is not positive",
                field.r_min()
            )));
        }
        Ok(Self {
            kind: OracleKind::Diffusion { field, source },
            d,
            input_dim: d,
            holomorphy_b,
            output_norm,
            cell_rule: Some(cell_rule(k)?),
        })
    }

    pub fn kind(&self) -> &OracleKind {
        &self.kind
    }

    /// Number of active parameters.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_norm.dim()
    }

    pub fn holomorphy_b(&self) -> &[f64] {
        &self.holomorphy_b
    }

    pub fn output_norm(&self) -> &DiscreteNorm {
        &self.output_norm
    }

    pub fn with_output_norm(mut self, norm: DiscreteNorm) -> Result<Self> {
        if norm.dim() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.output_dim(),
                found: norm.dim(),
            });
        }
        self.output_norm = norm;
        Ok(self)
    }

    /// Accept inputs of dimension `input_dim ≥ d`; the extra coordinates are inert.
    pub fn with_input_dim(mut self, input_dim: usize) -> Result<Self> {
        if input_dim < self.d {
            return Err(Error::invalid("padded input dimension must be >= d"));
        }
        self.input_dim = input_dim;
        Ok(self)
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                found: x.len(),
            });
        }
        match &self.kind {
            OracleKind::Diffusion { field, source } => {
                let rule = self.cell_rule.as_ref().expect("diffusion oracles carry a cell rule");
                solve_with_rule(field, &x[..self.d], source, self.output_dim(), rule)
            }
            OracleKind::SyntheticAffine {
                coefficients,
                direction,
                scale,
            } => {
                let s: f64 = coefficients.iter().zip(x).map(|(c, xi)| c * xi).sum();
                let a = 3f64.sqrt() * scale * s;
                Ok(direction.iter().map(|y| a * y).collect())
            }
        }
    }

    /// Evaluations at many points, in order.
    pub fn eval_many(&self, xs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        xs.par_iter().map(|x| self.eval(x)).collect()
    }

    /// Values at every node of a rule.
    pub fn sample_rule(&self, rule: &SparseGridRule) -> Result<Vec<Vec<f64>>> {
        self.eval_many(rule.nodes())
    }
}

/// Affine operator family `f_c(x) = √3 (Σ c_i x_i) y` with `|c_i| ≤ b_i` and a unit
/// direction `y` (unit in `norm`).
pub fn synthetic_affine_family(b: &[f64], c: &[f64], direction: &[f64], norm: DiscreteNorm) -> Result<OperatorOracle> {
    if b.len() != c.len() {
        return Err(Error::DimensionMismatch {
            expected: b.len(),
            found: c.len(),
        });
    }
    if let Some(i) = (0..c.len()).find(|&i| c[i].abs() > b[i]) {
        return Err(Error::invalid(format!("|c_{}| = {} exceeds b = {}", i + 1, c[i].abs(), b[i])));
    }
    if direction.len() != norm.dim() {
        return Err(Error::DimensionMismatch {
            expected: norm.dim(),
            found: direction.len(),
        });
    }
    let n = norm.norm(direction);
    if (n - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!("output direction has norm {n}, expected 1")));
    }
    Ok(OperatorOracle {
        kind: OracleKind::SyntheticAffine {
            coefficients: c.to_vec(),
            direction: direction.to_vec(),
            scale: 1.0,
        },
        d: c.len(),
        input_dim: c.len(),
        holomorphy_b: b.to_vec(),
        output_norm: norm,
        cell_rule: None,
    })
}

/// `m` noisy samples `Y_i = F(x_i) + E_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSet {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub noise_level: f64,
    pub seed: u64,
}

impl TrainingSet {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    pub fn output_dim(&self) -> usize {
        self.y.first().map_or(0, Vec::len)
    }

    /// CSV: a comment line with noise level and seed, a header `x1..xd,y1..yK`, then rows.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# noise_level={:.16e},seed={}\n", self.noise_level, self.seed);
        let mut header: Vec<String> = (1..=self.input_dim()).map(|i| format!("x{i}")).collect();
        header.extend((1..=self.output_dim()).map(|i| format!("y{i}")));
        out.push_str(&header.join(","));
        out.push('\n');
        for (x, y) in self.x.iter().zip(&self.y) {
            let row: Vec<String> = x.iter().chain(y).map(|v| format!("{v:.16e}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut noise_level = 0.0;
        let mut seed = 0;
        let mut header: Option<(usize, usize)> = None;
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if let Some(meta) = line.strip_prefix('#') {
                for kv in meta.split(',') {
                    match kv.trim().split_once('=') {
                        Some(("noise_level", v)) => {
                            noise_level = v.parse().map_err(|_| Error::parse(line_no, "bad noise_level"))?
                        }
                        Some(("seed", v)) => seed = v.parse().map_err(|_| Error::parse(line_no, "bad seed"))?,
                        _ => {}
                    }
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            match header {
                None => {
                    let cols: Vec<&str> = line.split(',').collect();
                    let dx = cols.iter().filter(|c| c.starts_with('x')).count();
                    let dy = cols.iter().filter(|c| c.starts_with('y')).count();
                    if dx + dy != cols.len() || cols[..dx].iter().any(|c| !c.starts_with('x')) {
                        return Err(Error::parse(line_no, "header must be x columns then y columns"));
                    }
                    header = Some((dx, dy));
                }
                Some((dx, dy)) => {
                    let vals = line
                        .split(',')
                        .map(|v| v.trim().parse::<f64>().map_err(|e| Error::parse(line_no, e.to_string())))
                        .collect::<Result<Vec<_>>>()?;
                    if vals.len() != dx + dy {
                        return Err(Error::parse(line_no, format!("expected {} values", dx + dy)));
                    }
                    x.push(vals[..dx].to_vec());
                    y.push(vals[dx..].to_vec());
                }
            }
        }
        Ok(Self {
            x,
            y,
            noise_level,
            seed,
        })
    }
}

/// Draws `m` parameters uniformly on the cube (point `i` from the stream keyed by
/// `(seed, i)`) and adds noise drawn uniformly from the output-norm ball of radius
/// `noise_level`.
pub fn generate_training_set(oracle: &OperatorOracle, m: usize, noise_level: f64, seed: u64) -> Result<TrainingSet> {
    if m == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    if !(noise_level >= 0.0) {
        return Err(Error::invalid("noise level must be >= 0"));
    }
    let draws: Vec<(Vec<f64>, Vec<f64>)> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let x = uniform_point(&mut rng, oracle.input_dim());
            let mut y = oracle.eval(&x)?;
            if noise_level > 0.0 {
                let e = sample_ball(&mut rng, oracle.output_norm(), noise_level);
                for (yi, ei) in y.iter_mut().zip(e) {
                    *yi += ei;
                }
            }
            Ok((x, y))
        })
        .collect::<Result<Vec<_>>>()?;
    let (x, y) = draws.into_iter().unzip();
    Ok(TrainingSet {
        x,
        y,
        noise_level,
        seed,
    })
}

/// Uniform draw from `{e : ‖e‖ ≤ radius}`. Euclidean and `ℓ⁴` balls use the
/// generalized-Gaussian construction `G / (Σ|G_i|^p + Z)^{1/p}` with `Z ~ Exp(1)`, in the
/// coordinates that turn the weighted ball into the standard one.
pub fn sample_ball<R: Rng>(rng: &mut R, norm: &DiscreteNorm, radius: f64) -> Vec<f64> {
    let w = norm.weights();
    match norm.kind() {
        NormKind::Sup => w.iter().map(|_| rng.gen_range(-radius..=radius)).collect(),
        kind => {
            let p = if kind == NormKind::WeightedEuclidean { 2.0 } else { 4.0 };
            let g: Vec<f64> = match kind {
                NormKind::WeightedEuclidean => w
                    .iter()
                    .map(|_| {
                        let n: f64 = rng.sample(StandardNormal);
                        n / 2f64.sqrt()
                    })
                    .collect(),
                _ => {
                    let gamma = Gamma::new(0.25, 1.0).expect("valid gamma parameters");
                    w.iter()
                        .map(|_| {
                            let t: f64 = rng.sample(gamma);
                            let s = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                            s * t.powf(0.25)
                        })
                        .collect()
                }
            };
            let z: f64 = rng.sample(Exp1);
            let denom = (g.iter().map(|v| v.abs().powf(p)).sum::<f64>() + z).powf(1.0 / p);
            g.iter()
                .zip(w)
                .map(|(gi, wi)| radius * gi / denom / wi.powf(1.0 / p))
                .collect()
        }
    }
}

/// Encoder/decoder pair: truncation of the parameter vector to its first `d_x` entries and
/// nodal reconstruction of the first `kept_nodes` output values.
#[derive(Clone, Debug, PartialEq)]
pub struct EncoderDecoder {
    pub d_x: usize,
    pub d_y: usize,
    pub kept_nodes: usize,
}

impl EncoderDecoder {
    /// Lossless pair for an oracle: `d_x = d`, all output nodes kept.
    pub fn exact(oracle: &OperatorOracle) -> Self {
        Self {
            d_x: oracle.input_dim(),
            d_y: oracle.output_dim(),
            kept_nodes: oracle.output_dim(),
        }
    }

    pub fn encode(&self, x: &[f64]) -> Vec<f64> {
        x.iter().take(self.d_x).copied().collect()
    }

    /// Inverse of the truncation (missing coordinates set to zero).
    pub fn decode_input(&self, code: &[f64], input_dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; input_dim];
        for (o, c) in out.iter_mut().zip(code) {
            *o = *c;
        }
        out
    }

    /// Nodal reconstruction: values beyond `kept_nodes` are dropped.
    pub fn decode_output(&self, c: &[f64]) -> Vec<f64> {
        c.iter()
            .enumerate()
            .map(|(i, &v)| if i < self.kept_nodes { v } else { 0.0 })
            .collect()
    }
}

/// Quadrature proxies for the encoding/decoding error factors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EncodingErrors {
    /// `(∫ ‖x − D_X(E_X(x))‖²_∞)^{1/2}`.
    pub e_x2: f64,
    /// `(∫ ‖F(x) − D_Y(E_Y(F(x)))‖²_Y)^{1/2}`.
    pub e_y2: f64,
}

pub fn encoder_decoder_error_terms(
    oracle: &OperatorOracle,
    enc_dec: &EncoderDecoder,
    rule: &SparseGridRule,
) -> Result<EncodingErrors> {
    if rule.dim() != oracle.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: oracle.input_dim(),
            found: rule.dim(),
        });
    }
    if enc_dec.d_y != oracle.output_dim() {
        return Err(Error::DimensionMismatch {
            expected: oracle.output_dim(),
            found: enc_dec.d_y,
        });
    }
    let norm = oracle.output_norm();
    let values = oracle.sample_rule(rule)?;
    let mut sx = 0.0;
    let mut sy = 0.0;
    for ((x, fx), &w) in rule.nodes().iter().zip(&values).zip(rule.weights()) {
        let back = enc_dec.decode_input(&enc_dec.encode(x), x.len());
        let dx = x.iter().zip(&back).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        sx += w * dx * dx;
        let dy = norm.distance(fx, &enc_dec.decode_output(fx));
        sy += w * dy * dy;
    }
    Ok(EncodingErrors {
        e_x2: sx.max(0.0).sqrt(),
        e_y2: sy.max(0.0).sqrt(),
    })
}

/// Key–value description of an oracle (`family`, `d`, `K`, `noise`, `norm`, `source`).
#[derive(Clone, Debug, PartialEq)]
pub struct OracleSpec {
    pub family: String,
    pub d: usize,
    pub k: usize,
    pub noise: f64,
    pub norm: NormKind,
    pub source: Source,
}

impl Default for OracleSpec {
    fn default() -> Self {
        Self {
            family: "affine-a1".into(),
            d: 4,
            k: 257,
            noise: 0.0,
            norm: NormKind::WeightedEuclidean,
            source: Source::default(),
        }
    }
}

impl OracleSpec {
    pub fn to_config(&self) -> String {
        format!(
            "family = {}\nd = {}\nK = {}\nnoise = {}\nnorm = {}\nsource = {}\n",
            self.family,
            self.d,
            self.k,
            self.noise,
            self.norm.name(),
            self.source
        )
    }

    /// Parses `key = value` lines; unknown keys are rejected, missing keys keep defaults.
    pub fn from_config(text: &str) -> Result<Self> {
        let mut spec = Self::default();
        for (key, value, line) in parse_key_values(text)? {
            spec.apply(&key, &value).map_err(|e| Error::parse(line, e.to_string()))?;
        }
        Ok(spec)
    }

    /// Sets one key; returns an error for unknown keys or malformed values.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::invalid(format!("bad value {value:?} for {what}"));
        match key {
            "family" => self.family = value.to_string(),
            "d" => self.d = value.parse().map_err(|_| bad("d"))?,
            "K" => self.k = value.parse().map_err(|_| bad("K"))?,
            "noise" => self.noise = value.parse().map_err(|_| bad("noise"))?,
            "norm" => self.norm = NormKind::parse(value)?,
            "source" => self.source = value.parse()?,
            other => return Err(Error::invalid(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn build(&self) -> Result<OperatorOracle> {
        if self.d == 0 {
            return Err(Error::invalid("d must be >= 1"));
        }
        match self.family.as_str() {
            "affine-a1" => OperatorOracle::diffusion(CoefficientField::AffineA1 { d: self.d }, self.source.clone(), self.k, self.norm),
            "log-a2" => OperatorOracle::diffusion(CoefficientField::LogA2 { d: self.d }, self.source.clone(), self.k, self.norm),
            "synthetic-affine" => {
                let b: Vec<f64> = (1..=self.d).map(|j| (j as f64).powf(-1.5)).collect();
                let norm = DiscreteNorm::trapezoid(self.norm, self.k)?;
                let mut y = vec![1.0; self.k];
                let n = norm.norm(&y);
                y.iter_mut().for_each(|v| *v /= n);
                synthetic_affine_family(&b, &b, &y, norm)
            }
            other => Err(Error::invalid(format!("unknown family {other:?}"))),
        }
    }
}

/// `key = value` lines with `#` comments; returns `(key, value, line number)`.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String, usize)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(i + 1, format!("expected key = value, got {line:?}")))?;
        out.push((k.trim().to_string(), v.trim().to_string(), i + 1));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{smolyak, RuleFamily};

    #[test]
    fn affine_coefficient_examples() {
        let f = CoefficientField::AffineA1 { d: 3 };
        for z in [0.0, 0.3, 1.0] {
            assert!((f.eval(z, &[0.0; 3]).unwrap() - 2.62).abs() < 1e-15);
        }
        let f1 = CoefficientField::AffineA1 { d: 1 };
        assert!((f1.eval(0.5, &[1.0]).unwrap() - 3.62).abs() < 1e-14);
        let g = CoefficientField::LogA2 { d: 5 };
        assert!((g.eval(0.4, &[0.0; 5]).unwrap() - std::f64::consts::E).abs() < 1e-14);
        assert!(f.r_min() > 0.0);
        let b = f.holomorphy_sequence();
        assert!((b[1] - 2f64.powf(-1.5)).abs() < 1e-15);
    }

    #[test]
    fn custom_field_rejects_nonpositive_values() {
        let f = CoefficientField::CustomAffine {
            mean: 0.5,
            amplitudes: vec![1.0],
        };
        assert!(matches!(f.eval(0.5, &[-1.0]), Err(Error::InvalidField(_))));
        assert!(f.eval(0.5, &[1.0]).is_ok());
    }

    #[test]
    fn constant_coefficient_solutions() {
        let one = CoefficientField::CustomAffine { mean: 1.0, amplitudes: vec![0.0] };
        let two = CoefficientField::CustomAffine { mean: 2.0, amplitudes: vec![0.0] };
        let k = 101;
        let u1 = solve_diffusion_1d(&one, &[0.0], &Source::constant(1.0), k).unwrap();
        for (i, u) in u1.iter().enumerate() {
            let z = i as f64 / (k - 1) as f64;
            assert!((u - z * (1.0 - z) / 2.0).abs() < 1e-14);
        }
        // ‖u‖_{L²(0,1)}² = 1/120, checked with a Gauss rule on the closed form
        let g = gauss_legendre(8).unwrap();
        let l2: f64 = g.integrate(|t| {
            let z = 0.5 * (t + 1.0);
            (z * (1.0 - z) / 2.0).powi(2)
        });
        assert!((l2 - 1.0 / 120.0).abs() < 1e-15);
        let u2 = solve_diffusion_1d(&two, &[0.0], &Source::constant(1.0), k).unwrap();
        for (a, b) in u1.iter().zip(&u2) {
            assert!((a - 2.0 * b).abs() < 1e-15);
        }
        let u0 = solve_diffusion_1d(&one, &[0.0], &Source::constant(0.0), k).unwrap();
        assert!(u0.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn flux_is_conserved() {
        let field = CoefficientField::AffineA1 { d: 4 };
        let x = [0.7, -0.4, 0.9, -1.0];
        let src = Source::default();
        let k = 4097;
        let u = solve_diffusion_1d(&field, &x, &src, k).unwrap();
        let c = flux_constant(&field, &x, &src, k).unwrap();
        let h = 1.0 / (k - 1) as f64;
        for step in 1..=100 {
            let i = 2 + step * (k - 5) / 101;
            let z = i as f64 * h;
            let du = (-u[i + 2] + 8.0 * u[i + 1] - 8.0 * u[i - 1] + u[i - 2]) / (12.0 * h);
            let flux = field.eval(z, &x).unwrap() * du + src.antiderivative(z);
            assert!((flux - c).abs() < 1e-8, "z = {z}: {flux} vs {c}");
        }
    }

    #[test]
    fn larger_constant_coefficient_shrinks_solution() {
        let norm = DiscreteNorm::trapezoid(NormKind::WeightedEuclidean, 65).unwrap();
        let mut last = f64::INFINITY;
        for mean in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let f = CoefficientField::CustomAffine { mean, amplitudes: vec![0.0] };
            let u = solve_diffusion_1d(&f, &[0.0], &Source::default(), 65).unwrap();
            let n = norm.norm(&u);
            assert!(n < last);
            last = n;
        }
    }

    #[test]
    fn parametric_sensitivities_decay() {
        let oracle = OperatorOracle::diffusion(CoefficientField::AffineA1 { d: 6 }, Source::default(), 129, NormKind::WeightedEuclidean).unwrap();
        let norm = oracle.output_norm().clone();
        let h = 1e-4;
        let bases = crate::sampling::halton_points(32, 6, 0);
        let sens: Vec<f64> = (0..6)
            .map(|j| {
                bases.iter().fold(0.0f64, |best, base| {
                    let mut xp = base.clone();
                    let mut xm = base.clone();
                    xp[j] += h;
                    xm[j] -= h;
                    let up = oracle.eval(&xp).unwrap();
                    let um = oracle.eval(&xm).unwrap();
                    best.max(norm.distance(&up, &um) / (2.0 * h))
                })
            })
            .collect();
        let b = oracle.holomorphy_b();
        assert!(sens.iter().all(|s| s.is_finite() && *s > 0.0));
        for j in 0..6 {
            let ratio = sens[j] / sens[0] / (b[j] / b[0]);
            assert!(ratio <= 3.0, "j = {}: ratio {ratio}", j + 1);
        }
    }

    #[test]
    fn synthetic_family_examples() {
        let norm = DiscreteNorm::unit(NormKind::Sup, 3);
        let zero = synthetic_affine_family(&[1.0], &[0.0], &[1.0, 0.0, 0.0], norm.clone()).unwrap();
        assert_eq!(zero.eval(&[0.3]).unwrap(), vec![0.0; 3]);
        let f = synthetic_affine_family(&[1.0], &[1.0], &[1.0, 0.0, 0.0], norm.clone()).unwrap();
        let y = f.eval(&[0.5]).unwrap();
        assert!((y[0] - 3f64.sqrt() * 0.5).abs() < 1e-15);
        assert_eq!(&y[1..], &[0.0, 0.0]);
        assert!(synthetic_affine_family(&[0.5], &[1.0], &[1.0, 0.0, 0.0], norm.clone()).is_err());

        let b = [1.0, 0.5, 0.25];
        let c = [0.8, -0.5, 0.1];
        let g = synthetic_affine_family(&b, &c, &[0.0, 1.0, 0.0], norm.clone()).unwrap();
        let sup = crate::legendre::sup_norm_estimate(|x| g.eval(x).unwrap(), 3, 64, 0, &norm).unwrap();
        assert!((sup - 3f64.sqrt() * 1.4).abs() < 1e-14);
    }

    #[test]
    fn training_sets_are_deterministic_and_noise_bounded() {
        let oracle = OracleSpec { k: 33, ..OracleSpec::default() }.build().unwrap();
        let clean = generate_training_set(&oracle, 7, 0.0, 11).unwrap();
        for (x, y) in clean.x.iter().zip(&clean.y) {
            assert_eq!(&oracle.eval(x).unwrap(), y);
        }
        let a = generate_training_set(&oracle, 7, 0.05, 11).unwrap();
        let b = generate_training_set(&oracle, 7, 0.05, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.x, clean.x);
        let norm = oracle.output_norm();
        let total: f64 = a
            .y
            .iter()
            .zip(&clean.y)
            .map(|(n, c)| {
                let e = norm.distance(n, c);
                assert!(e <= 0.05 + 1e-15);
                e * e
            })
            .sum();
        assert!(total.sqrt() <= (7f64).sqrt() * 0.05);
    }

    #[test]
    fn ball_samples_stay_inside_every_norm() {
        let mut rng = stream_rng(3, 0);
        for kind in [NormKind::WeightedEuclidean, NormKind::WeightedL4, NormKind::Sup] {
            let norm = DiscreteNorm::trapezoid(kind, 17).unwrap();
            for _ in 0..200 {
                let e = sample_ball(&mut rng, &norm, 0.3);
                assert!(norm.norm(&e) <= 0.3 + 1e-15);
            }
        }
    }

    #[test]
    fn encoding_error_terms() {
        let oracle = OracleSpec { k: 17, d: 2, ..OracleSpec::default() }.build().unwrap();
        let rule = smolyak(2, 2, RuleFamily::ClenshawCurtis).unwrap();
        let exact = EncoderDecoder::exact(&oracle);
        let e = encoder_decoder_error_terms(&oracle, &exact, &rule).unwrap();
        assert_eq!((e.e_x2, e.e_y2), (0.0, 0.0));
        let lossy = EncoderDecoder { kept_nodes: 8, ..exact.clone() };
        assert!(encoder_decoder_error_terms(&oracle, &lossy, &rule).unwrap().e_y2 > 0.0);
        let truncating = EncoderDecoder { d_x: 1, ..exact };
        assert!(encoder_decoder_error_terms(&oracle, &truncating, &rule).unwrap().e_x2 > 0.0);
    }

    #[test]
    fn config_round_trip() {
        let spec = OracleSpec {
            family: "log-a2".into(),
            d: 8,
            k: 65,
            noise: 0.01,
            norm: NormKind::WeightedL4,
            source: Source::polynomial(vec![1.0, 2.0]),
        };
        let parsed = OracleSpec::from_config(&spec.to_config()).unwrap();
        assert_eq!(parsed, spec);
        assert!(OracleSpec::from_config("colour = red\n").is_err());
        assert!(OracleSpec::from_config("d = four\n").is_err());
    }

    #[test]
    fn training_csv_round_trip() {
        let oracle = OracleSpec { k: 5, d: 2, ..OracleSpec::default() }.build().unwrap();
        let set = generate_training_set(&oracle, 4, 0.01, 2).unwrap();
        let back = TrainingSet::from_csv(&set.to_csv()).unwrap();
        assert_eq!(back, set);
    }
}
