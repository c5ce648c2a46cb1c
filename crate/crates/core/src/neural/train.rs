use nalgebra::DMatrix;

use super::mlp::{points_to_columns, Mlp};
use crate::error::{Error, Result};
use crate::legendre::DiscreteNorm;
use crate::operators::{EncoderDecoder, TrainingSet};

/// Optimizer and stopping settings.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub lr_init: f64,
    pub lr_final: f64,
    /// Stop once the loss falls below this value.
    pub tol: f64,
    /// A checkpoint is taken when `loss / checkpoint_loss` drops below this ratio.
    pub checkpoint_ratio: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 60_000,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            lr_init: 1e-3,
            lr_final: 1e-4,
            tol: 5e-7,
            checkpoint_ratio: 1.0 / 8.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// Geometric interpolation between `lr_init` and `lr_final`.
    pub fn learning_rate(&self, epoch: usize) -> f64 {
        if self.epochs <= 1 {
            return self.lr_init;
        }
        let t = epoch as f64 / (self.epochs - 1) as f64;
        self.lr_init * (self.lr_final / self.lr_init).powf(t)
    }
}

/// Result of [`train`].
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub net: Mlp,
    /// Loss at the start of every epoch.
    pub loss_trace: Vec<f64>,
    pub final_loss: f64,
    pub checkpoint_loss: f64,
    /// Whether the checkpoint replaced the last iterate.
    pub restored: bool,
    pub epochs_run: usize,
}

/// Empirical loss `1/m Σ ‖Y_i − D(N(E(x_i)))‖²_Y` prepared for repeated evaluation.
pub struct Objective<'a> {
    x: DMatrix<f64>,
    y: DMatrix<f64>,
    norm: &'a DiscreteNorm,
    kept: usize,
}

impl<'a> Objective<'a> {
    pub fn new(data: &TrainingSet, enc_dec: &EncoderDecoder, norm: &'a DiscreteNorm) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::invalid("empty training set"));
        }
        if data.output_dim() != norm.dim() {
            return Err(Error::DimensionMismatch {
                expected: norm.dim(),
                found: data.output_dim(),
            });
        }
        let encoded: Vec<Vec<f64>> = data.x.iter().map(|x| enc_dec.encode(x)).collect();
        let x = points_to_columns(&encoded, enc_dec.d_x)?;
        let y = points_to_columns(&data.y, norm.dim())?;
        Ok(Self {
            x,
            y,
            norm,
            kept: enc_dec.kept_nodes.min(norm.dim()),
        })
    }

    fn check(&self, net: &Mlp) -> Result<()> {
        if net.input_dim() != self.x.nrows() || net.output_dim() != self.y.nrows() {
            return Err(Error::invalid(format!(
                "network maps R^{} -> R^{}, data needs R^{} -> R^{}",
                net.input_dim(),
                net.output_dim(),
                self.x.nrows(),
                self.y.nrows()
            )));
        }
        Ok(())
    }

    fn residual_column(&self, out: &DMatrix<f64>, i: usize) -> Vec<f64> {
        (0..self.y.nrows())
            .map(|k| {
                let pred = if k < self.kept { out[(k, i)] } else { 0.0 };
                self.y[(k, i)] - pred
            })
            .collect()
    }

    pub fn loss(&self, net: &Mlp) -> Result<f64> {
        self.check(net)?;
        let out = net.forward_batch(&self.x)?;
        let m = self.x.ncols();
        let s: f64 = (0..m).map(|i| self.norm.norm(&self.residual_column(&out, i)).powi(2)).sum();
        Ok(s / m as f64)
    }

    /// Loss and its gradient in the layout of [`Mlp::parameters`].
    pub fn loss_and_gradient(&self, net: &Mlp) -> Result<(f64, Vec<f64>)> {
        self.check(net)?;
        let cache = net.forward_cached(&self.x)?;
        let out = cache.output();
        let m = self.x.ncols();
        let k = self.y.nrows();
        let mut grad_out = DMatrix::zeros(k, m);
        let mut total = 0.0;
        for i in 0..m {
            let r = self.residual_column(out, i);
            total += self.norm.norm(&r).powi(2);
            for (kk, g) in self.norm.squared_gradient(&r).into_iter().enumerate().take(self.kept) {
                grad_out[(kk, i)] = -g / m as f64;
            }
        }
        Ok((total / m as f64, net.backward(&self.x, &cache, &grad_out)))
    }
}

/// Full-batch Adam with a geometrically decaying learning rate and checkpointing: the
/// parameters are saved whenever the loss drops below `checkpoint_ratio` times the saved
/// loss or reaches a new minimum, and restored at the end if they beat the last iterate.
pub fn train(net: &Mlp, data: &TrainingSet, enc_dec: &EncoderDecoder, norm: &DiscreteNorm, cfg: &TrainConfig) -> Result<TrainOutcome> {
    let objective = Objective::new(data, enc_dec, norm)?;
    objective.check(net)?;
    let mut net = net.clone();
    let mut theta = net.parameters();
    let n = theta.len();
    let mut m1 = vec![0.0; n];
    let mut m2 = vec![0.0; n];
    let mut trace = Vec::with_capacity(cfg.epochs.min(1 << 20));
    let mut checkpoint = theta.clone();
    let mut checkpoint_loss = f64::INFINITY;
    let mut best = f64::INFINITY;
    let mut epochs_run = 0;
    for epoch in 0..cfg.epochs {
        let (loss, grad) = objective.loss_and_gradient(&net)?;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite(format!("loss {loss} at epoch {epoch}")));
        }
        trace.push(loss);
        if loss / checkpoint_loss < cfg.checkpoint_ratio || loss < best {
            checkpoint.copy_from_slice(&theta);
            checkpoint_loss = loss;
        }
        best = best.min(loss);
        if loss < cfg.tol {
            break;
        }
        epochs_run = epoch + 1;
        let lr = cfg.learning_rate(epoch);
        let t = (epoch + 1) as i32;
        let c1 = 1.0 - cfg.beta1.powi(t);
        let c2 = 1.0 - cfg.beta2.powi(t);
        for i in 0..n {
            m1[i] = cfg.beta1 * m1[i] + (1.0 - cfg.beta1) * grad[i];
            m2[i] = cfg.beta2 * m2[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
            theta[i] -= lr * (m1[i] / c1) / ((m2[i] / c2).sqrt() + cfg.adam_eps);
        }
        net.set_parameters(&theta)?;
    }
    let mut final_loss = objective.loss(&net)?;
    if !final_loss.is_finite() {
        return Err(Error::NonFinite(format!("final loss {final_loss}")));
    }
    let restored = checkpoint_loss < final_loss;
    if restored {
        net.set_parameters(&checkpoint)?;
        final_loss = checkpoint_loss;
    }
    Ok(TrainOutcome {
        net,
        loss_trace: trace,
        final_loss,
        checkpoint_loss,
        restored,
        epochs_run,
    })
}

/// Largest relative deviation `‖g − g_fd‖_∞ / ‖g_fd‖_∞` between the backpropagated gradient and
/// central finite differences with step `h`.
pub fn gradient_check(net: &Mlp, objective: &Objective<'_>, h: f64) -> Result<f64> {
    let (_, grad) = objective.loss_and_gradient(net)?;
    let theta = net.parameters();
    let mut probe = net.clone();
    let mut fd = vec![0.0; theta.len()];
    let mut shifted = theta.clone();
    for i in 0..theta.len() {
        shifted[i] = theta[i] + h;
        probe.set_parameters(&shifted)?;
        let up = objective.loss(&probe)?;
        shifted[i] = theta[i] - h;
        probe.set_parameters(&shifted)?;
        let down = objective.loss(&probe)?;
        shifted[i] = theta[i];
        fd[i] = (up - down) / (2.0 * h);
    }
    let scale = fd.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = fd.iter().zip(&grad).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(if scale == 0.0 { diff } else { diff / scale })
}
