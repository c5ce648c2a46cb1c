use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::emulator::{build_feature_network, compose_linear, FeatureNetwork};
use super::mlp::{points_to_columns, Mlp};
use crate::error::{Error, Result};
use crate::legendre::DiscreteNorm;
use crate::multiindex::{IndexSet, MultiIndex};
use crate::operators::TrainingSet;
use crate::polyfit::{PolyFitResult, SVD_RELATIVE_TOL};
use crate::sampling::stream_rng;

/// Orthonormal basis (columns) of `ker A` for an `m × n` matrix, from the SVD of `A` padded
/// with zero rows to a square matrix.
pub fn null_space(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, n) = a.shape();
    let mut padded = DMatrix::zeros(m.max(n), n);
    padded.rows_mut(0, m).copy_from(a);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let smax = svd.singular_values.max();
    let tol = SVD_RELATIVE_TOL * smax.max(f64::MIN_POSITIVE);
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= tol)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinimizerOptions {
    /// Number of first-order emulators used for the correction (`r > m`).
    pub r: usize,
    /// Length of the null-space component.
    pub z_scale: f64,
    pub seed: u64,
    /// Emulation accuracy of every `N_ν`.
    pub delta: f64,
    pub grid_points: usize,
}

impl Default for MinimizerOptions {
    fn default() -> Self {
        Self {
            r: 0,
            z_scale: 0.0,
            seed: 0,
            delta: 1e-5,
            grid_points: 20_000,
        }
    }
}

/// Network that interpolates the training data while agreeing with an emulated polynomial
/// fit up to a small correction, plus the ingredients of the construction.
#[derive(Clone, Debug)]
pub struct InterpolatingMinimizer {
    pub net: Mlp,
    pub features: FeatureNetwork,
    /// `B_ij = N_{e_j}(x_i)/√r`.
    pub b: DMatrix<f64>,
    pub sigma_min: f64,
    /// `B†e` (`r × K`).
    pub correction: DMatrix<f64>,
    /// Unit vector of `ker B` (zero when `z_scale = 0`).
    pub null_vector: DVector<f64>,
    pub direction: Vec<f64>,
    /// Values of the emulated polynomial fit at the training points.
    pub fit_values: Vec<Vec<f64>>,
    /// `max_i ‖N(x_i) − Y_i‖_Y`.
    pub training_residual: f64,
}

/// Builds `p̄ = p̃ + Σ_j (B†e + z y)_j N_{e_j}`: `p̃` emulates the polynomial fit, `B` holds
/// the realized first-order emulators at the samples, `e = (Y − p̃(x))/√r`, and `z` is a
/// seeded unit vector of `ker B` scaled by `z_scale`, paired with the unit output
/// direction `y ∝ (1,…,1)`.
pub fn build_interpolating_minimizer(fit: &PolyFitResult, data: &TrainingSet, norm: &DiscreteNorm, opts: &MinimizerOptions) -> Result<InterpolatingMinimizer> {
    let m = data.len();
    let r = opts.r;
    if r <= m {
        return Err(Error::invalid(format!("need r > m, got r = {r}, m = {m}")));
    }
    let d_in = data.input_dim();
    if d_in < r {
        return Err(Error::invalid(format!("input dimension {d_in} is below r = {r}; pad the encoder")));
    }
    let support = fit.expansion.support();
    let k = fit.expansion.output_dim();
    if k != norm.dim() || data.output_dim() != k {
        return Err(Error::DimensionMismatch {
            expected: norm.dim(),
            found: k,
        });
    }
    let firsts: Vec<MultiIndex> = (1..=r).map(MultiIndex::unit).collect();
    let mut all: Vec<MultiIndex> = support.iter().cloned().collect();
    all.extend(firsts.iter().cloned());
    let union = IndexSet::new(all, d_in)?;
    let features = build_feature_network(&union, d_in, opts.delta, opts.grid_points)?;
    let phi = features.net.forward_batch(&points_to_columns(&data.x, d_in)?)?;

    let mut c_fit = DMatrix::zeros(k, union.len());
    for (i, nu) in support.iter().enumerate() {
        let col = union.position(nu).expect("support is contained in the union");
        for kk in 0..k {
            c_fit[(kk, col)] = fit.expansion.coefficients()[(i, kk)];
        }
    }
    let fitted = &c_fit * &phi;
    let sqrt_r = (r as f64).sqrt();
    let first_pos: Vec<usize> = firsts.iter().map(|e| union.position(e).expect("present")).collect();
    let b = DMatrix::from_fn(m, r, |i, j| phi[(first_pos[j], i)] / sqrt_r);
    let e = DMatrix::from_fn(m, k, |i, kk| (data.y[i][kk] - fitted[(kk, i)]) / sqrt_r);

    let svd = b.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let sigma_min = svd.singular_values.min();
    let tol = SVD_RELATIVE_TOL * smax;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    if rank < m {
        return Err(Error::RankDeficient { rank, expected: m });
    }
    let correction = svd.solve(&e, tol).expect("u and v were computed");

    let null_vector = if opts.z_scale == 0.0 {
        DVector::zeros(r)
    } else {
        let basis = null_space(&b);
        let mut rng = stream_rng(opts.seed, 0);
        let g = DVector::from_fn(basis.ncols(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let z = &basis * g;
        &z / z.norm()
    };
    let ones = vec![1.0; k];
    let scale = norm.norm(&ones);
    let direction: Vec<f64> = ones.iter().map(|v| v / scale).collect();

    let mut c_total = c_fit;
    for (j, &col) in first_pos.iter().enumerate() {
        for kk in 0..k {
            c_total[(kk, col)] += correction[(j, kk)] + opts.z_scale * null_vector[j] * direction[kk];
        }
    }
    let net = compose_linear(&features.net, &c_total)?;
    let outputs = net.forward_points(&data.x)?;
    let training_residual = outputs
        .iter()
        .zip(&data.y)
        .map(|(o, y)| norm.distance(o, y))
        .fold(0.0, f64::max);
    let fit_values = (0..m).map(|i| fitted.column(i).iter().copied().collect()).collect();
    Ok(InterpolatingMinimizer {
        net,
        features,
        b,
        sigma_min,
        correction,
        null_vector,
        direction,
        fit_values,
        training_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_a_row() {
        let a = DMatrix::from_row_slice(1, 2, &[0.6, -0.3]);
        let ns = null_space(&a);
        assert_eq!(ns.ncols(), 1);
        let expected = DVector::from_column_slice(&[0.3, 0.6]).normalize();
        let u = ns.column(0);
        assert!((u - &expected).norm() < 1e-14 || (u + &expected).norm() < 1e-14);
    }

    #[test]
    fn null_space_dimension() {
        let a = DMatrix::from_fn(3, 7, |i, j| ((i * i * 7 + j * j + i * j) as f64).sin());
        let ns = null_space(&a);
        assert_eq!(ns.ncols(), 4);
        assert!((&a * &ns).amax() < 1e-12);
        assert!((ns.transpose() * &ns - DMatrix::identity(4, 4)).amax() < 1e-12);
    }
}
