//! Polynomial training problems over a fixed index set: least squares, budgeted greedy
//! selection, and empirical constants of the sampling operator.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand_distr::StandardNormal;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::legendre::{DiscreteNorm, NormKind, PsiTable, VectorExpansion};
use crate::multiindex::{IndexSet, WeightKind, WeightSystem};
use crate::sampling::stream_rng;

/// Relative singular-value cutoff of the minimum-norm solver.
pub const SVD_RELATIVE_TOL: f64 = 1e-12;

/// Normalized design matrix `A_ij = Ψ_{ν_j}(x_i)/√m`.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignMatrix {
    matrix: DMatrix<f64>,
    columns: IndexSet,
}

impl DesignMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn columns(&self) -> &IndexSet {
        &self.columns
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    /// Submatrix on the given column positions.
    pub fn restrict(&self, positions: &[usize]) -> DesignMatrix {
        let mut sorted = positions.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        DesignMatrix {
            matrix: self.matrix.select_columns(&sorted),
            columns: self.columns.subset(&sorted),
        }
    }
}

pub fn assemble_design(lambda: &IndexSet, x: &[Vec<f64>]) -> Result<DesignMatrix> {
    if x.is_empty() {
        return Err(Error::invalid("need at least one sample point"));
    }
    if let Some(bad) = x.iter().find(|p| p.len() < lambda.dim_bound()) {
        return Err(Error::DimensionMismatch {
            expected: lambda.dim_bound(),
            found: bad.len(),
        });
    }
    let m = x.len();
    let n = lambda.len();
    let scale = 1.0 / (m as f64).sqrt();
    let degree = lambda.max_total_degree() as usize;
    let rows: Vec<Vec<f64>> = x
        .par_iter()
        .map(|p| {
            let table = PsiTable::new(&p[..lambda.dim_bound()], degree);
            lambda.iter().map(|nu| table.eval(nu) * scale).collect()
        })
        .collect();
    let matrix = DMatrix::from_fn(m, n, |i, j| rows[i][j]);
    Ok(DesignMatrix {
        matrix,
        columns: lambda.clone(),
    })
}

/// Result of a polynomial fit.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyFitResult {
    pub expansion: VectorExpansion,
    /// `(1/m Σ ‖Y_i − p(x_i)‖²_Y)^{1/2}`.
    pub residual_rms: f64,
    pub selected_set: IndexSet,
    pub alpha_estimate: Option<f64>,
    /// Numerical rank of the (restricted) design matrix.
    pub rank: usize,
    pub rank_deficient: bool,
    /// Residual after each greedy step, or the loss trace of the iterative solver.
    pub history: Vec<f64>,
}

impl PolyFitResult {
    /// `key = value` metadata accompanying the expansion CSV.
    pub fn sidecar(&self, budget: Option<f64>, w: Option<&WeightSystem>) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "residual_rms = {:.16e}", self.residual_rms);
        let _ = writeln!(out, "rank = {}", self.rank);
        let _ = writeln!(out, "rank_deficient = {}", self.rank_deficient);
        if let Some(a) = self.alpha_estimate {
            let _ = writeln!(out, "alpha_estimate = {a:.16e}");
        }
        if let Some(k) = budget {
            let _ = writeln!(out, "budget = {k}");
        }
        if let Some(w) = w {
            let _ = writeln!(out, "xi = {}", w.xi());
            let _ = writeln!(
                out,
                "weighted_cardinality_v = {:.16e}",
                crate::multiindex::weighted_cardinality(&self.selected_set, WeightKind::V, w)
            );
        }
        let labels: Vec<String> = self.selected_set.iter().map(crate::legendre::index_label).collect();
        let _ = writeln!(out, "selected = {}", labels.join(","));
        out
    }

    /// Writes `<stem>.csv` (coefficients) and `<stem>.meta` (sidecar).
    pub fn save(&self, stem: &std::path::Path, budget: Option<f64>, w: Option<&WeightSystem>) -> Result<()> {
        std::fs::write(stem.with_extension("csv"), self.expansion.to_csv())?;
        std::fs::write(stem.with_extension("meta"), self.sidecar(budget, w))?;
        Ok(())
    }
}

fn data_matrix(y: &[Vec<f64>], m: usize) -> Result<DMatrix<f64>> {
    if y.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: y.len(),
        });
    }
    let k = y.first().map_or(0, Vec::len);
    if y.iter().any(|r| r.len() != k) {
        return Err(Error::invalid("data rows have different lengths"));
    }
    let scale = 1.0 / (m as f64).sqrt();
    Ok(DMatrix::from_fn(m, k, |i, j| y[i][j] * scale))
}

struct Solution {
    x: DMatrix<f64>,
    rank: usize,
}

fn solve_min_norm(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Solution {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = SVD_RELATIVE_TOL * smax;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    let x = if rank == 0 {
        DMatrix::zeros(a.ncols(), b.ncols())
    } else {
        svd.solve(b, tol).expect("u and v were computed")
    };
    Solution { x, rank }
}

/// Least-squares solve: pivoted QR for tall full-rank systems, otherwise the SVD
/// minimum-norm solution.
fn solve_ls(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Solution {
    let (m, n) = a.shape();
    if n == 0 {
        return Solution {
            x: DMatrix::zeros(0, b.ncols()),
            rank: 0,
        };
    }
    if m >= n {
        let qr = a.clone().col_piv_qr();
        let r = qr.r();
        let diag_max = (0..n).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
        let full_rank = diag_max > 0.0 && (0..n).all(|i| r[(i, i)].abs() > SVD_RELATIVE_TOL * diag_max);
        if full_rank {
            let mut qtb = b.clone();
            qr.q_tr_mul(&mut qtb);
            let mut top = qtb.rows(0, n).into_owned();
            let r_square = r.columns(0, n).into_owned();
            if r_square.solve_upper_triangular_mut(&mut top) {
                qr.p().inv_permute_rows(&mut top);
                if top.iter().all(|v| v.is_finite()) {
                    return Solution { x: top, rank: n };
                }
            }
        }
    }
    solve_min_norm(a, b)
}

fn fit_result(design: &DesignMatrix, y: &[Vec<f64>], coefficients: DMatrix<f64>, norm: &DiscreteNorm, rank: usize) -> Result<PolyFitResult> {
    let m = design.rows();
    let expansion = VectorExpansion::new(design.columns.clone(), coefficients)?;
    let residual_rms = residual_rms(design, y, expansion.coefficients(), norm);
    Ok(PolyFitResult {
        selected_set: design.columns.clone(),
        expansion,
        residual_rms,
        alpha_estimate: None,
        rank,
        rank_deficient: rank < m.min(design.cols()),
        history: Vec::new(),
    })
}

fn residual_rows(design: &DesignMatrix, y: &[Vec<f64>], c: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let m = design.rows();
    let fitted = &design.matrix * c * (m as f64).sqrt();
    y.iter()
        .enumerate()
        .map(|(i, yi)| yi.iter().enumerate().map(|(k, v)| v - fitted[(i, k)]).collect())
        .collect()
}

fn residual_rms(design: &DesignMatrix, y: &[Vec<f64>], c: &DMatrix<f64>, norm: &DiscreteNorm) -> f64 {
    let rows = residual_rows(design, y, c);
    let s: f64 = rows.iter().map(|r| norm.norm(r).powi(2)).sum();
    (s / rows.len() as f64).sqrt()
}

/// Empirical loss `1/m Σ ‖Y_i − p(x_i)‖²_Y` of a coefficient matrix.
pub fn empirical_loss(design: &DesignMatrix, y: &[Vec<f64>], c: &DMatrix<f64>, norm: &DiscreteNorm) -> f64 {
    residual_rms(design, y, c, norm).powi(2)
}

/// Minimizer of the empirical loss over `span{Ψ_ν : ν ∈ Λ}`. The weighted-euclidean loss
/// decouples over output nodes and is solved directly; other norms are handed to
/// [`iterative_fit`].
pub fn least_squares_fit(design: &DesignMatrix, y: &[Vec<f64>], norm: &DiscreteNorm) -> Result<PolyFitResult> {
    if norm.kind() != NormKind::WeightedEuclidean {
        return iterative_fit(design, y, norm, &IterativeOptions::default());
    }
    euclidean_fit(design, y, norm)
}

fn euclidean_fit(design: &DesignMatrix, y: &[Vec<f64>], norm: &DiscreteNorm) -> Result<PolyFitResult> {
    let b = data_matrix(y, design.rows())?;
    if b.ncols() != norm.dim() {
        return Err(Error::DimensionMismatch {
            expected: norm.dim(),
            found: b.ncols(),
        });
    }
    let sol = solve_ls(&design.matrix, &b);
    fit_result(design, y, sol.x, norm, sol.rank)
}

/// Stopping rules of [`iterative_fit`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterativeOptions {
    pub max_iterations: usize,
    pub relative_tol: f64,
}

impl Default for IterativeOptions {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            relative_tol: 1e-10,
        }
    }
}

/// Gradient descent with backtracking on the empirical loss in the configured norm,
/// started from the euclidean least-squares solution. `history` holds the loss per
/// accepted step (first entry: starting loss).
pub fn iterative_fit(design: &DesignMatrix, y: &[Vec<f64>], norm: &DiscreteNorm, opts: &IterativeOptions) -> Result<PolyFitResult> {
    let euclid = DiscreteNorm::new(NormKind::WeightedEuclidean, norm.weights().to_vec())?;
    let start = euclidean_fit(design, y, &euclid)?;
    let m = design.rows();
    let sqrt_m = (m as f64).sqrt();
    let mut c = start.expansion.coefficients().clone();
    let mut loss = empirical_loss(design, y, &c, norm);
    let mut history = vec![loss];
    let mut step = 1.0;
    for _ in 0..opts.max_iterations {
        let rows = residual_rows(design, y, &c);
        let mut g_rows = DMatrix::zeros(m, norm.dim());
        for (i, r) in rows.iter().enumerate() {
            for (k, g) in norm.squared_gradient(r).into_iter().enumerate() {
                g_rows[(i, k)] = g;
            }
        }
        // loss = 1/m Σ ‖y_i − √m A_i c‖², so ∇ = −(1/√m) Aᵀ G
        let grad = -(design.matrix.transpose() * g_rows) / sqrt_m;
        let g2 = grad.norm_squared();
        if g2 == 0.0 || !g2.is_finite() {
            break;
        }
        step *= 2.0;
        let mut accepted = None;
        while step > 1e-20 {
            let trial = &c - &grad * step;
            let l = empirical_loss(design, y, &trial, norm);
            if l <= loss - 1e-4 * step * g2 {
                accepted = Some((trial, l));
                break;
            }
            step *= 0.5;
        }
        let Some((next, next_loss)) = accepted else { break };
        let change = (loss - next_loss) / loss.max(f64::MIN_POSITIVE);
        c = next;
        loss = next_loss;
        history.push(loss);
        if change <= opts.relative_tol {
            break;
        }
    }
    let mut out = fit_result(design, y, c, norm, start.rank)?;
    out.history = history;
    Ok(out)
}

/// Budgeted greedy selection: starting from the empty set, repeatedly add the index
/// with the largest `‖a_νᵀ r‖_Y / v_ν` among those keeping `|S|_v ≤ k`, refitting by
/// least squares after each addition.
pub fn greedy_sparse_fit(design: &DesignMatrix, y: &[Vec<f64>], k: f64, w: &WeightSystem, norm: &DiscreteNorm) -> Result<PolyFitResult> {
    if !w.within_budget(1.0, k) {
        return Err(Error::invalid(format!("budget {k} is below the weight of the zero index")));
    }
    let b = data_matrix(y, design.rows())?;
    let euclid = DiscreteNorm::new(NormKind::WeightedEuclidean, norm.weights().to_vec())?;
    let costs: Vec<f64> = design.columns.iter().map(|nu| w.squared(nu, WeightKind::V)).collect();
    let column_norms: Vec<f64> = (0..design.cols()).map(|j| design.matrix.column(j).norm()).collect();
    let mut selected: Vec<usize> = Vec::new();
    let mut used = 0.0;
    let mut residual = b.clone();
    let scale = b.norm();
    let mut history = vec![norm_rms(&residual, &euclid)];
    let mut coefficients = DMatrix::zeros(0, b.ncols());
    let mut rank = 0;
    loop {
        if residual.norm() <= 1e-14 * scale {
            break;
        }
        let corr = design.matrix.transpose() * &residual;
        let mut best: Option<(usize, f64)> = None;
        for j in 0..design.cols() {
            if selected.contains(&j) || !w.within_budget(used + costs[j], k) || column_norms[j] == 0.0 {
                continue;
            }
            let row: Vec<f64> = corr.row(j).iter().copied().collect();
            let score = euclid.norm(&row) / costs[j].sqrt();
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((j, score));
            }
        }
        let Some((j, _)) = best else { break };
        selected.push(j);
        selected.sort_unstable();
        used += costs[j];
        let sub = design.matrix.select_columns(&selected);
        let sol = solve_ls(&sub, &b);
        residual = &b - &sub * &sol.x;
        coefficients = sol.x;
        rank = sol.rank;
        let r = norm_rms(&residual, &euclid);
        // refits on nested supports cannot increase the residual; guard rounding
        history.push(r.min(*history.last().expect("history starts non-empty")));
    }
    let restricted = design.restrict(&selected);
    let mut out = fit_result(&restricted, y, coefficients, norm, rank)?;
    out.history = history;
    Ok(out)
}

fn norm_rms(scaled_residual: &DMatrix<f64>, norm: &DiscreteNorm) -> f64 {
    // rows of the scaled residual are r_i/√m, so Σ_i ‖row_i‖² is the mean squared residual
    let s: f64 = scaled_residual
        .row_iter()
        .map(|row| {
            let v: Vec<f64> = row.iter().copied().collect();
            norm.norm(&v).powi(2)
        })
        .sum();
    s.sqrt()
}

/// Outcome of [`alpha_probe`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaProbe {
    /// `min_t ‖p_t‖_disc / ‖p_t‖_{L²}`; an upper bound on the true constant.
    pub value: f64,
    pub trials: usize,
}

/// Empirical lower constant of the sampling operator on budget-feasible polynomials.
/// Each trial draws a random support with `|S|_v ≤ k` (random visiting order, indices
/// added while the budget allows) and Gaussian coefficients on it; the probe is the
/// smallest observed ratio of discrete to continuous norm.
pub fn alpha_probe(lambda: &IndexSet, k: f64, w: &WeightSystem, x: &[Vec<f64>], trials: usize, seed: u64) -> Result<AlphaProbe> {
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let design = assemble_design(lambda, x)?;
    let costs: Vec<f64> = lambda.iter().map(|nu| w.squared(nu, WeightKind::V)).collect();
    let ratios: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, t as u64);
            let mut order: Vec<usize> = (0..lambda.len()).collect();
            order.shuffle(&mut rng);
            let mut used = 0.0;
            let mut c = DVector::zeros(lambda.len());
            for j in order {
                if w.within_budget(used + costs[j], k) {
                    used += costs[j];
                    c[j] = rng.sample(StandardNormal);
                }
            }
            let cn = c.norm();
            if cn == 0.0 {
                return f64::INFINITY;
            }
            (&design.matrix * &c).norm() / cn
        })
        .collect();
    let value = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    if !value.is_finite() {
        return Err(Error::invalid("no index of the set fits within the budget"));
    }
    Ok(AlphaProbe { value, trials })
}

/// Failure probability entering the log factor `L = log⁴ m + log(1/ε)`.
pub const RATE_EPSILON: f64 = 0.01;

/// Theoretical error-decay curves with all constants set to one.
#[derive(Clone, Debug, PartialEq)]
pub struct RateCurve {
    pub m: Vec<f64>,
    pub exponent_q2: f64,
    pub exponent_qinf: f64,
    /// `m^{exponent}` (pure power laws).
    pub q2: Vec<f64>,
    pub qinf: Vec<f64>,
    /// `(m/L)^{exponent}` with the log factor of the sample-complexity bound.
    pub q2_log: Vec<f64>,
    pub qinf_log: Vec<f64>,
}

/// Exponent `θ + 1 − 1/q − 1/p` with `θ = 0` (Hilbert) or `1/2` (Banach).
pub fn rate_exponent(p: f64, q: f64, hilbert: bool) -> f64 {
    let theta = if hilbert { 0.0 } else { 0.5 };
    let inv_q = if q.is_infinite() { 0.0 } else { 1.0 / q };
    theta + 1.0 - inv_q - 1.0 / p
}

pub fn predicted_rates(b: &[f64], p: f64, m_values: &[f64], hilbert: bool) -> Result<RateCurve> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("p = {p} must lie in (0,1)")));
    }
    if b.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::invalid("b must be finite and nonnegative"));
    }
    if m_values.iter().any(|&m| !(m >= 1.0)) {
        return Err(Error::invalid("sample counts must be >= 1"));
    }
    let e2 = rate_exponent(p, 2.0, hilbert);
    let einf = rate_exponent(p, f64::INFINITY, hilbert);
    let log_factor = |m: f64| m / (m.ln().powi(4) + (1.0 / RATE_EPSILON).ln());
    Ok(RateCurve {
        m: m_values.to_vec(),
        exponent_q2: e2,
        exponent_qinf: einf,
        q2: m_values.iter().map(|m| m.powf(e2)).collect(),
        qinf: m_values.iter().map(|m| m.powf(einf)).collect(),
        q2_log: m_values.iter().map(|&m| log_factor(m).powf(e2)).collect(),
        qinf_log: m_values.iter().map(|&m| log_factor(m).powf(einf)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiindex::{hyperbolic_cross_in, MultiIndex};
    use crate::sampling::uniform_point;

    fn points(m: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        (0..m).map(|i| uniform_point(&mut stream_rng(seed, i as u64), d)).collect()
    }

    #[test]
    fn design_examples() {
        let x = points(9, 2, 1);
        let a = assemble_design(&IndexSet::from_indices([MultiIndex::zero()]), &x).unwrap();
        assert!(a.matrix().iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-15));
        assert!((a.matrix().column(0).norm() - 1.0).abs() < 1e-15);
        let e1 = IndexSet::from_indices([MultiIndex::unit(1)]);
        let single = assemble_design(&e1, &[vec![1.0, 0.3]]).unwrap();
        assert!((single.matrix()[(0, 0)] - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_data_gives_zero_fit() {
        let lambda = hyperbolic_cross_in(4, 2).unwrap();
        let x = points(20, 2, 2);
        let a = assemble_design(&lambda, &x).unwrap();
        let norm = DiscreteNorm::unit(NormKind::WeightedEuclidean, 3);
        let fit = least_squares_fit(&a, &vec![vec![0.0; 3]; 20], &norm).unwrap();
        assert!(fit.expansion.coefficients().iter().all(|&c| c == 0.0));
        assert_eq!(fit.residual_rms, 0.0);
    }

    #[test]
    fn recovers_a_planted_term() {
        let lambda = hyperbolic_cross_in(5, 3).unwrap();
        let x = points(40, 3, 3);
        let v = [0.5, -1.0, 2.0];
        let e1 = MultiIndex::unit(1);
        let y: Vec<Vec<f64>> = x
            .iter()
            .map(|p| {
                let psi = crate::legendre::eval_tensor(&e1, p).unwrap();
                v.iter().map(|c| c * psi).collect()
            })
            .collect();
        let a = assemble_design(&lambda, &x).unwrap();
        let norm = DiscreteNorm::trapezoid(NormKind::WeightedEuclidean, 3).unwrap();
        let fit = least_squares_fit(&a, &y, &norm).unwrap();
        assert!(fit.residual_rms <= 1e-10);
        assert!(!fit.rank_deficient);
        for nu in lambda.iter() {
            let c = fit.expansion.coefficient(nu).unwrap();
            let target: Vec<f64> = if *nu == e1 { v.to_vec() } else { vec![0.0; 3] };
            for (a, b) in c.iter().zip(&target) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn underdetermined_systems_interpolate_with_minimum_norm() {
        let lambda = hyperbolic_cross_in(8, 3).unwrap();
        let x = points(6, 3, 4);
        let y: Vec<Vec<f64>> = x.iter().map(|p| vec![p[0].sin(), p[1] * p[2]]).collect();
        let a = assemble_design(&lambda, &x).unwrap();
        assert!(a.rows() < a.cols());
        let norm = DiscreteNorm::unit(NormKind::WeightedEuclidean, 2);
        let fit = least_squares_fit(&a, &y, &norm).unwrap();
        assert!(fit.residual_rms <= 1e-10);
        // the minimum-norm solution lies in the row space of A
        let c = fit.expansion.coefficients();
        let proj = a.matrix().transpose() * (a.matrix() * a.matrix().transpose()).try_inverse().unwrap() * a.matrix() * c;
        assert!((proj - c).norm() < 1e-9);
    }

    #[test]
    fn duplicate_rows_are_flagged() {
        let lambda = hyperbolic_cross_in(3, 1).unwrap();
        let x = vec![vec![0.3]; 5];
        let a = assemble_design(&lambda, &x).unwrap();
        let norm = DiscreteNorm::unit(NormKind::WeightedEuclidean, 1);
        let fit = least_squares_fit(&a, &vec![vec![1.0]; 5], &norm).unwrap();
        assert!(fit.rank_deficient);
        assert_eq!(fit.rank, 1);
        assert!(fit.residual_rms < 1e-12);
    }

    #[test]
    fn normal_equations_hold() {
        let lambda = hyperbolic_cross_in(6, 2).unwrap();
        let x = points(50, 2, 5);
        let y: Vec<Vec<f64>> = x.iter().map(|p| vec![(p[0] + 2.0 * p[1]).exp(), 1.0 / (2.0 + p[0])]).collect();
        let a = assemble_design(&lambda, &x).unwrap();
        let norm = DiscreteNorm::unit(NormKind::WeightedEuclidean, 2);
        let fit = least_squares_fit(&a, &y, &norm).unwrap();
        let b = data_matrix(&y, 50).unwrap();
        let r = &b - a.matrix() * fit.expansion.coefficients();
        let g = a.matrix().transpose() * r;
        assert!(g.amax() <= 1e-9 * b.amax().max(1.0));
    }

    #[test]
    fn l4_descent_does_not_increase_the_loss() {
        let lambda = hyperbolic_cross_in(4, 2).unwrap();
        let x = points(30, 2, 6);
        let y: Vec<Vec<f64>> = x.iter().map(|p| (0..5).map(|k| (p[0] * k as f64).cos() + p[1].powi(3)).collect()).collect();
        let a = assemble_design(&lambda, &x).unwrap();
        let norm = DiscreteNorm::trapezoid(NormKind::WeightedL4, 5).unwrap();
        let fit = least_squares_fit(&a, &y, &norm).unwrap();
        let start = fit.history[0];
        assert!(fit.residual_rms.powi(2) <= start + 1e-15);
        assert!(fit.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn greedy_examples() {
        let lambda = hyperbolic_cross_in(4, 2).unwrap();
        let x = points(60, 2, 7);
        let y: Vec<Vec<f64>> = x.iter().map(|p| vec![1.0 + p[0] + 0.3 * p[1] * p[0]]).collect();
        let a = assemble_design(&lambda, &x).unwrap();
        let norm = DiscreteNorm::unit(NormKind::WeightedEuclidean, 1);
        let w = WeightSystem::new(0.0).unwrap();

        let tiny = greedy_sparse_fit(&a, &y, 1.5, &w, &norm).unwrap();
        assert_eq!(tiny.selected_set.as_slice(), &[MultiIndex::zero()]);

        let full_budget = crate::multiindex::weighted_cardinality(&lambda, WeightKind::V, &w);
        let greedy = greedy_sparse_fit(&a, &y, full_budget, &w, &norm).unwrap();
        let ls = least_squares_fit(&a, &y, &norm).unwrap();
        assert!((greedy.residual_rms - ls.residual_rms).abs() < 1e-10);
        assert!(greedy.history.windows(2).all(|h| h[1] <= h[0]));
        assert!(greedy.residual_rms < 1e-10);
    }

    #[test]
    fn alpha_probe_examples() {
        let w = WeightSystem::new(0.0).unwrap();
        let x = points(17, 3, 8);
        let constants = IndexSet::from_indices([MultiIndex::zero()]);
        assert!((alpha_probe(&constants, 1.0, &w, &x, 5, 0).unwrap().value - 1.0).abs() < 1e-14);

        let lambda = hyperbolic_cross_in(3, 2).unwrap();
        let big = 1e9;
        let distinct = alpha_probe(&lambda, big, &w, &[vec![-0.7, 0.2], vec![0.5, -0.4]], 50, 1).unwrap();
        let duplicated = alpha_probe(&lambda, big, &w, &[vec![-0.7, 0.2], vec![-0.7, 0.2]], 50, 1).unwrap();
        assert!(duplicated.value < distinct.value);
    }

    #[test]
    fn rate_exponents() {
        assert!((rate_exponent(0.5, 2.0, true) + 1.5).abs() < 1e-15);
        assert!((rate_exponent(2.0 / 3.0, 2.0, true) + 1.0).abs() < 1e-15);
        assert!((rate_exponent(0.6, 2.0, false) - rate_exponent(0.6, 2.0, true) - 0.5).abs() < 1e-15);
        let c = predicted_rates(&[1.0], 0.5, &[10.0, 100.0], true).unwrap();
        assert!((c.q2[1] / c.q2[0] - 10f64.powf(-1.5)).abs() < 1e-15);
        assert!(predicted_rates(&[1.0], 1.0, &[10.0], true).is_err());
    }
}
