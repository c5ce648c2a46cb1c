//! Orthonormal Legendre polynomials, vector-valued expansions and the norms used to
//! measure them.
//!
//! `ψ_n = √(2n+1) P_n` is orthonormal with respect to the uniform probability measure on
//! `[-1,1]`, and `Ψ_ν(x) = ∏_k ψ_{ν_k}(x_k)` is its tensor product. Output vectors live in
//! `R^K` equipped with a [`DiscreteNorm`].

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::multiindex::{IndexSet, MultiIndex};
use crate::quadrature::SparseGridRule;
use crate::sampling::{halton_points, mix_seed, sign_corners};

/// Unnormalized Legendre polynomial `P_n(x)` with `P_n(1) = 1`.
pub fn legendre_p(n: usize, x: f64) -> f64 {
    legendre_p_with_derivative(n, x).0
}

/// `(P_n(x), P_n'(x))` via the three-term recurrence.
pub fn legendre_p_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    let (mut dp_prev, mut dp) = (0.0, 1.0);
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        // P'_{k+1} = P'_{k-1} + (2k+1) P_k
        let dp_next = dp_prev + (2.0 * kf + 1.0) * p;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
    }
    (p, dp)
}

/// Orthonormal `ψ_n(x) = √(2n+1) P_n(x)`.
pub fn eval_psi(n: usize, x: f64) -> f64 {
    ((2 * n + 1) as f64).sqrt() * legendre_p(n, x)
}

/// `Ψ_ν(x) = ∏_{k ∈ supp ν} ψ_{ν_k}(x_k)`.
pub fn eval_tensor(nu: &MultiIndex, x: &[f64]) -> Result<f64> {
    if nu.max_dim() > x.len() {
        return Err(Error::DimensionMismatch {
            expected: nu.max_dim(),
            found: x.len(),
        });
    }
    Ok(nu.iter().map(|(k, e)| eval_psi(e as usize, x[k - 1])).product())
}

/// Values `ψ_n(x_k)` for all `n ≤ max_degree` at one point, reused across many indices.
#[derive(Clone, Debug)]
pub struct PsiTable {
    max_degree: usize,
    values: Vec<f64>,
}

impl PsiTable {
    pub fn new(x: &[f64], max_degree: usize) -> Self {
        let stride = max_degree + 1;
        let mut values = vec![0.0; x.len() * stride];
        for (k, &xk) in x.iter().enumerate() {
            let row = &mut values[k * stride..(k + 1) * stride];
            row[0] = 1.0;
            if max_degree >= 1 {
                row[1] = xk;
            }
            for n in 1..max_degree {
                let nf = n as f64;
                row[n + 1] = ((2.0 * nf + 1.0) * xk * row[n] - nf * row[n - 1]) / (nf + 1.0);
            }
            for (n, v) in row.iter_mut().enumerate() {
                *v *= ((2 * n + 1) as f64).sqrt();
            }
        }
        Self { max_degree, values }
    }

    /// `Ψ_ν` at the tabulated point. Caller guarantees support and degree are in range.
    pub fn eval(&self, nu: &MultiIndex) -> f64 {
        let stride = self.max_degree + 1;
        nu.iter()
            .map(|(k, e)| self.values[(k - 1) * stride + e as usize])
            .product()
    }
}

/// Roots of `P_n` together with its leading coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct LegendreRoots {
    pub roots: Vec<f64>,
    pub leading_coefficient: f64,
}

/// The `n` roots of `P_n`, strictly increasing. Newton iteration started from the
/// cosine (Chebyshev-type) guesses `cos(π(j − 1/4)/(n + 1/2))`.
pub fn legendre_roots(n: usize) -> Result<LegendreRoots> {
    if n == 0 {
        return Err(Error::invalid("P_0 has no roots"));
    }
    let nf = n as f64;
    let mut roots = vec![0.0; n];
    for j in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (j as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_p_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-14 {
                break;
            }
        }
        roots[j] = -x;
        roots[n - 1 - j] = x;
    }
    if n % 2 == 1 {
        roots[n / 2] = 0.0;
    }
    let mut leading = 1.0;
    for k in 0..n {
        leading *= (2 * k + 1) as f64 / (k + 1) as f64;
    }
    Ok(LegendreRoots {
        roots,
        leading_coefficient: leading,
    })
}

/// Kind of discrete output norm on `R^K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    /// `(Σ w_k y_k²)^{1/2}`, the Hilbert case.
    WeightedEuclidean,
    /// `(Σ w_k y_k⁴)^{1/4}`, a discretized `L⁴`.
    WeightedL4,
    /// `max_k |y_k|`.
    Sup,
}

impl NormKind {
    pub fn name(&self) -> &'static str {
        match self {
            NormKind::WeightedEuclidean => "weighted-euclidean",
            NormKind::WeightedL4 => "weighted-l4",
            NormKind::Sup => "sup",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "weighted-euclidean" | "euclidean" => Ok(NormKind::WeightedEuclidean),
            "weighted-l4" | "l4" => Ok(NormKind::WeightedL4),
            "sup" => Ok(NormKind::Sup),
            other => Err(Error::invalid(format!("unknown norm {other:?}"))),
        }
    }
}

/// Discrete norm on `R^K` with positive quadrature masses.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteNorm {
    kind: NormKind,
    weights: Vec<f64>,
}

impl DiscreteNorm {
    pub fn new(kind: NormKind, weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::invalid("norm weights must be positive and finite"));
        }
        Ok(Self { kind, weights })
    }

    /// Trapezoid masses of the uniform `K`-node grid on `[0,1]` (they sum to 1).
    pub fn trapezoid(kind: NormKind, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::invalid("a trapezoid grid needs at least two nodes"));
        }
        let h = 1.0 / (k - 1) as f64;
        let mut w = vec![h; k];
        w[0] = h / 2.0;
        w[k - 1] = h / 2.0;
        Self::new(kind, w)
    }

    /// Unit masses.
    pub fn unit(kind: NormKind, k: usize) -> Self {
        Self {
            kind,
            weights: vec![1.0; k],
        }
    }

    pub fn kind(&self) -> NormKind {
        self.kind
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn is_hilbert(&self) -> bool {
        self.kind == NormKind::WeightedEuclidean
    }

    pub fn norm(&self, y: &[f64]) -> f64 {
        debug_assert_eq!(y.len(), self.weights.len());
        match self.kind {
            NormKind::WeightedEuclidean => self
                .weights
                .iter()
                .zip(y)
                .map(|(w, v)| w * v * v)
                .sum::<f64>()
                .sqrt(),
            NormKind::WeightedL4 => self
                .weights
                .iter()
                .zip(y)
                .map(|(w, v)| w * (v * v) * (v * v))
                .sum::<f64>()
                .sqrt()
                .sqrt(),
            NormKind::Sup => y.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    /// Norm of `a − b`.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.norm(&diff)
    }

    /// Gradient of `y ↦ ‖y‖²` at `r` (a subgradient for the sup norm).
    pub fn squared_gradient(&self, r: &[f64]) -> Vec<f64> {
        let w = self.weights();
        match self.kind() {
            NormKind::WeightedEuclidean => r.iter().zip(w).map(|(v, wi)| 2.0 * wi * v).collect(),
            NormKind::WeightedL4 => {
                let n2 = self.norm(r).powi(2);
                if n2 == 0.0 {
                    return vec![0.0; r.len()];
                }
                r.iter().zip(w).map(|(v, wi)| 2.0 * wi * v * v * v / n2).collect()
            }
            NormKind::Sup => {
                let (k, v) = r
                    .iter()
                    .enumerate()
                    .fold((0, 0.0f64), |(bk, bv), (k, &v)| if v.abs() > bv.abs() { (k, v) } else { (bk, bv) });
                let mut g = vec![0.0; r.len()];
                if !r.is_empty() {
                    g[k] = 2.0 * v;
                }
                g
            }
        }
    }
}

/// Finite Legendre expansion `Σ_{ν∈S} c_ν Ψ_ν` with coefficients in `R^K`.
///
/// Coefficients are stored as an `|S| × K` matrix whose rows follow the support order.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorExpansion {
    support: IndexSet,
    coefficients: DMatrix<f64>,
}

impl VectorExpansion {
    pub fn new(support: IndexSet, coefficients: DMatrix<f64>) -> Result<Self> {
        if coefficients.nrows() != support.len() {
            return Err(Error::DimensionMismatch {
                expected: support.len(),
                found: coefficients.nrows(),
            });
        }
        Ok(Self {
            support,
            coefficients,
        })
    }

    pub fn zero(support: IndexSet, output_dim: usize) -> Self {
        let n = support.len();
        Self {
            support,
            coefficients: DMatrix::zeros(n, output_dim),
        }
    }

    pub fn support(&self) -> &IndexSet {
        &self.support
    }

    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coefficients
    }

    pub fn output_dim(&self) -> usize {
        self.coefficients.ncols()
    }

    /// Coefficient vector of `ν`, if it is in the support.
    pub fn coefficient(&self, nu: &MultiIndex) -> Option<Vec<f64>> {
        self.support
            .position(nu)
            .map(|i| self.coefficients.row(i).iter().copied().collect())
    }

    /// `Σ_ν c_ν Ψ_ν(x)`.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if self.support.dim_bound() > x.len() {
            return Err(Error::DimensionMismatch {
                expected: self.support.dim_bound(),
                found: x.len(),
            });
        }
        let table = PsiTable::new(x, self.support.max_total_degree() as usize);
        let mut out = vec![0.0; self.output_dim()];
        for (i, nu) in self.support.iter().enumerate() {
            let psi = table.eval(nu);
            for (o, c) in out.iter_mut().zip(self.coefficients.row(i).iter()) {
                *o += psi * c;
            }
        }
        Ok(out)
    }

    /// Coefficient-space `ℓ²` norm `(Σ_ν ‖c_ν‖²_2)^{1/2}`; equals the unweighted Bochner
    /// `L²` norm by Parseval.
    pub fn coefficient_norm(&self) -> f64 {
        self.coefficients.norm()
    }

    /// CSV: a header row of `dim:exp` labels (`0` for the zero index), then `K` rows of
    /// coefficients, one column per index.
    pub fn to_csv(&self) -> String {
        let mut out = self
            .support
            .iter()
            .map(index_label)
            .collect::<Vec<_>>()
            .join(",");
        out.push('\n');
        for k in 0..self.output_dim() {
            let row: Vec<String> = (0..self.support.len())
                .map(|i| format!("{:.16e}", self.coefficients[(i, k)]))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str, dim_bound: usize) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
        let indices = header
            .split(',')
            .map(parse_index_label)
            .collect::<Result<Vec<_>>>()?;
        let n = indices.len();
        let support = IndexSet::new(indices.clone(), dim_bound)?;
        if support.len() != n {
            return Err(Error::parse(1, "duplicate index labels"));
        }
        let rows = lines
            .enumerate()
            .map(|(r, line)| {
                line.split(',')
                    .map(|v| v.trim().parse::<f64>().map_err(|e| Error::parse(r + 2, e.to_string())))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let k = rows.len();
        let mut coefficients = DMatrix::zeros(n, k);
        for (kk, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::parse(kk + 2, format!("expected {n} columns")));
            }
            for (col, nu) in indices.iter().enumerate() {
                let i = support.position(nu).expect("index is in the support");
                coefficients[(i, kk)] = row[col];
            }
        }
        Self::new(support, coefficients)
    }
}

pub fn index_label(nu: &MultiIndex) -> String {
    if nu.is_zero() {
        "0".to_string()
    } else {
        nu.to_string()
    }
}

pub(crate) fn parse_index_label(label: &str) -> Result<MultiIndex> {
    let label = label.trim();
    if label == "0" {
        Ok(MultiIndex::zero())
    } else {
        label.parse()
    }
}

/// A quadrature estimate of a norm; `clamped` records a negative squared estimate
/// (possible with signed sparse-grid weights) that was replaced by zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub clamped: bool,
}

fn check_samples(values: &[Vec<f64>], rule: &SparseGridRule) -> Result<()> {
    if values.len() != rule.len() {
        return Err(Error::DimensionMismatch {
            expected: rule.len(),
            found: values.len(),
        });
    }
    Ok(())
}

/// Bochner `L²` norm `(Σ_i w_i ‖F(x_i)‖²_Y)^{1/2}` from values at the rule nodes.
pub fn bochner_l2_norm(values: &[Vec<f64>], rule: &SparseGridRule, norm: &DiscreteNorm) -> Result<NormEstimate> {
    check_samples(values, rule)?;
    let terms: Vec<f64> = values
        .iter()
        .zip(rule.weights())
        .map(|(v, w)| {
            let n = norm.norm(v);
            w * n * n
        })
        .collect();
    let sq = crate::sampling::pairwise_sum(&terms);
    Ok(if sq < 0.0 {
        NormEstimate {
            value: 0.0,
            clamped: true,
        }
    } else {
        NormEstimate {
            value: sq.sqrt(),
            clamped: false,
        }
    })
}

/// Bochner norm of an expansion on a rule.
pub fn expansion_bochner_norm(p: &VectorExpansion, rule: &SparseGridRule, norm: &DiscreteNorm) -> Result<NormEstimate> {
    let values = rule
        .nodes()
        .iter()
        .map(|x| p.eval(x))
        .collect::<Result<Vec<_>>>()?;
    bochner_l2_norm(&values, rule, norm)
}

/// Pettis `L²` norm `sup_{‖y*‖≤1} (∫ |y*(F)|²)^{1/2}` for finite-dimensional outputs.
///
/// Weighted-Euclidean outputs: square root of the largest eigenvalue of
/// `Σ_i w_i (M^{1/2} F_i)(M^{1/2} F_i)ᵀ`, found by power iteration from a fixed start
/// vector. Sup-norm outputs: the dual ball is spanned by coordinate functionals, so the
/// value is the largest coordinate-wise `L²` norm. Other norms are not supported.
pub fn pettis_l2_norm(values: &[Vec<f64>], rule: &SparseGridRule, norm: &DiscreteNorm) -> Result<f64> {
    check_samples(values, rule)?;
    let k = norm.dim();
    match norm.kind() {
        NormKind::WeightedEuclidean => {
            let sqrt_mass: Vec<f64> = norm.weights().iter().map(|w| w.sqrt()).collect();
            let mut moment = DMatrix::<f64>::zeros(k, k);
            for (v, &w) in values.iter().zip(rule.weights()) {
                let g = DVector::from_iterator(k, v.iter().zip(&sqrt_mass).map(|(a, b)| a * b));
                moment.ger(w, &g, &g, 1.0);
            }
            Ok(largest_eigenvalue(&moment).max(0.0).sqrt())
        }
        NormKind::Sup => Ok((0..k)
            .map(|j| {
                let s: f64 = values.iter().zip(rule.weights()).map(|(v, w)| w * v[j] * v[j]).sum();
                s.max(0.0).sqrt()
            })
            .fold(0.0, f64::max)),
        NormKind::WeightedL4 => Err(Error::invalid(
            "Pettis norms are implemented for weighted-euclidean and sup outputs only",
        )),
    }
}

/// Largest eigenvalue of a symmetric matrix by power iteration (relative tolerance 1e-10).
pub(crate) fn largest_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let k = m.nrows();
    if k == 0 {
        return 0.0;
    }
    // fixed, generic start vector
    let mut v = DVector::from_iterator(k, (0..k).map(|i| 1.0 + 0.1 * ((i as f64 + 1.0) * 0.618).fract()));
    v /= v.norm();
    let mut lambda = 0.0;
    for _ in 0..20_000 {
        let w = m * &v;
        let nw = w.norm();
        if nw == 0.0 {
            return 0.0;
        }
        let next = v.dot(&w);
        let converged = (next - lambda).abs() <= 1e-10 * next.abs();
        lambda = next;
        v = w / nw;
        if converged {
            break;
        }
    }
    lambda
}

/// Root-mean-square of output norms: `(1/m Σ ‖G_i‖²_Y)^{1/2}`.
pub fn discrete_seminorm(values: &[Vec<f64>], norm: &DiscreteNorm) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("discrete seminorm needs at least one sample"));
    }
    let s: f64 = values.iter().map(|v| norm.norm(v).powi(2)).sum();
    Ok((s / values.len() as f64).sqrt())
}

/// Sampled lower estimate of `sup_x ‖f(x)‖_Y` over Halton points plus sign corners.
pub fn sup_norm_estimate<F>(f: F, d: usize, n_samples: usize, seed: u64, norm: &DiscreteNorm) -> Result<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if n_samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    let offset = mix_seed(&[seed]) % 1_000_003;
    let mut best = 0.0f64;
    for x in halton_points(n_samples, d, offset).iter().chain(sign_corners(d).iter()) {
        best = best.max(norm.norm(&f(x)));
    }
    Ok(best)
}

/// Ratio `‖G‖_{disc,A} / ‖G‖_{disc,B}` between two empirical point clouds, an estimator for
/// the norm-equivalence constants between two sampling measures.
pub fn empirical_norm_ratio<F>(f: F, points_a: &[Vec<f64>], points_b: &[Vec<f64>], norm: &DiscreteNorm) -> Result<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let a: Vec<Vec<f64>> = points_a.iter().map(|x| f(x)).collect();
    let b: Vec<Vec<f64>> = points_b.iter().map(|x| f(x)).collect();
    let den = discrete_seminorm(&b, norm)?;
    if den == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(discrete_seminorm(&a, norm)? / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{gauss_legendre, smolyak, RuleFamily};

    #[test]
    fn psi_examples() {
        assert_eq!(eval_psi(0, 0.3), 1.0);
        assert!((eval_psi(1, 0.5) - 0.8660254037844386).abs() < 1e-15);
        assert!((eval_psi(2, 1.0) - 5f64.sqrt()).abs() < 1e-14);
        let nu = MultiIndex::from_pairs([(1, 2)]).unwrap();
        assert!((eval_tensor(&nu, &[0.0, 0.3]).unwrap() + 5f64.sqrt() / 2.0).abs() < 1e-15);
        let nu = MultiIndex::from_pairs([(1, 1), (2, 1)]).unwrap();
        assert!((eval_tensor(&nu, &[1.0, 1.0, 1.0]).unwrap() - 3.0).abs() < 1e-14);
        assert!(eval_tensor(&MultiIndex::unit(3), &[0.0, 0.0]).is_err());
    }

    #[test]
    fn derivative_matches_closed_form() {
        // P_3 = (5x³ − 3x)/2, P_3' = (15x² − 3)/2
        let x = 0.37;
        let (p, dp) = legendre_p_with_derivative(3, x);
        assert!((p - (5.0 * x * x * x - 3.0 * x) / 2.0).abs() < 1e-15);
        assert!((dp - (15.0 * x * x - 3.0) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn roots_small_degrees() {
        assert_eq!(legendre_roots(1).unwrap().roots, vec![0.0]);
        let r2 = legendre_roots(2).unwrap();
        assert!((r2.roots[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((r2.roots[0] + 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((r2.leading_coefficient - 1.5).abs() < 1e-15);
        let r3 = legendre_roots(3).unwrap();
        assert!((r3.roots[2] - 0.6f64.sqrt()).abs() < 1e-15);
        assert_eq!(r3.roots[1], 0.0);
        for n in 1..=60 {
            let r = legendre_roots(n).unwrap();
            assert!(r.roots.windows(2).all(|w| w[0] < w[1]), "n = {n}");
            assert!(r.roots.iter().all(|&x| legendre_p(n, x).abs() < 1e-13), "n = {n}");
        }
        assert!(legendre_roots(0).is_err());
    }

    #[test]
    fn factored_form_reproduces_psi() {
        for n in 1..=8 {
            let r = legendre_roots(n).unwrap();
            let scale = ((2 * n + 1) as f64).sqrt() * r.leading_coefficient;
            for &x in &[-0.9, -0.2, 0.4, 1.0] {
                let prod: f64 = r.roots.iter().map(|ri| x - ri).product();
                assert!((scale * prod - eval_psi(n, x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gauss_orthonormality_up_to_twenty() {
        let rule = gauss_legendre(40).unwrap();
        for i in 0..=20 {
            for j in 0..=20 {
                let ip: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&x, &w)| w * eval_psi(i, x) * eval_psi(j, x))
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((ip - target).abs() <= 1e-12, "({i},{j}) -> {ip}");
            }
        }
    }

    #[test]
    fn expansion_examples() {
        let empty = VectorExpansion::zero(IndexSet::default(), 3);
        assert_eq!(empty.eval(&[0.1]).unwrap(), vec![0.0; 3]);
        let s0 = IndexSet::from_indices([MultiIndex::zero()]);
        let c = VectorExpansion::new(s0, DMatrix::from_row_slice(1, 2, &[2.0, -1.0])).unwrap();
        assert_eq!(c.eval(&[0.7, -0.3]).unwrap(), vec![2.0, -1.0]);
        let s1 = IndexSet::from_indices([MultiIndex::unit(1)]);
        let p = VectorExpansion::new(s1, DMatrix::from_row_slice(1, 2, &[1.0, 0.0])).unwrap();
        let y = p.eval(&[0.2]).unwrap();
        assert!((y[0] - 3f64.sqrt() * 0.2).abs() < 1e-15);
        assert_eq!(y[1], 0.0);
    }

    #[test]
    fn expansion_csv_round_trip() {
        let s = IndexSet::from_indices([MultiIndex::zero(), MultiIndex::unit(2), MultiIndex::from_pairs([(1, 1), (2, 3)]).unwrap()]);
        let c = DMatrix::from_fn(3, 4, |i, j| (i as f64 + 1.0) / (j as f64 + 3.0));
        let p = VectorExpansion::new(s, c).unwrap();
        let text = p.to_csv();
        assert!(text.starts_with("0,2:1,1:1 2:3\n"));
        assert_eq!(VectorExpansion::from_csv(&text, 2).unwrap(), p);
    }

    #[test]
    fn norm_examples() {
        let rule = smolyak(2, 3, RuleFamily::ClenshawCurtis).unwrap();
        let euclid = DiscreteNorm::trapezoid(NormKind::WeightedEuclidean, 5).unwrap();
        let zeros = vec![vec![0.0; 5]; rule.len()];
        assert_eq!(bochner_l2_norm(&zeros, &rule, &euclid).unwrap().value, 0.0);
        assert_eq!(pettis_l2_norm(&zeros, &rule, &euclid).unwrap(), 0.0);

        // Ψ_{e1} times the unit vector, total mass 1
        let unit = vec![1.0; 5];
        let field: Vec<Vec<f64>> = rule
            .nodes()
            .iter()
            .map(|x| unit.iter().map(|u| u * eval_psi(1, x[0])).collect())
            .collect();
        assert!((bochner_l2_norm(&field, &rule, &euclid).unwrap().value - 1.0).abs() < 1e-12);

        let constant: Vec<Vec<f64>> = rule.nodes().iter().map(|_| vec![-2.5; 5]).collect();
        assert!((bochner_l2_norm(&constant, &rule, &euclid).unwrap().value - 2.5).abs() < 1e-12);

        // K = 1: Pettis and Bochner coincide
        let one = DiscreteNorm::unit(NormKind::WeightedEuclidean, 1);
        let scalar: Vec<Vec<f64>> = rule.nodes().iter().map(|x| vec![x[0] * x[1] + 0.3]).collect();
        let b = bochner_l2_norm(&scalar, &rule, &one).unwrap().value;
        let p = pettis_l2_norm(&scalar, &rule, &one).unwrap();
        assert!((b - p).abs() < 1e-12);

        // (Ψ_{e1}, Ψ_{e2}) with unit masses: second-moment matrix is the identity
        let two = DiscreteNorm::unit(NormKind::WeightedEuclidean, 2);
        let pair: Vec<Vec<f64>> = rule.nodes().iter().map(|x| vec![eval_psi(1, x[0]), eval_psi(1, x[1])]).collect();
        assert!((pettis_l2_norm(&pair, &rule, &two).unwrap() - 1.0).abs() < 1e-10);
        assert!((bochner_l2_norm(&pair, &rule, &two).unwrap().value - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn seminorm_examples() {
        let n = DiscreteNorm::unit(NormKind::WeightedEuclidean, 1);
        assert_eq!(discrete_seminorm(&[vec![0.0], vec![0.0]], &n).unwrap(), 0.0);
        assert_eq!(discrete_seminorm(&[vec![2.0]], &n).unwrap(), 2.0);
        let v = discrete_seminorm(&[vec![3.0], vec![4.0]], &n).unwrap();
        assert!((v - (12.5f64).sqrt()).abs() < 1e-15);
        assert!(discrete_seminorm(&[], &n).is_err());
    }

    #[test]
    fn sup_estimates() {
        let n = DiscreteNorm::unit(NormKind::Sup, 1);
        assert_eq!(sup_norm_estimate(|_| vec![0.0], 3, 50, 1, &n).unwrap(), 0.0);
        let s = sup_norm_estimate(|x| vec![eval_psi(1, x[0])], 2, 50, 1, &n).unwrap();
        assert!((s - 3f64.sqrt()).abs() < 1e-15);
        let nu = MultiIndex::from_pairs([(1, 2), (3, 1)]).unwrap();
        let s = sup_norm_estimate(|x| vec![eval_tensor(&nu, x).unwrap()], 3, 200, 4, &n).unwrap();
        assert!((s - crate::multiindex::u_weight(&nu)).abs() < 1e-13);
    }

    #[test]
    fn norm_kinds() {
        let y = [1.0, -2.0];
        let w = vec![0.5, 0.5];
        assert!((DiscreteNorm::new(NormKind::WeightedEuclidean, w.clone()).unwrap().norm(&y) - 2.5f64.sqrt()).abs() < 1e-15);
        assert!((DiscreteNorm::new(NormKind::WeightedL4, w.clone()).unwrap().norm(&y) - 8.5f64.powf(0.25)).abs() < 1e-15);
        assert_eq!(DiscreteNorm::new(NormKind::Sup, w).unwrap().norm(&y), 2.0);
        assert!(DiscreteNorm::new(NormKind::Sup, vec![0.0]).is_err());
        let t = DiscreteNorm::trapezoid(NormKind::WeightedEuclidean, 257).unwrap();
        assert!((t.weights().iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }
}
