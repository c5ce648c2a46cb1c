//! Handcrafted tanh networks that emulate squares, products and tensor Legendre
//! polynomials to a prescribed uniform accuracy.
//!
//! Squares use the symmetric second difference
//! `x² ≈ [σ(b + hx) + σ(b − hx) − 2σ(b)] / (h² σ″(b))` with `σ = tanh`, `b = 1/2`; products
//! use `xy = ((x+y)/2)² − ((x−y)/2)²` in a binary tree; a lone factor at a tree level goes
//! through `x ≈ σ(hx)/h`. A Legendre polynomial is the product of its linear root factors,
//! each rescaled into `[-1,1]`.

use nalgebra::{DMatrix, DVector};

use super::mlp::{points_to_columns, Activation, Layer, Mlp};
use crate::error::{Error, Result};
use crate::legendre::{legendre_roots, PsiTable};
use crate::multiindex::{IndexSet, MultiIndex, WeightKind, WeightSystem};
use crate::sampling::{halton_points, sign_corners};

pub const TANH_OFFSET: f64 = 0.5;
/// Smallest accepted target accuracy.
pub const DELTA_CAP: f64 = 1e-10;
const SQUARE_GRID: usize = 4096;
/// Headroom of the square/identity calibration interval beyond `[-1,1]`.
const RANGE_MARGIN: f64 = 1.01;
/// Points of the default certification grid.
pub const CERTIFY_POINTS: usize = 100_000;

fn tanh_second_derivative(b: f64) -> f64 {
    let t = b.tanh();
    -2.0 * t * (1.0 - t * t)
}

fn grid(range: f64) -> impl Iterator<Item = f64> {
    (0..SQUARE_GRID).map(move |i| -range + 2.0 * range * i as f64 / (SQUARE_GRID - 1) as f64)
}

/// Largest step `h` whose measured error is at most `delta`; errors grow with `h` above the
/// rounding floor, so a coarse scan locates the feasible region and bisection refines it.
fn calibrate_step<F: Fn(f64) -> f64>(delta: f64, error: F) -> Result<(f64, f64)> {
    let scan: Vec<(f64, f64)> = (0..=120).map(|k| {
        let h = 2f64.powf(-(k as f64) / 3.0);
        (h, error(h))
    }).collect();
    let best = scan.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let Some(pos) = scan.iter().position(|s| s.1 <= delta) else {
        return Err(Error::CalibrationFailure {
            target: delta,
            achieved: best,
        });
    };
    if pos == 0 {
        return Ok(scan[0]);
    }
    let (mut ok, mut bad) = (scan[pos].0, scan[pos - 1].0);
    let mut ok_err = scan[pos].1;
    for _ in 0..60 {
        let mid = 0.5 * (ok + bad);
        let e = error(mid);
        if e <= delta {
            ok = mid;
            ok_err = e;
        } else {
            bad = mid;
        }
    }
    Ok((ok, ok_err))
}

/// Width-2 tanh emulator of `x ↦ x²` on `[-range, range]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SquareEmulator {
    pub h: f64,
    pub range: f64,
    pub delta: f64,
    /// Sup error on the 4096-point calibration grid.
    pub measured_error: f64,
}

impl SquareEmulator {
    fn coefficient(h: f64) -> f64 {
        1.0 / (h * h * tanh_second_derivative(TANH_OFFSET))
    }

    fn eval_with(h: f64, x: f64) -> f64 {
        let c = Self::coefficient(h);
        c * (TANH_OFFSET + h * x).tanh() + c * (TANH_OFFSET - h * x).tanh() - 2.0 * c * TANH_OFFSET.tanh()
    }

    pub fn eval(&self, x: f64) -> f64 {
        Self::eval_with(self.h, x)
    }

    /// The emulator as a `1 → 2 → 1` network.
    pub fn to_mlp(&self) -> Mlp {
        let c = Self::coefficient(self.h);
        let hidden = Layer {
            weights: DMatrix::from_column_slice(2, 1, &[self.h, -self.h]),
            bias: DVector::from_element(2, TANH_OFFSET),
        };
        let out = Layer {
            weights: DMatrix::from_row_slice(1, 2, &[c, c]),
            bias: DVector::from_element(1, -2.0 * c * TANH_OFFSET.tanh()),
        };
        Mlp::from_layers(vec![hidden, out], Activation::Tanh).expect("consistent shapes")
    }
}

pub fn build_square_emulator(delta: f64, range: f64) -> Result<SquareEmulator> {
    if !(delta > 0.0) || !(range > 0.0) {
        return Err(Error::invalid("delta and range must be positive"));
    }
    let delta = delta.max(DELTA_CAP);
    let err = |h: f64| grid(range).map(|x| (SquareEmulator::eval_with(h, x) - x * x).abs()).fold(0.0, f64::max);
    let (h, measured_error) = calibrate_step(delta, err)?;
    Ok(SquareEmulator {
        h,
        range,
        delta,
        measured_error,
    })
}

/// Width-1 tanh emulator `x ↦ tanh(hx)/h` of the identity on `[-range, range]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityEmulator {
    pub h: f64,
    pub range: f64,
    pub delta: f64,
    pub measured_error: f64,
}

impl IdentityEmulator {
    pub fn eval(&self, x: f64) -> f64 {
        (self.h * x).tanh() / self.h
    }
}

pub fn build_identity_emulator(delta: f64, range: f64) -> Result<IdentityEmulator> {
    if !(delta > 0.0) || !(range > 0.0) {
        return Err(Error::invalid("delta and range must be positive"));
    }
    let delta = delta.max(DELTA_CAP);
    let err = |h: f64| grid(range).map(|x| ((h * x).tanh() / h - x).abs()).fold(0.0, f64::max);
    let (h, measured_error) = calibrate_step(delta, err)?;
    Ok(IdentityEmulator {
        h,
        range,
        delta,
        measured_error,
    })
}

/// Affine functional `coef · a + c` of the previous layer's values.
#[derive(Clone, Debug)]
struct Lin {
    coef: Vec<f64>,
    c: f64,
}

impl Lin {
    fn constant(n: usize, c: f64) -> Self {
        Self { coef: vec![0.0; n], c }
    }

    fn combine(&self, a: f64, other: &Lin, b: f64) -> Lin {
        Lin {
            coef: self.coef.iter().zip(&other.coef).map(|(x, y)| a * x + b * y).collect(),
            c: a * self.c + b * other.c,
        }
    }

    fn scaled(&self, s: f64, shift: f64) -> Lin {
        Lin {
            coef: self.coef.iter().map(|x| s * x).collect(),
            c: s * self.c + shift,
        }
    }
}

/// Parallel product trees with a shared input. `trees[t]` lists the affine factors of tree `t`
/// (all trees the same length) or is `None` for an exact constant-one output; output `t`
/// is `scales[t]` times the emulated product.
fn build_trees(n_in: usize, trees: &[Option<Vec<Lin>>], scales: &[f64], sq: &SquareEmulator, id: &IdentityEmulator) -> Result<Mlp> {
    let n_factors = trees.iter().flatten().map(Vec::len).next().unwrap_or(0);
    if trees.iter().flatten().any(|t| t.len() != n_factors) {
        return Err(Error::invalid("all product trees need the same number of factors"));
    }
    let mut values: Vec<Option<Vec<Lin>>> = trees.to_vec();
    let mut layers: Vec<Layer> = Vec::new();
    let mut prev_dim = n_in;
    let csq = SquareEmulator::coefficient(sq.h);
    let mut level = 0;
    while n_factors > 0 && (level == 0 || values.iter().flatten().any(|v| v.len() > 1)) {
        let mut neurons: Vec<Lin> = Vec::new();
        // new values as (neuron, weight) lists
        let mut next: Vec<Option<Vec<Vec<(usize, f64)>>>> = Vec::with_capacity(values.len());
        for tree in &values {
            let Some(vals) = tree else {
                next.push(None);
                continue;
            };
            let mut out = Vec::with_capacity(vals.len().div_ceil(2));
            for pair in vals.chunks(2) {
                if let [u, v] = pair {
                    let s = u.combine(0.5, v, 0.5);
                    let t = u.combine(0.5, v, -0.5);
                    let base = neurons.len();
                    neurons.push(s.scaled(sq.h, TANH_OFFSET));
                    neurons.push(s.scaled(-sq.h, TANH_OFFSET));
                    neurons.push(t.scaled(sq.h, TANH_OFFSET));
                    neurons.push(t.scaled(-sq.h, TANH_OFFSET));
                    // the constant −2σ(b) terms of the two squares cancel
                    out.push(vec![(base, csq), (base + 1, csq), (base + 2, -csq), (base + 3, -csq)]);
                } else {
                    neurons.push(pair[0].scaled(id.h, 0.0));
                    out.push(vec![(neurons.len() - 1, 1.0 / id.h)]);
                }
            }
            next.push(Some(out));
        }
        let width = neurons.len();
        let mut layer = Layer::zeros(width, prev_dim);
        for (r, lin) in neurons.iter().enumerate() {
            for (c, w) in lin.coef.iter().enumerate() {
                layer.weights[(r, c)] = *w;
            }
            layer.bias[r] = lin.c;
        }
        layers.push(layer);
        values = next
            .into_iter()
            .map(|tree| {
                tree.map(|vals| {
                    vals.into_iter()
                        .map(|terms| {
                            let mut lin = Lin::constant(width, 0.0);
                            for (j, w) in terms {
                                lin.coef[j] += w;
                            }
                            lin
                        })
                        .collect()
                })
            })
            .collect();
        prev_dim = width;
        level += 1;
    }
    let mut out = Layer::zeros(trees.len(), prev_dim);
    for (r, tree) in values.iter().enumerate() {
        match tree {
            None => out.bias[r] = scales[r],
            Some(vals) => {
                let lin = &vals[0];
                for (c, w) in lin.coef.iter().enumerate() {
                    out.weights[(r, c)] = scales[r] * w;
                }
                out.bias[r] = scales[r] * lin.c;
            }
        }
    }
    layers.push(out);
    Mlp::from_layers(layers, Activation::Tanh)
}

fn tree_levels(n: usize) -> usize {
    if n <= 1 {
        n
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

fn stage_emulators(stage_delta: f64) -> Result<(SquareEmulator, IdentityEmulator)> {
    Ok((
        build_square_emulator(stage_delta / 2.0, RANGE_MARGIN)?,
        build_identity_emulator(stage_delta, RANGE_MARGIN)?,
    ))
}

/// Network computing the product of its `n_factors` inputs (each in `[-1,1]`).
#[derive(Clone, Debug)]
pub struct ProductTree {
    pub net: Mlp,
    pub stage_delta: f64,
    pub measured_error: f64,
}

fn sup_error<F: Fn(&[f64]) -> f64>(net: &Mlp, points: &[Vec<f64>], truth: F) -> Result<Vec<f64>> {
    let x = points_to_columns(points, net.input_dim())?;
    let out = net.forward_batch(&x)?;
    let mut worst = vec![0.0f64; out.nrows()];
    for (j, p) in points.iter().enumerate() {
        let t = truth(p);
        for (r, w) in worst.iter_mut().enumerate() {
            *w = w.max((out[(r, j)] - t).abs());
        }
    }
    Ok(worst)
}

/// Certification points in `[-1,1]^d`: Halton points followed by the sign corners.
pub fn certification_grid(d: usize, n: usize, offset: u64) -> Vec<Vec<f64>> {
    let mut pts = halton_points(n, d, offset);
    pts.extend(sign_corners(d));
    pts
}

pub fn build_product_tree(n_factors: usize, delta: f64) -> Result<ProductTree> {
    if n_factors == 0 {
        return Err(Error::invalid("a product tree needs at least one factor"));
    }
    let levels = tree_levels(n_factors).max(1);
    let factors: Vec<Lin> = (0..n_factors)
        .map(|i| {
            let mut l = Lin::constant(n_factors, 0.0);
            l.coef[i] = 1.0;
            l
        })
        .collect();
    let points = certification_grid(n_factors, 4096, 0);
    let mut stage = delta.max(DELTA_CAP) / (2.0 * levels as f64);
    let mut best = f64::INFINITY;
    loop {
        let (sq, id) = stage_emulators(stage).map_err(|_| Error::CalibrationFailure { target: delta, achieved: best })?;
        let net = build_trees(n_factors, &[Some(factors.clone())], &[1.0], &sq, &id)?;
        let err = sup_error(&net, &points, |p| p.iter().product())?[0];
        best = best.min(err);
        if err <= delta {
            return Ok(ProductTree {
                net,
                stage_delta: stage,
                measured_error: err,
            });
        }
        stage /= 2.0;
    }
}

/// Calibration record of an emulator network.
#[derive(Clone, Debug, PartialEq)]
pub struct EmulatorSpec {
    pub nu: MultiIndex,
    pub delta: f64,
    /// Calibrated steps of the square and identity emulators.
    pub h_square: f64,
    pub h_identity: f64,
    pub b_offset: f64,
    pub stage_delta: f64,
    pub measured_error: f64,
    pub width: usize,
    pub depth: usize,
}

/// Emulators of several `Ψ_ν` sharing one input, all with the same number of factors so
/// they stack in parallel.
#[derive(Clone, Debug)]
pub struct FeatureNetwork {
    /// Outputs `N_ν(x)` for every `ν` of the support, in support order.
    pub net: Mlp,
    pub support: IndexSet,
    pub n_factors: usize,
    pub stage_delta: f64,
    pub h_square: f64,
    pub h_identity: f64,
    /// Per-index sup error on the calibration grid.
    pub measured_errors: Vec<f64>,
}

/// Root factors `(x_k − r)/(1 + |r|)` of `Ψ_ν`, padded with constant ones to `n_factors`,
/// and the output scale `∏_k √(2ν_k+1) κ_{ν_k} ∏_r (1 + |r|)`.
fn legendre_factors(nu: &MultiIndex, input_dim: usize, n_factors: usize) -> Result<(Vec<Lin>, f64)> {
    let mut factors = Vec::with_capacity(n_factors);
    let mut scale = 1.0;
    for (k, e) in nu.iter() {
        let roots = legendre_roots(e as usize)?;
        scale *= ((2 * e + 1) as f64).sqrt() * roots.leading_coefficient;
        for r in roots.roots {
            let s = 1.0 + r.abs();
            let mut lin = Lin::constant(input_dim, -r / s);
            lin.coef[k - 1] = 1.0 / s;
            factors.push(lin);
            scale *= s;
        }
    }
    while factors.len() < n_factors {
        factors.push(Lin::constant(input_dim, 1.0));
    }
    Ok((factors, scale))
}

/// Builds `N_ν` for every `ν ∈ S` on inputs in `[-1,1]^{input_dim}`, halving the per-stage
/// accuracy until each emulator's sup error over `grid_points` certification points is at
/// most `delta`. The zero index is the exact constant one.
pub fn build_feature_network(support: &IndexSet, input_dim: usize, delta: f64, grid_points: usize) -> Result<FeatureNetwork> {
    if !(delta > 0.0) {
        return Err(Error::invalid("delta must be positive"));
    }
    if support.is_empty() {
        return Err(Error::invalid("empty support"));
    }
    if support.dim_bound() > input_dim {
        return Err(Error::DimensionMismatch {
            expected: support.dim_bound(),
            found: input_dim,
        });
    }
    let delta = delta.max(DELTA_CAP);
    let n_factors = support.max_total_degree() as usize;
    let mut trees = Vec::with_capacity(support.len());
    let mut scales = Vec::with_capacity(support.len());
    for nu in support.iter() {
        if nu.is_zero() {
            trees.push(None);
            scales.push(1.0);
        } else {
            let (f, s) = legendre_factors(nu, input_dim, n_factors)?;
            trees.push(Some(f));
            scales.push(s);
        }
    }
    let active = support.dim_bound().max(1);
    let grid_active = certification_grid(active, grid_points, 0);
    let points: Vec<Vec<f64>> = grid_active
        .iter()
        .map(|p| {
            let mut full = vec![0.0; input_dim];
            full[..active].copy_from_slice(p);
            full
        })
        .collect();
    let degree = n_factors;
    let tables: Vec<PsiTable> = grid_active.iter().map(|p| PsiTable::new(p, degree)).collect();
    let truth = DMatrix::from_fn(support.len(), points.len(), |r, j| tables[j].eval(&support.as_slice()[r]));

    let levels = tree_levels(n_factors).max(1);
    let max_scale = scales.iter().copied().fold(1.0, f64::max);
    let mut stage = delta / (2.0 * levels as f64 * max_scale);
    let mut best = f64::INFINITY;
    for _ in 0..64 {
        let (sq, id) = stage_emulators(stage).map_err(|_| Error::CalibrationFailure { target: delta, achieved: best })?;
        let net = build_trees(input_dim, &trees, &scales, &sq, &id)?;
        let out = net.forward_batch(&points_to_columns(&points, input_dim)?)?;
        let errs: Vec<f64> = (0..support.len())
            .map(|r| out.row(r).iter().zip(truth.row(r).iter()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
            .collect();
        let worst = errs.iter().copied().fold(0.0, f64::max);
        best = best.min(worst);
        if worst <= delta {
            return Ok(FeatureNetwork {
                net,
                support: support.clone(),
                n_factors,
                stage_delta: stage,
                h_square: sq.h,
                h_identity: id.h,
                measured_errors: errs,
            });
        }
        stage /= 2.0;
    }
    Err(Error::CalibrationFailure {
        target: delta,
        achieved: best,
    })
}

/// Emulator of a single `Ψ_ν` on `[-1,1]^d`, `d = max(1, max dim of ν)`.
#[derive(Clone, Debug)]
pub struct LegendreEmulator {
    pub net: Mlp,
    pub spec: EmulatorSpec,
}

impl LegendreEmulator {
    /// Sup error against `Ψ_ν` over the given points.
    pub fn sup_error(&self, points: &[Vec<f64>]) -> Result<f64> {
        let nu = self.spec.nu.clone();
        Ok(sup_error(&self.net, points, |p| crate::legendre::eval_tensor(&nu, p).expect("dimension checked"))?[0])
    }
}

pub fn build_legendre_emulator(nu: &MultiIndex, delta: f64) -> Result<LegendreEmulator> {
    build_legendre_emulator_on(nu, delta, CERTIFY_POINTS)
}

/// As [`build_legendre_emulator`] with a custom certification grid size.
pub fn build_legendre_emulator_on(nu: &MultiIndex, delta: f64, grid_points: usize) -> Result<LegendreEmulator> {
    let d = nu.max_dim().max(1);
    let support = IndexSet::new(vec![nu.clone()], d)?;
    let f = build_feature_network(&support, d, delta, grid_points)?;
    Ok(LegendreEmulator {
        spec: EmulatorSpec {
            nu: nu.clone(),
            delta,
            h_square: f.h_square,
            h_identity: f.h_identity,
            b_offset: TANH_OFFSET,
            stage_delta: f.stage_delta,
            measured_error: f.measured_errors[0],
            width: f.net.width(),
            depth: f.net.depth(),
        },
        net: f.net,
    })
}

/// Network `x ↦ C [N_{ν_1}(x), …, N_{ν_|S|}(x)]ᵀ` together with its emulators.
#[derive(Clone, Debug)]
pub struct FamilyNetwork {
    pub net: Mlp,
    pub features: FeatureNetwork,
    /// `k^{1 + 1/(5+ξ)}` when a budget was given.
    pub width_bound: Option<f64>,
}

/// Replaces the last layer `(W, b)` of `features` by `(C W, C b)`.
pub fn compose_linear(features: &Mlp, c: &DMatrix<f64>) -> Result<Mlp> {
    if c.ncols() != features.output_dim() {
        return Err(Error::DimensionMismatch {
            expected: features.output_dim(),
            found: c.ncols(),
        });
    }
    let mut layers = features.layers().to_vec();
    let last = layers.last_mut().expect("non-empty");
    *last = Layer {
        weights: c * &last.weights,
        bias: c * &last.bias,
    };
    Mlp::from_layers(layers, features.activation())
}

/// Stacks the emulators of `S` and applies the `K × |S|` coefficient matrix `c`. When a
/// budget `(w, k)` is supplied, `|S|_v ≤ k` is enforced.
pub fn assemble_family_network(
    support: &IndexSet,
    c: &DMatrix<f64>,
    input_dim: usize,
    delta: f64,
    budget: Option<(&WeightSystem, f64)>,
) -> Result<FamilyNetwork> {
    let mut width_bound = None;
    if let Some((w, k)) = budget {
        let used = crate::multiindex::weighted_cardinality(support, WeightKind::V, w);
        if !w.within_budget(used, k) {
            return Err(Error::BudgetViolation { budget: k, used });
        }
        width_bound = Some(k.powf(1.0 + 1.0 / w.exponent()));
    }
    if c.ncols() != support.len() {
        return Err(Error::DimensionMismatch {
            expected: support.len(),
            found: c.ncols(),
        });
    }
    let features = build_feature_network(support, input_dim, delta, CERTIFY_POINTS / 10)?;
    let net = compose_linear(&features.net, c)?;
    Ok(FamilyNetwork {
        net,
        features,
        width_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_emulator_examples() {
        let sq = build_square_emulator(1e-3, 1.0).unwrap();
        assert!(sq.eval(0.0).abs() <= 1e-3);
        assert!((sq.eval(1.0) - 1.0).abs() <= 1e-3);
        for x in [0.1, 0.37, 0.99, 1.0] {
            assert_eq!(sq.eval(x), sq.eval(-x));
        }
        let net = sq.to_mlp();
        for x in [-0.8, 0.0, 0.45] {
            assert!((net.forward(&[x]).unwrap()[0] - x * x).abs() <= 1e-3 + 1e-12);
        }
        assert_eq!(net.forward(&[0.3]).unwrap(), net.forward(&[-0.3]).unwrap());
    }

    #[test]
    fn square_emulator_precision_floor() {
        assert!(build_square_emulator(1e-7, 1.0).is_ok());
        match build_square_emulator(1e-10, 1.0) {
            Err(Error::CalibrationFailure { achieved, .. }) => assert!(achieved > 1e-10 && achieved < 1e-6),
            other => panic!("expected calibration failure, got {other:?}"),
        }
    }

    #[test]
    fn product_tree_examples() {
        let one = build_product_tree(1, 1e-4).unwrap();
        assert!((one.net.forward(&[0.7]).unwrap()[0] - 0.7).abs() <= 1e-4);
        let two = build_product_tree(2, 1e-4).unwrap();
        assert!((two.net.forward(&[0.5, -0.5]).unwrap()[0] + 0.25).abs() <= 1e-4);
        let four = build_product_tree(4, 1e-4).unwrap();
        assert!((four.net.forward(&[1.0; 4]).unwrap()[0] - 1.0).abs() <= 1e-4);
        assert_eq!(four.net.depth(), 2);
        assert!(four.net.width() <= 8);
        let five = build_product_tree(5, 1e-4).unwrap();
        assert_eq!(five.net.depth(), 3);
    }

    #[test]
    fn legendre_emulator_examples() {
        let e1 = build_legendre_emulator_on(&MultiIndex::unit(1), 1e-4, 2000).unwrap();
        for x in [-1.0, 0.0, 1.0] {
            assert!((e1.net.forward(&[x]).unwrap()[0] - 3f64.sqrt() * x).abs() <= 1e-4);
        }
        let e2 = build_legendre_emulator_on(&MultiIndex::from_dense(&[2]), 1e-4, 2000).unwrap();
        assert!((e2.net.forward(&[0.0]).unwrap()[0] + 5f64.sqrt() / 2.0).abs() <= 1e-4);
        let mixed = MultiIndex::from_dense(&[1, 0, 2]);
        let em = build_legendre_emulator_on(&mixed, 1e-3, 5000).unwrap();
        let fresh = certification_grid(3, 5000, 77_777);
        assert!(em.sup_error(&fresh).unwrap() <= 2e-3);
        assert_eq!(em.net.input_dim(), 3);
    }

    #[test]
    fn family_examples() {
        let support = IndexSet::new(vec![MultiIndex::zero(), MultiIndex::unit(1), MultiIndex::from_dense(&[1, 1])], 2).unwrap();
        let zero = assemble_family_network(&support, &DMatrix::zeros(2, 3), 2, 1e-4, None).unwrap();
        assert!(zero.net.forward(&[0.3, -0.2]).unwrap().iter().all(|&v| v == 0.0));

        let constants = IndexSet::new(vec![MultiIndex::zero()], 1).unwrap();
        let c = DMatrix::from_column_slice(2, 1, &[1.5, -2.0]);
        let net = assemble_family_network(&constants, &c, 1, 1e-4, None).unwrap().net;
        assert_eq!(net.forward(&[0.9]).unwrap(), vec![1.5, -2.0]);

        let c = DMatrix::from_row_slice(2, 3, &[0.5, -1.0, 2.0, 0.1, 0.2, 0.3]);
        let fam = assemble_family_network(&support, &c, 2, 1e-4, None).unwrap();
        let x = [0.4, -0.7];
        let feats = fam.features.net.forward(&x).unwrap();
        let out = fam.net.forward(&x).unwrap();
        // tolerance relative to the magnitude of the terms summed by the output layer
        let last = fam.features.net.layers().last().unwrap();
        for k in 0..2 {
            let direct: f64 = (0..3).map(|j| c[(k, j)] * feats[j]).sum();
            let magnitude: f64 = (0..3).map(|j| c[(k, j)].abs() * last.weights.row(j).abs().sum()).sum();
            assert!((out[k] - direct).abs() <= 1e-12 * magnitude.max(1.0));
        }

        let w = WeightSystem::new(0.0).unwrap();
        assert!(matches!(
            assemble_family_network(&support, &c, 2, 1e-4, Some((&w, 10.0))),
            Err(Error::BudgetViolation { .. })
        ));
    }
}
