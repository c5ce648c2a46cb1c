//! Quadrature on `[-1,1]^d` with respect to the uniform probability measure: Gauss–Legendre
//! and nested Clenshaw–Curtis rules, and isotropic Smolyak sparse grids built with the
//! combination technique.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::legendre::{legendre_p_with_derivative, legendre_roots};
use crate::sampling::pairwise_sum;

/// One-dimensional rule; weights sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub level: usize,
}

impl Rule1D {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let terms: Vec<f64> = self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).collect();
        pairwise_sum(&terms)
    }
}

/// `n`-point Gauss–Legendre rule, exact through degree `2n − 1`.
pub fn gauss_legendre(n: usize) -> Result<Rule1D> {
    if n == 0 {
        return Err(Error::invalid("Gauss rule needs at least one node"));
    }
    let nodes = legendre_roots(n)?.roots;
    let weights = nodes
        .iter()
        .map(|&x| {
            let (_, dp) = legendre_p_with_derivative(n, x);
            // 2/((1−x²)P'²) on [-1,1], halved for the probability measure
            1.0 / ((1.0 - x * x) * dp * dp)
        })
        .collect();
    Ok(Rule1D {
        nodes,
        weights,
        level: n - 1,
    })
}

/// Number of Clenshaw–Curtis nodes at `level`: 1, then `2^level + 1`.
pub fn clenshaw_curtis_size(level: usize) -> usize {
    if level == 0 {
        1
    } else {
        (1 << level) + 1
    }
}

/// Nested Clenshaw–Curtis rule with nodes `cos(πk/2^ℓ)`, sorted ascending, weights from
/// the explicit cosine series.
pub fn clenshaw_curtis(level: usize) -> Result<Rule1D> {
    if level > 20 {
        return Err(Error::invalid("Clenshaw-Curtis level above 20 is not supported"));
    }
    if level == 0 {
        return Ok(Rule1D {
            nodes: vec![0.0],
            weights: vec![1.0],
            level,
        });
    }
    let n = 1usize << level;
    let mut nodes = Vec::with_capacity(n + 1);
    let mut weights = Vec::with_capacity(n + 1);
    // ascending order: k = n, n-1, …, 0
    for k in (0..=n).rev() {
        nodes.push(cc_node(k, n));
        let theta = PI * k as f64 / n as f64;
        let mut s = 0.0;
        for j in 1..=n / 2 {
            let b = if 2 * j == n { 1.0 } else { 2.0 };
            s += b / (4.0 * (j * j) as f64 - 1.0) * (2.0 * j as f64 * theta).cos();
        }
        let c = if k == 0 || k == n { 1.0 } else { 2.0 };
        weights.push(c / n as f64 * (1.0 - s) / 2.0);
    }
    Ok(Rule1D { nodes, weights, level })
}

/// Node `cos(πk/n)` computed from the reduced fraction so that nested levels produce
/// bitwise identical coordinates, with exact symmetry and an exact zero.
fn cc_node(k: usize, n: usize) -> f64 {
    if 2 * k == n {
        return 0.0;
    }
    if 2 * k > n {
        return -cc_node(n - k, n);
    }
    let g = gcd(k, n);
    let (k, n) = (k / g, n / g);
    (PI * k as f64 / n as f64).cos()
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Univariate family underlying a sparse grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleFamily {
    ClenshawCurtis,
    /// Level `ℓ` uses `ℓ + 1` Gauss points.
    Gauss,
}

impl RuleFamily {
    fn rule(&self, level: usize) -> Result<Rule1D> {
        match self {
            RuleFamily::ClenshawCurtis => clenshaw_curtis(level),
            RuleFamily::Gauss => {
                let mut r = gauss_legendre(level + 1)?;
                r.level = level;
                Ok(r)
            }
        }
    }
}

/// Sparse-grid rule on `[-1,1]^d`. Weights may be negative and sum to one. Nodes are
/// stored in lexicographic numeric order.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseGridRule {
    dim: usize,
    level: usize,
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl SparseGridRule {
    /// Rule from explicit nodes and weights (e.g. a tensor rule or a Monte Carlo cloud).
    pub fn from_parts(dim: usize, level: usize, nodes: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: nodes.len(),
                found: weights.len(),
            });
        }
        if let Some(bad) = nodes.iter().find(|x| x.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        Ok(Self {
            dim,
            level,
            nodes,
            weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ_i w_i f(x_i)` with pairwise summation in node order.
    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        let terms: Vec<f64> = self.nodes.iter().zip(&self.weights).map(|(x, &w)| w * f(x)).collect();
        pairwise_sum(&terms)
    }

    /// Vector-valued integral; every evaluation must have the same length.
    pub fn integrate_vec<F: Fn(&[f64]) -> Result<Vec<f64>>>(&self, f: F) -> Result<Vec<f64>> {
        let values = self.nodes.iter().map(|x| f(x)).collect::<Result<Vec<_>>>()?;
        let k = values.first().map_or(0, Vec::len);
        (0..k)
            .map(|j| {
                let terms = values
                    .iter()
                    .zip(&self.weights)
                    .map(|(v, &w)| {
                        v.get(j).map(|vj| w * vj).ok_or(Error::DimensionMismatch {
                            expected: k,
                            found: v.len(),
                        })
                    })
                    .collect::<Result<Vec<f64>>>()?;
                Ok(pairwise_sum(&terms))
            })
            .collect()
    }

    /// CSV export: columns `x1..xd,w`.
    pub fn to_csv(&self) -> String {
        let mut out: Vec<String> = (1..=self.dim).map(|k| format!("x{k}")).collect();
        out.push("w".into());
        let mut text = out.join(",");
        text.push('\n');
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let mut row: Vec<String> = x.iter().map(|v| format!("{v:.16e}")).collect();
            row.push(format!("{w:.16e}"));
            text.push_str(&row.join(","));
            text.push('\n');
        }
        text
    }
}

/// Order-preserving integer key for a coordinate (with `-0.0` folded into `0.0`).
fn ordered_key(x: f64) -> u64 {
    let b = (if x == 0.0 { 0.0 } else { x }).to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Every `d`-tuple of nonnegative integers with sum exactly `total`.
fn compositions(d: usize, total: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k + 1 == cur.len() {
            cur[k] = left;
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[k] = v;
            rec(k + 1, left - v, cur, out);
        }
    }
    let mut out = Vec::new();
    let mut cur = vec![0; d];
    rec(0, total, &mut cur, &mut out);
    out
}

/// Isotropic Smolyak rule via the combination technique:
/// `Σ_{max(0,ℓ−d+1) ≤ |i| ≤ ℓ} (−1)^{ℓ−|i|} C(d−1, ℓ−|i|) ⊗_k Q_{i_k}`,
/// with coincident nodes merged and their weights summed.
pub fn smolyak(d: usize, level: usize, family: RuleFamily) -> Result<SparseGridRule> {
    if d == 0 {
        return Err(Error::invalid("dimension must be >= 1"));
    }
    let rules = (0..=level).map(|l| family.rule(l)).collect::<Result<Vec<_>>>()?;
    let mut merged: BTreeMap<Vec<u64>, (Vec<f64>, f64)> = BTreeMap::new();
    let lo = (level + 1).saturating_sub(d);
    for total in lo..=level {
        let j = level - total;
        let coef = if j % 2 == 0 { 1.0 } else { -1.0 } * binomial(d - 1, j);
        for multi in compositions(d, total) {
            let parts: Vec<&Rule1D> = multi.iter().map(|&l| &rules[l]).collect();
            let mut counter = vec![0usize; d];
            loop {
                let x: Vec<f64> = (0..d).map(|k| parts[k].nodes[counter[k]]).collect();
                let w: f64 = coef * (0..d).map(|k| parts[k].weights[counter[k]]).product::<f64>();
                let key: Vec<u64> = x.iter().map(|&v| ordered_key(v)).collect();
                merged.entry(key).or_insert_with(|| (x, 0.0)).1 += w;
                // odometer increment
                let mut k = 0;
                while k < d {
                    counter[k] += 1;
                    if counter[k] < parts[k].len() {
                        break;
                    }
                    counter[k] = 0;
                    k += 1;
                }
                if k == d {
                    break;
                }
            }
        }
    }
    let (nodes, weights): (Vec<_>, Vec<_>) = merged.into_values().unzip();
    SparseGridRule::from_parts(d, level, nodes, weights)
}

/// Full tensor product of one univariate rule.
pub fn tensor_rule(d: usize, rule: &Rule1D) -> Result<SparseGridRule> {
    let n = rule.len();
    let total = n.checked_pow(d as u32).ok_or_else(|| Error::invalid("tensor rule too large"))?;
    let mut nodes = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    for code in 0..total {
        let mut c = code;
        let mut x = Vec::with_capacity(d);
        let mut w = 1.0;
        for _ in 0..d {
            x.push(rule.nodes[c % n]);
            w *= rule.weights[c % n];
            c /= n;
        }
        nodes.push(x);
        weights.push(w);
    }
    SparseGridRule::from_parts(d, rule.level, nodes, weights)
}

/// Number of distinct nodes of the Clenshaw–Curtis Smolyak grid `(d, level)`.
pub fn smolyak_cc_size(d: usize, level: usize) -> usize {
    // new points per level: 1, 2, 2, 4, 8, …
    let delta = |l: usize| -> usize {
        match l {
            0 => 1,
            1 => 2,
            _ => 1 << (l - 1),
        }
    };
    let mut count = 0usize;
    for total in 0..=level {
        for multi in compositions(d, total) {
            count += multi.iter().map(|&l| delta(l)).product::<usize>();
        }
    }
    count
}

/// Smallest Clenshaw–Curtis level whose grid has at least `20 · max_m` nodes, capped so the
/// grid never exceeds `10⁵` nodes.
pub fn default_test_level(d: usize, max_m: usize) -> usize {
    let target = 20 * max_m;
    let mut level = 0;
    loop {
        let size = smolyak_cc_size(d, level);
        if size >= target {
            return level;
        }
        if smolyak_cc_size(d, level + 1) > 100_000 {
            return level;
        }
        level += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_small_rules() {
        let g1 = gauss_legendre(1).unwrap();
        assert_eq!(g1.nodes, vec![0.0]);
        assert!((g1.weights[0] - 1.0).abs() < 1e-15);
        let g2 = gauss_legendre(2).unwrap();
        assert!((g2.nodes[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!(g2.weights.iter().all(|w| (w - 0.5).abs() < 1e-15));
        assert!((g2.integrate(|x| x * x) - 1.0 / 3.0).abs() < 1e-15);
        for n in 1..=50 {
            let g = gauss_legendre(n).unwrap();
            assert!((g.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn clenshaw_curtis_small_levels() {
        let c0 = clenshaw_curtis(0).unwrap();
        assert_eq!((c0.nodes.clone(), c0.weights.clone()), (vec![0.0], vec![1.0]));
        let c1 = clenshaw_curtis(1).unwrap();
        assert_eq!(c1.nodes, vec![-1.0, 0.0, 1.0]);
        for (w, e) in c1.weights.iter().zip([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]) {
            assert!((w - e).abs() < 1e-15);
        }
        let c2 = clenshaw_curtis(2).unwrap();
        assert_eq!(c2.len(), 5);
        assert!((c2.integrate(|x| x.powi(4)) - 0.2).abs() < 1e-15);
        for l in 0..=12 {
            let c = clenshaw_curtis(l).unwrap();
            assert!((c.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14, "level {l}");
            assert_eq!(c.len(), clenshaw_curtis_size(l));
        }
    }

    #[test]
    fn clenshaw_curtis_is_nested() {
        for l in 0..10 {
            let a = clenshaw_curtis(l).unwrap();
            let b = clenshaw_curtis(l + 1).unwrap();
            for x in &a.nodes {
                assert!(b.nodes.iter().any(|y| y.to_bits() == x.to_bits()), "level {l}, node {x}");
            }
        }
    }

    #[test]
    fn smolyak_small_cases() {
        for l in 0..5 {
            let s = smolyak(1, l, RuleFamily::ClenshawCurtis).unwrap();
            let r = clenshaw_curtis(l).unwrap();
            assert_eq!(s.nodes().iter().map(|x| x[0]).collect::<Vec<_>>(), r.nodes);
            for (a, b) in s.weights().iter().zip(&r.weights) {
                assert!((a - b).abs() < 1e-15);
            }
        }
        let s = smolyak(2, 1, RuleFamily::ClenshawCurtis).unwrap();
        assert_eq!(s.len(), 5);
        assert!(s.nodes().contains(&vec![0.0, 0.0]));
        assert!(s.nodes().contains(&vec![-1.0, 0.0]));
        assert!(s.nodes().contains(&vec![0.0, 1.0]));
        let s = smolyak(2, 2, RuleFamily::ClenshawCurtis).unwrap();
        assert!((s.integrate(|x| x[0] * x[0] + x[1] * x[1]) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn smolyak_sizes_and_weight_sums() {
        for d in 1..=4 {
            for l in 0..=5 {
                let s = smolyak(d, l, RuleFamily::ClenshawCurtis).unwrap();
                assert_eq!(s.len(), smolyak_cc_size(d, l), "d={d}, l={l}");
                assert!((s.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
                if d >= 2 && l >= 1 {
                    assert!(s.len() < clenshaw_curtis_size(l).pow(d as u32));
                }
                let g = smolyak(d, l, RuleFamily::Gauss).unwrap();
                assert!((g.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn default_level_targets_twenty_times_m() {
        let l = default_test_level(4, 500);
        assert!(smolyak_cc_size(4, l) >= 10_000);
        assert!(smolyak_cc_size(4, l - 1) < 10_000);
        // capped for large dimensions
        let l = default_test_level(30, 500);
        assert!(smolyak_cc_size(30, l) <= 100_000);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let s = smolyak(2, 1, RuleFamily::ClenshawCurtis).unwrap();
        let csv = s.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x1,x2,w"));
        assert_eq!(lines.count(), 5);
    }
}
