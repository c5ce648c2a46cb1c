//! Multi-indices, weight systems and index sets.
//!
//! A [`MultiIndex`] is a finitely supported exponent vector `ν` stored sparsely as
//! `(dimension, exponent)` pairs with 1-based dimensions and strictly positive exponents.
//! The canonical order on multi-indices is total degree first, then the sparse pair list
//! compared lexicographically, so `e₁ < e₂ < e₁+e₂ < 2e₁`. Every greedy selection in the
//! crate breaks ties with this order.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Sparse exponent vector with finite support.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex {
    entries: Vec<(usize, u32)>,
}

impl MultiIndex {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The unit index `e_dim` (1-based).
    pub fn unit(dim: usize) -> Self {
        assert!(dim >= 1, "dimensions are 1-based");
        Self {
            entries: vec![(dim, 1)],
        }
    }

    /// Builds an index from `(dimension, exponent)` pairs. Zero exponents are dropped.
    pub fn from_pairs<I: IntoIterator<Item = (usize, u32)>>(pairs: I) -> Result<Self> {
        let mut entries: Vec<(usize, u32)> = pairs.into_iter().filter(|&(_, e)| e > 0).collect();
        entries.sort_unstable_by_key(|&(d, _)| d);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::invalid(format!("dimension {} repeated", w[0].0)));
            }
        }
        if entries.first().is_some_and(|&(d, _)| d == 0) {
            return Err(Error::invalid("dimensions are 1-based"));
        }
        Ok(Self { entries })
    }

    /// Builds an index from a dense exponent vector; entry `i` is dimension `i + 1`.
    pub fn from_dense(exps: &[u32]) -> Self {
        Self {
            entries: exps
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| (i + 1, e))
                .collect(),
        }
    }

    /// Exponent in dimension `dim` (1-based), zero outside the support.
    pub fn get(&self, dim: usize) -> u32 {
        self.entries
            .binary_search_by_key(&dim, |&(d, _)| d)
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.entries.iter().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// `‖ν‖₁`.
    pub fn total_degree(&self) -> u32 {
        self.entries.iter().map(|&(_, e)| e).sum()
    }

    /// Largest active dimension, 0 for the zero index.
    pub fn max_dim(&self) -> usize {
        self.entries.last().map_or(0, |&(d, _)| d)
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self, d: usize) -> Vec<u32> {
        let mut out = vec![0; d];
        for &(k, e) in &self.entries {
            if k <= d {
                out[k - 1] = e;
            }
        }
        out
    }

    /// Componentwise `self ≤ other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.entries.iter().all(|&(d, e)| other.get(d) >= e)
    }

    /// Every index obtained by lowering one exponent by one.
    pub fn predecessors(&self) -> Vec<MultiIndex> {
        (0..self.entries.len())
            .map(|i| {
                let mut entries = self.entries.clone();
                if entries[i].1 == 1 {
                    entries.remove(i);
                } else {
                    entries[i].1 -= 1;
                }
                MultiIndex { entries }
            })
            .collect()
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.entries.cmp(&other.entries))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (d, e)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{d}:{e}")?;
        }
        Ok(())
    }
}

impl FromStr for MultiIndex {
    type Err = Error;

    /// Parses whitespace-separated `dim:exp` pairs; the empty string is the zero index.
    fn from_str(s: &str) -> Result<Self> {
        let pairs = s
            .split_whitespace()
            .map(|tok| {
                let (d, e) = tok
                    .split_once(':')
                    .ok_or_else(|| Error::invalid(format!("expected dim:exp, got {tok:?}")))?;
                let d: usize = d
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad dimension in {tok:?}")))?;
                let e: u32 = e
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad exponent in {tok:?}")))?;
                Ok((d, e))
            })
            .collect::<Result<Vec<_>>>()?;
        MultiIndex::from_pairs(pairs)
    }
}

/// The weights `u_ν = ∏ √(2ν_k+1)` and `v_ν = u_ν^{5+ξ}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightSystem {
    xi: f64,
}

impl Default for WeightSystem {
    fn default() -> Self {
        Self { xi: 0.0 }
    }
}

impl WeightSystem {
    pub fn new(xi: f64) -> Result<Self> {
        if !(xi >= 0.0 && xi.is_finite()) {
            return Err(Error::invalid(format!("xi must be finite and >= 0, got {xi}")));
        }
        Ok(Self { xi })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// Exponent `5 + ξ` relating the two weight families.
    pub fn exponent(&self) -> f64 {
        5.0 + self.xi
    }

    fn integral_exponent(&self) -> Option<i32> {
        (self.xi.fract() == 0.0 && self.xi < 1e6).then(|| 5 + self.xi as i32)
    }

    pub fn u(&self, nu: &MultiIndex) -> f64 {
        u_weight(nu)
    }

    pub fn v(&self, nu: &MultiIndex) -> f64 {
        v_weight(nu, self)
    }

    /// `w_ν²` for the chosen family. Exact in floating point whenever the result is an
    /// integer below 2⁵³ (always for `u`, and for `v` with integral ξ).
    pub fn squared(&self, nu: &MultiIndex, kind: WeightKind) -> f64 {
        let u2 = u_weight_sq(nu);
        match kind {
            WeightKind::U => u2,
            WeightKind::V => match self.integral_exponent() {
                Some(e) => u2.powi(e),
                None => u2.powf(self.exponent()),
            },
        }
    }

    /// Budget test `total ≤ k`, exact for integral ξ and with relative slack 1e-12 otherwise.
    pub fn within_budget(&self, total: f64, k: f64) -> bool {
        if self.integral_exponent().is_some() {
            total <= k
        } else {
            total <= k * (1.0 + 1e-12)
        }
    }
}

/// Selector for the weight family used by [`weighted_cardinality`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightKind {
    U,
    V,
}

fn u_weight_sq(nu: &MultiIndex) -> f64 {
    nu.iter().map(|(_, e)| (2 * e + 1) as f64).product()
}

/// `u_ν = ‖Ψ_ν‖_∞ = ∏_{k ∈ supp ν} √(2ν_k+1)`.
pub fn u_weight(nu: &MultiIndex) -> f64 {
    nu.iter().map(|(_, e)| ((2 * e + 1) as f64).sqrt()).product()
}

/// `v_ν = u_ν^{5+ξ}`.
pub fn v_weight(nu: &MultiIndex, w: &WeightSystem) -> f64 {
    u_weight(nu).powf(w.exponent())
}

/// `|S|_w = Σ_{ν∈S} w_ν²`.
pub fn weighted_cardinality(s: &IndexSet, kind: WeightKind, w: &WeightSystem) -> f64 {
    s.iter().map(|nu| w.squared(nu, kind)).sum()
}

/// Deduplicated, canonically ordered collection of multi-indices supported in `{1,…,dim_bound}`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct IndexSet {
    indices: Vec<MultiIndex>,
    dim_bound: usize,
}

impl IndexSet {
    pub fn new(indices: Vec<MultiIndex>, dim_bound: usize) -> Result<Self> {
        if let Some(bad) = indices.iter().find(|nu| nu.max_dim() > dim_bound) {
            return Err(Error::invalid(format!(
                "index {bad} has support outside 1..={dim_bound}"
            )));
        }
        let mut indices = indices;
        indices.sort();
        indices.dedup();
        Ok(Self { indices, dim_bound })
    }

    /// Index set whose dimension bound is the largest active dimension.
    pub fn from_indices<I: IntoIterator<Item = MultiIndex>>(indices: I) -> Self {
        let indices: Vec<_> = indices.into_iter().collect();
        let dim_bound = indices.iter().map(MultiIndex::max_dim).max().unwrap_or(0);
        Self::new(indices, dim_bound).expect("dimension bound covers every support")
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn dim_bound(&self) -> usize {
        self.dim_bound
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MultiIndex> {
        self.indices.iter()
    }

    pub fn as_slice(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn get(&self, i: usize) -> Option<&MultiIndex> {
        self.indices.get(i)
    }

    pub fn position(&self, nu: &MultiIndex) -> Option<usize> {
        self.indices.binary_search(nu).ok()
    }

    pub fn contains(&self, nu: &MultiIndex) -> bool {
        self.position(nu).is_some()
    }

    pub fn max_total_degree(&self) -> u32 {
        self.indices.iter().map(MultiIndex::total_degree).max().unwrap_or(0)
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let mut all = self.indices.clone();
        all.extend(other.indices.iter().cloned());
        IndexSet::new(all, self.dim_bound.max(other.dim_bound)).expect("bounds cover supports")
    }

    pub fn intersection(&self, other: &IndexSet) -> IndexSet {
        let kept = self.indices.iter().filter(|nu| other.contains(nu)).cloned().collect();
        IndexSet::new(kept, self.dim_bound).expect("subset of a valid set")
    }

    /// Subset picked by positions into this set.
    pub fn subset(&self, positions: &[usize]) -> IndexSet {
        let kept = positions.iter().map(|&i| self.indices[i].clone()).collect();
        IndexSet::new(kept, self.dim_bound).expect("subset of a valid set")
    }

    /// `ν ∈ Λ, μ ≤ ν ⇒ μ ∈ Λ`.
    pub fn is_downward_closed(&self) -> bool {
        self.indices
            .iter()
            .all(|nu| nu.predecessors().iter().all(|mu| self.contains(mu)))
    }

    /// One line per index, `dim:exp` pairs separated by spaces; an empty line is the zero index.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for nu in &self.indices {
            out.push_str(&nu.to_string());
            out.push('\n');
        }
        out
    }

    /// Inverse of [`IndexSet::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let body = text.strip_suffix('\n').unwrap_or(text);
        if text.is_empty() {
            return Ok(IndexSet::default());
        }
        let indices = body
            .split('\n')
            .enumerate()
            .map(|(i, line)| {
                line.trim_end_matches('\r')
                    .parse::<MultiIndex>()
                    .map_err(|e| Error::parse(i + 1, e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(IndexSet::from_indices(indices))
    }
}

impl<'a> IntoIterator for &'a IndexSet {
    type Item = &'a MultiIndex;
    type IntoIter = std::slice::Iter<'a, MultiIndex>;

    fn into_iter(self) -> Self::IntoIter {
        self.indices.iter()
    }
}

/// The hyperbolic cross `{ν : ∏_{ν_k≠0}(ν_k+1) ≤ n, ν_k = 0 for k > n}`.
pub fn hyperbolic_cross(n: usize) -> Result<IndexSet> {
    hyperbolic_cross_in(n, n)
}

/// The hyperbolic cross of order `n` restricted to the first `d` dimensions.
pub fn hyperbolic_cross_in(n: usize, d: usize) -> Result<IndexSet> {
    if n == 0 {
        return Err(Error::invalid("hyperbolic cross order must be >= 1"));
    }
    let dims = d.min(n);
    let mut out = Vec::new();
    let mut current = vec![0u32; dims];
    enumerate_hc(0, 1, n, &mut current, &mut out);
    IndexSet::new(out, d)
}

fn enumerate_hc(k: usize, prod: usize, n: usize, current: &mut [u32], out: &mut Vec<MultiIndex>) {
    if k == current.len() {
        out.push(MultiIndex::from_dense(current));
        return;
    }
    let mut e = 0u32;
    loop {
        let factor = e as usize + 1;
        if prod * factor > n {
            break;
        }
        current[k] = e;
        enumerate_hc(k + 1, prod * factor, n, current, out);
        e += 1;
    }
    current[k] = 0;
}

/// Greedy realization of a budget set: indices are visited in decreasing `score / v_ν²`
/// (ties broken by the canonical order) and added whenever `|S|_v` stays within `k`.
pub fn truncate_to_budget(
    lambda: &IndexSet,
    k: f64,
    w: &WeightSystem,
    scores: &[f64],
) -> Result<IndexSet> {
    if scores.len() != lambda.len() {
        return Err(Error::DimensionMismatch {
            expected: lambda.len(),
            found: scores.len(),
        });
    }
    if scores.iter().any(|&s| !(s >= 0.0)) {
        return Err(Error::invalid("scores must be nonnegative"));
    }
    let costs: Vec<f64> = lambda.iter().map(|nu| w.squared(nu, WeightKind::V)).collect();
    let mut order: Vec<usize> = (0..lambda.len()).collect();
    order.sort_by(|&a, &b| {
        (scores[b] / costs[b])
            .partial_cmp(&(scores[a] / costs[a]))
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut used = 0.0;
    let mut kept = Vec::new();
    for i in order {
        if w.within_budget(used + costs[i], k) {
            used += costs[i];
            kept.push(i);
        }
    }
    Ok(lambda.subset(&kept))
}

/// `‖c‖_{p,w} = (Σ w_i^{2−p} |c_i|^p)^{1/p}`.
pub fn weighted_lp_norm(c: &[f64], weights: &[f64], p: f64) -> f64 {
    c.iter()
        .zip(weights)
        .map(|(&ci, &wi)| wi.powf(2.0 - p) * ci.abs().powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

/// Outcome of a weighted best-`k`-term computation.
#[derive(Clone, Debug, PartialEq)]
pub struct StechkinEstimate {
    /// `σ_k(c)_{q,w}` realized by the greedy set.
    pub error: f64,
    /// `‖c‖_{p,w} · k^{1/q−1/p}`.
    pub bound: f64,
    /// Positions kept by the greedy rule.
    pub selected: Vec<usize>,
}

/// Weighted best-`k`-term tail `σ_k(c)_{q,w}` via largest-`|c_i|/w_i`-first selection
/// under `Σ_{i∈S} w_i² ≤ k`, paired with the Stechkin bound `‖c‖_{p,w} k^{1/q−1/p}`.
pub fn stechkin_error(c: &[f64], weights: &[f64], k: f64, q: f64, p: f64) -> Result<StechkinEstimate> {
    if c.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: c.len(),
            found: weights.len(),
        });
    }
    if !(p > 0.0 && p < q && q <= 2.0) {
        return Err(Error::invalid(format!("need 0 < p < q <= 2, got p={p}, q={q}")));
    }
    if c.iter().any(|&x| !(x >= 0.0)) || weights.iter().any(|&x| !(x >= 1.0)) {
        return Err(Error::invalid("entries must be >= 0 and weights >= 1"));
    }
    if !(k > 0.0) {
        return Err(Error::invalid("budget must be positive"));
    }
    let mut order: Vec<usize> = (0..c.len()).collect();
    order.sort_by(|&a, &b| {
        (c[b] / weights[b])
            .partial_cmp(&(c[a] / weights[a]))
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut used = 0.0;
    let mut in_set = vec![false; c.len()];
    let mut selected = Vec::new();
    for i in order {
        let cost = weights[i] * weights[i];
        if used + cost <= k {
            used += cost;
            in_set[i] = true;
            selected.push(i);
        }
    }
    let (tail_c, tail_w): (Vec<f64>, Vec<f64>) = c
        .iter()
        .zip(weights)
        .zip(&in_set)
        .filter(|(_, &kept)| !kept)
        .map(|((&ci, &wi), _)| (ci, wi))
        .unzip();
    let error = weighted_lp_norm(&tail_c, &tail_w, q);
    let bound = weighted_lp_norm(c, weights, p) * k.powf(1.0 / q - 1.0 / p);
    selected.sort_unstable();
    Ok(StechkinEstimate {
        error,
        bound,
        selected,
    })
}

/// Minimal monotone majorant `b̃_i = sup_{j ≥ i} |b_j|` of a finite sequence.
pub fn monotone_majorant(b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; b.len()];
    let mut running = 0.0f64;
    for i in (0..b.len()).rev() {
        running = running.max(b[i].abs());
        out[i] = running;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(pairs: &[(usize, u32)]) -> MultiIndex {
        MultiIndex::from_pairs(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn weights_match_direct_substitution() {
        let w0 = WeightSystem::new(0.0).unwrap();
        let w1 = WeightSystem::new(1.0).unwrap();
        assert_eq!(u_weight(&MultiIndex::zero()), 1.0);
        assert!((u_weight(&MultiIndex::unit(1)) - 3f64.sqrt()).abs() < 1e-15);
        assert!((u_weight(&mi(&[(1, 2), (2, 1)])) - 15f64.sqrt()).abs() < 1e-14);
        assert_eq!(v_weight(&MultiIndex::zero(), &w1), 1.0);
        assert!((v_weight(&MultiIndex::unit(1), &w0) - 15.588457268119896).abs() < 1e-12);
        assert!((v_weight(&MultiIndex::unit(1), &w1) - 27.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_cardinality_examples() {
        let w = WeightSystem::default();
        assert_eq!(weighted_cardinality(&IndexSet::default(), WeightKind::U, &w), 0.0);
        let s = IndexSet::from_indices([MultiIndex::zero(), MultiIndex::unit(1)]);
        assert_eq!(weighted_cardinality(&s, WeightKind::U, &w), 4.0);
        let s = IndexSet::from_indices([MultiIndex::unit(1)]);
        assert_eq!(weighted_cardinality(&s, WeightKind::V, &w), 243.0);
    }

    #[test]
    fn canonical_order_breaks_ties_by_dimension() {
        let mut v = vec![mi(&[(1, 2)]), mi(&[(2, 1)]), mi(&[(1, 1), (2, 1)]), MultiIndex::unit(1)];
        v.sort();
        assert_eq!(v, vec![MultiIndex::unit(1), mi(&[(2, 1)]), mi(&[(1, 1), (2, 1)]), mi(&[(1, 2)])]);
    }

    #[test]
    fn small_hyperbolic_crosses() {
        assert_eq!(hyperbolic_cross(1).unwrap().as_slice(), &[MultiIndex::zero()]);
        let hc2 = hyperbolic_cross(2).unwrap();
        assert_eq!(hc2.len(), 3);
        assert!(hc2.contains(&MultiIndex::unit(2)));
    }

    #[test]
    fn hyperbolic_cross_matches_box_enumeration() {
        for n in 1..=6usize {
            let hc = hyperbolic_cross(n).unwrap();
            // brute force over the box {0,…,n-1}^n
            let mut count = 0;
            let total = n.pow(n as u32);
            for code in 0..total {
                let mut c = code;
                let mut prod = 1usize;
                let mut dense = vec![0u32; n];
                for slot in dense.iter_mut() {
                    *slot = (c % n) as u32;
                    c /= n;
                    prod *= *slot as usize + 1;
                }
                if prod <= n {
                    count += 1;
                    assert!(hc.contains(&MultiIndex::from_dense(&dense)));
                }
            }
            assert_eq!(hc.len(), count, "n = {n}");
        }
        let hc4 = hyperbolic_cross(4).unwrap();
        assert!(hc4.contains(&mi(&[(1, 3)])));
        assert!(hc4.contains(&mi(&[(1, 1), (2, 1)])));
    }

    #[test]
    fn hyperbolic_cross_is_downward_closed() {
        for n in 1..=8 {
            assert!(hyperbolic_cross(n).unwrap().is_downward_closed(), "n = {n}");
        }
    }

    #[test]
    fn zero_order_is_rejected() {
        assert!(hyperbolic_cross(0).is_err());
    }

    #[test]
    fn truncation_examples() {
        let w = WeightSystem::default();
        let lambda = IndexSet::from_indices([MultiIndex::zero(), MultiIndex::unit(1), MultiIndex::unit(2)]);
        let all = truncate_to_budget(&lambda, 1e9, &w, &[1.0, 0.0, 2.0]).unwrap();
        assert_eq!(all, lambda);
        let only_zero = truncate_to_budget(&lambda, 100.0, &w, &[0.5, 1.0, 1.0]).unwrap();
        assert_eq!(only_zero.as_slice(), &[MultiIndex::zero()]);
        let pair = truncate_to_budget(&lambda, 244.0, &w, &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(pair.as_slice(), &[MultiIndex::zero(), MultiIndex::unit(1)]);
        assert!(truncate_to_budget(&lambda, 1.0, &w, &[1.0]).is_err());
    }

    #[test]
    fn stechkin_unweighted_example() {
        let c = [1.0, 0.5, 0.25];
        let est = stechkin_error(&c, &[1.0; 3], 2.0, 2.0, 1.0).unwrap();
        assert!((est.error - 0.25).abs() < 1e-15);
        // brute force over all supports of size <= 2
        let mut best = f64::INFINITY;
        for mask in 0u32..8 {
            if mask.count_ones() <= 2 {
                let tail: f64 = (0..3).filter(|i| mask & (1 << i) == 0).map(|i| c[i] * c[i]).sum();
                best = best.min(tail.sqrt());
            }
        }
        assert_eq!(est.error, best);
        assert!(est.error <= est.bound);
        let z = stechkin_error(&[0.0; 4], &[1.0; 4], 2.0, 2.0, 0.5).unwrap();
        assert_eq!((z.error, z.bound), (0.0, 0.0));
        assert!(stechkin_error(&c, &[1.0; 3], 2.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn text_format_round_trips_zero_index() {
        let s = IndexSet::from_indices([MultiIndex::zero(), MultiIndex::unit(1), mi(&[(1, 1), (3, 2)])]);
        let text = s.to_text();
        assert!(text.starts_with('\n'));
        assert_eq!(IndexSet::from_text(&text).unwrap(), s);
        assert!(IndexSet::from_text("1:x\n").is_err());
    }

    #[test]
    fn majorant_is_suffix_max() {
        assert_eq!(monotone_majorant(&[0.1, -0.5, 0.2, 0.0]), vec![0.5, 0.5, 0.2, 0.0]);
    }
}
