//! Lower-bound sequences and their best s-term tails, plus random-matrix probes: delocalization
//! of null vectors and smallest singular values of scaled uniform matrices.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::neural::null_space;
use crate::quadrature::gauss_legendre;
use crate::sampling::{mix_seed, stream_rng};

/// Explicitly stored entries of a log-damped sequence; the rest enters through an integral tail.
pub const LOG_DAMPED_LENGTH: usize = 1 << 20;

/// Variance of the uniform distribution on `[-1,1]`.
pub const UNIFORM_OMEGA: f64 = 1.0 / 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SequenceKind {
    Flat2m,
    LogDamped,
}

impl SequenceKind {
    pub fn name(&self) -> &'static str {
        match self {
            SequenceKind::Flat2m => "flat-2m",
            SequenceKind::LogDamped => "log-damped",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "flat-2m" => Ok(SequenceKind::Flat2m),
            "log-damped" => Ok(SequenceKind::LogDamped),
            other => Err(Error::invalid(format!("unknown sequence kind '{other}'"))),
        }
    }
}

/// Nonincreasing sequence with unit `ℓᵖ` quasi-norm.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerBoundSequence {
    kind: SequenceKind,
    p: f64,
    m: usize,
    /// Normalizing constant (`(2m)^{−1/p}` for the flat sequence).
    c_p: f64,
    values: Vec<f64>,
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("p = {p} must lie in (0,1)")))
    }
}

/// Unnormalized log-damped entry `(i log² i)^{−1/p}`, with entry 1 copied from entry 2.
fn damped(i: usize, p: f64) -> f64 {
    let x = i.max(2) as f64;
    (x * x.ln().powi(2)).powf(-1.0 / p)
}

/// `∫_{N+½}^∞ (x log² x)^{−q/p} dx` in the variable `t = log x`.
fn damped_tail_integral(n: usize, p: f64, q: f64) -> Result<f64> {
    let a = (n as f64 + 0.5).ln();
    if (q - p).abs() < 1e-15 {
        return Ok(1.0 / a);
    }
    let kappa = q / p - 1.0;
    if kappa <= 0.0 {
        return Err(Error::invalid(format!("tail of order q = {q} diverges for p = {p}")));
    }
    // e^{−κa}/κ · ∫_0^∞ e^{−s} (a + s/κ)^{−2q/p} ds, truncated at s = 60
    let rule = gauss_legendre(32)?;
    let panels = 12;
    let width = 60.0 / panels as f64;
    let mut total = 0.0;
    for j in 0..panels {
        let lo = j as f64 * width;
        total += width * rule.integrate(|u| {
            let s = lo + 0.5 * width * (u + 1.0);
            (-s).exp() * (a + s / kappa).powf(-2.0 * q / p)
        });
    }
    Ok((-kappa * a).exp() / kappa * total)
}

impl LowerBoundSequence {
    /// `b_i = (2m)^{−1/p}` for `i ≤ 2m`, zero afterwards.
    pub fn flat(p: f64, m: usize) -> Result<Self> {
        check_p(p)?;
        if m == 0 {
            return Err(Error::invalid("m must be positive"));
        }
        let c_p = ((2 * m) as f64).powf(-1.0 / p);
        Ok(Self {
            kind: SequenceKind::Flat2m,
            p,
            m,
            c_p,
            values: vec![c_p; 2 * m],
        })
    }

    /// `b_i = c_p (i log² i)^{−1/p}` for `i ≥ 2` and `b₁ = b₂`.
    pub fn log_damped(p: f64) -> Result<Self> {
        check_p(p)?;
        let raw: Vec<f64> = (1..=LOG_DAMPED_LENGTH).map(|i| damped(i, p)).collect();
        let powers: Vec<f64> = raw.iter().map(|v| v.powf(p)).collect();
        let mass = sum_reversed(&powers) + damped_tail_integral(LOG_DAMPED_LENGTH, p, p)?;
        let c_p = mass.powf(-1.0 / p);
        Ok(Self {
            kind: SequenceKind::LogDamped,
            p,
            m: 0,
            c_p,
            values: raw.into_iter().map(|v| c_p * v).collect(),
        })
    }

    pub fn new(kind: SequenceKind, p: f64, m: usize) -> Result<Self> {
        match kind {
            SequenceKind::Flat2m => Self::flat(p, m),
            SequenceKind::LogDamped => Self::log_damped(p),
        }
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn c_p(&self) -> f64 {
        self.c_p
    }

    /// Stored entries (all nonzero entries for the flat sequence).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }

    /// `(Σ_{i>s} b_i^q)`, including the integral tail beyond the stored entries.
    fn tail_power_sum(&self, s: usize, q: f64) -> Result<f64> {
        let powers: Vec<f64> = self.values.iter().skip(s).map(|v| v.powf(q)).collect();
        let explicit = sum_reversed(&powers);
        let tail = match self.kind {
            SequenceKind::Flat2m => 0.0,
            SequenceKind::LogDamped => self.c_p.powf(q) * damped_tail_integral(self.values.len(), self.p, q)?,
        };
        Ok(explicit + tail)
    }

    /// `‖b‖_q`.
    pub fn norm(&self, q: f64) -> Result<f64> {
        Ok(self.tail_power_sum(0, q)?.powf(1.0 / q))
    }
}

/// Summation from the smallest entries upward.
fn sum_reversed(values: &[f64]) -> f64 {
    values.iter().rev().sum()
}

/// Best `s`-term error in `ℓ^q`, computed and (when available) in closed form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SigmaValue {
    pub numeric: f64,
    pub closed_form: Option<f64>,
}

/// `σ_s(b)_q = min{‖b − z‖_q : |supp z| ≤ s}`: the tail after the `s` largest entries.
pub fn sigma_s_closed_forms(seq: &LowerBoundSequence, s: usize, q: u32) -> Result<SigmaValue> {
    if q != 1 && q != 2 {
        return Err(Error::invalid(format!("q = {q} must be 1 or 2")));
    }
    if !seq.is_nonincreasing() {
        return Err(Error::invalid("sequence is not nonincreasing"));
    }
    let qf = q as f64;
    let numeric = seq.tail_power_sum(s, qf)?.powf(1.0 / qf);
    let closed_form = match seq.kind {
        SequenceKind::Flat2m => {
            let n = 2 * seq.m;
            let remaining = n.saturating_sub(s) as f64;
            Some(remaining.powf(1.0 / qf) * (n as f64).powf(-1.0 / seq.p))
        }
        SequenceKind::LogDamped => None,
    };
    Ok(SigmaValue { numeric, closed_form })
}

/// Lower estimate `c_p √m (2m log²(2m))^{−1/p}` of `σ_m(b)₂` for the log-damped sequence.
pub fn log_damped_lower_estimate(c_p: f64, p: f64, m: usize) -> f64 {
    let two_m = 2.0 * m as f64;
    c_p * (m as f64).sqrt() * (two_m * two_m.ln().powi(2)).powf(-1.0 / p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FloorNorm {
    L2,
    Sup,
}

impl FloorNorm {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "2" | "l2" => Ok(FloorNorm::L2),
            "inf" | "sup" => Ok(FloorNorm::Sup),
            other => Err(Error::invalid(format!("unknown norm '{other}', expected 2 or inf"))),
        }
    }
}

/// Shape-only lower-bound curves next to the sequence quantities they are derived from.
#[derive(Clone, Debug, PartialEq)]
pub struct RateFloor {
    pub m: Vec<usize>,
    pub exponent: f64,
    /// `m^{exponent}`.
    pub theory: Vec<f64>,
    /// `σ_m(b)₂` or `σ_m(b)₁/log m`.
    pub sigma: Vec<f64>,
}

impl RateFloor {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,theory,sigma\n");
        for i in 0..self.m.len() {
            let _ = writeln!(out, "{},{:.16e},{:.16e}", self.m[i], self.theory[i], self.sigma[i]);
        }
        out
    }
}

/// Exponent `1/2 − 1/p` for `ℓ²` and `1 − 1/p` for the sup norm.
pub fn floor_exponent(p: f64, norm: FloorNorm) -> f64 {
    match norm {
        FloorNorm::L2 => 0.5 - 1.0 / p,
        FloorNorm::Sup => 1.0 - 1.0 / p,
    }
}

pub fn rate_floor(kind: SequenceKind, p: f64, m_values: &[usize], norm: FloorNorm) -> Result<RateFloor> {
    check_p(p)?;
    let min_m = if norm == FloorNorm::Sup { 2 } else { 1 };
    if m_values.iter().any(|&m| m < min_m) {
        return Err(Error::invalid(format!("sample counts must be >= {min_m}")));
    }
    let exponent = floor_exponent(p, norm);
    let shared = match kind {
        SequenceKind::LogDamped => Some(LowerBoundSequence::log_damped(p)?),
        SequenceKind::Flat2m => None,
    };
    let mut sigma = Vec::with_capacity(m_values.len());
    for &m in m_values {
        let seq = match &shared {
            Some(s) => s.clone(),
            None => LowerBoundSequence::flat(p, m)?,
        };
        let value = match norm {
            FloorNorm::L2 => sigma_s_closed_forms(&seq, m, 2)?.numeric,
            FloorNorm::Sup => sigma_s_closed_forms(&seq, m, 1)?.numeric / (m as f64).ln(),
        };
        sigma.push(value);
    }
    Ok(RateFloor {
        m: m_values.to_vec(),
        exponent,
        theory: m_values.iter().map(|&m| (m as f64).powf(exponent)).collect(),
        sigma,
    })
}

/// Linearly interpolated quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub median: f64,
    pub q10: f64,
    pub q90: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let s = sorted(values);
        Self {
            median: quantile(&s, 0.5),
            q10: quantile(&s, 0.1),
            q90: quantile(&s, 0.9),
        }
    }
}

/// Per-`m` statistics `(m+1)·‖u‖∞²` of unit null vectors of `m × (m+1)` uniform matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct SpikinessReport {
    pub m_values: Vec<usize>,
    pub statistics: Vec<Vec<f64>>,
    /// Draws discarded because the kernel was not one-dimensional.
    pub redraws: Vec<usize>,
}

impl SpikinessReport {
    pub fn summaries(&self) -> Vec<Summary> {
        self.statistics.iter().map(|s| Summary::of(s)).collect()
    }

    /// Envelope `slack · median(m₀) · log(m+1)/log(m₀+1)` calibrated at the first `m`.
    pub fn envelope(&self, slack: f64) -> Vec<f64> {
        let summaries = self.summaries();
        let m0 = self.m_values[0] as f64;
        let base = summaries[0].median;
        self.m_values
            .iter()
            .map(|&m| slack * base * ((m + 1) as f64).ln() / (m0 + 1.0).ln())
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,trial,statistic\n");
        for (m, stats) in self.m_values.iter().zip(&self.statistics) {
            for (t, s) in stats.iter().enumerate() {
                let _ = writeln!(out, "{m},{t},{s:.16e}");
            }
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("m,median,q10,q90\n");
        for (m, s) in self.m_values.iter().zip(self.summaries()) {
            let _ = writeln!(out, "{m},{:.16e},{:.16e},{:.16e}", s.median, s.q10, s.q90);
        }
        out
    }
}

fn uniform_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    // filled row by row so that a draw does not depend on storage order
    let mut a = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            a[(i, j)] = rng.gen_range(-1.0..=1.0);
        }
    }
    a
}

const MAX_REDRAWS: usize = 100;

/// Unit null vector of one `m × (m+1)` draw and the number of rejected draws before it.
pub fn spikiness_trial(m: usize, seed: u64) -> Result<(Vec<f64>, DMatrix<f64>, usize)> {
    for attempt in 0..MAX_REDRAWS {
        let mut rng = stream_rng(seed, attempt as u64);
        let a = uniform_matrix(&mut rng, m, m + 1);
        let ns = null_space(&a);
        if ns.ncols() != 1 {
            continue;
        }
        let u: Vec<f64> = ns.column(0).iter().copied().collect();
        let residual = (&a * ns.column(0)).amax();
        let unit = (ns.column(0).norm() - 1.0).abs();
        if residual > 1e-10 || unit > 1e-12 {
            return Err(Error::NonFinite(format!("null vector residual {residual:e}, norm defect {unit:e}")));
        }
        return Ok((u, a, attempt));
    }
    Err(Error::RankDeficient { rank: m - 1, expected: m })
}

pub fn nullspace_spikiness(m_values: &[usize], trials: usize, seed: u64) -> Result<SpikinessReport> {
    if trials == 0 {
        return Err(Error::invalid("trials must be positive"));
    }
    if m_values.is_empty() || m_values.contains(&0) {
        return Err(Error::invalid("m values must be positive"));
    }
    let jobs: Vec<(usize, usize)> = m_values.iter().flat_map(|&m| (0..trials).map(move |t| (m, t))).collect();
    let results: Vec<Result<(f64, usize)>> = jobs
        .par_iter()
        .map(|&(m, t)| {
            let (u, _, redraws) = spikiness_trial(m, mix_seed(&[seed, m as u64, t as u64]))?;
            let sup = u.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            Ok(((m + 1) as f64 * sup * sup, redraws))
        })
        .collect();
    let mut statistics = vec![Vec::with_capacity(trials); m_values.len()];
    let mut redraws = vec![0; m_values.len()];
    for (job, result) in results.into_iter().enumerate() {
        let (stat, extra) = result?;
        statistics[job / trials].push(stat);
        redraws[job / trials] += extra;
    }
    Ok(SpikinessReport {
        m_values: m_values.to_vec(),
        statistics,
        redraws,
    })
}

/// Smallest singular values of `B″ = √3·√ω/√r · A`, `A` an `r × m` matrix of unit-variance
/// uniform entries.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaMinReport {
    pub m: usize,
    pub r: usize,
    pub threshold: f64,
    pub sigma_min: Vec<f64>,
    /// Fraction of trials with `σ_min ≥ threshold`.
    pub fraction: f64,
    pub summary: Summary,
}

impl SigmaMinReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,trial,statistic\n");
        for (t, s) in self.sigma_min.iter().enumerate() {
            let _ = writeln!(out, "{},{t},{s:.16e}", self.m);
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        format!(
            "m,r,median,q10,q90,threshold,fraction\n{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            self.m, self.r, self.summary.median, self.summary.q10, self.summary.q90, self.threshold, self.fraction
        )
    }
}

pub fn subgaussian_sigma_min(m: usize, r: usize, trials: usize, seed: u64) -> Result<SigmaMinReport> {
    if m == 0 || trials == 0 {
        return Err(Error::invalid("m and trials must be positive"));
    }
    if r < m {
        return Err(Error::invalid(format!("need r >= m, got r = {r}, m = {m}")));
    }
    let omega = UNIFORM_OMEGA;
    let scale = 3f64.sqrt() * omega.sqrt() / (r as f64).sqrt();
    let sigma_min: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(mix_seed(&[seed, m as u64, r as u64]), t as u64);
            let a = uniform_matrix(&mut rng, r, m) * (3f64.sqrt() * scale);
            a.singular_values().min()
        })
        .collect();
    let threshold = omega.sqrt() / 2.0;
    let hits = sigma_min.iter().filter(|&&s| s >= threshold).count();
    Ok(SigmaMinReport {
        m,
        r,
        threshold,
        fraction: hits as f64 / trials as f64,
        summary: Summary::of(&sigma_min),
        sigma_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_sequence_closed_forms() {
        for p in [0.3, 0.5, 0.9] {
            for m in [10, 100, 1000] {
                let seq = LowerBoundSequence::flat(p, m).unwrap();
                assert!((seq.norm(p).unwrap() - 1.0).abs() < 1e-12);
                let full = sigma_s_closed_forms(&seq, 0, 2).unwrap();
                let direct = ((2 * m) as f64).sqrt() * ((2 * m) as f64).powf(-1.0 / p);
                assert!((full.numeric - direct).abs() <= 1e-12 * direct);
                let half = sigma_s_closed_forms(&seq, m, 2).unwrap();
                let expected = 2f64.powf(-1.0 / p) * (m as f64).powf(0.5 - 1.0 / p);
                assert!((half.numeric - expected).abs() <= 1e-12 * expected);
                assert!((half.closed_form.unwrap() - expected).abs() <= 1e-12 * expected);
            }
        }
    }

    #[test]
    fn log_damped_normalized_and_above_estimate() {
        for p in [0.3, 0.5, 0.9] {
            let seq = LowerBoundSequence::log_damped(p).unwrap();
            assert!(seq.is_nonincreasing());
            assert_eq!(seq.values()[0], seq.values()[1]);
            assert!((seq.norm(p).unwrap() - 1.0).abs() < 1e-12);
            for m in [10, 100, 1000] {
                let s = sigma_s_closed_forms(&seq, m, 2).unwrap();
                assert!(s.closed_form.is_none());
                assert!(s.numeric >= log_damped_lower_estimate(seq.c_p(), p, m));
            }
        }
    }

    #[test]
    fn tail_integral_matches_direct_sum() {
        let p = 0.5;
        let n = 2000;
        let direct: f64 = ((n + 1)..2_000_000).rev().map(|i| damped(i, p)).sum();
        let integral = damped_tail_integral(n, p, 1.0).unwrap();
        assert!((direct - integral).abs() <= 1e-4 * integral);
    }

    #[test]
    fn floor_exponents() {
        assert!((floor_exponent(1.0 - 1e-12, FloorNorm::L2) + 0.5).abs() < 1e-10);
        assert_eq!(floor_exponent(0.5, FloorNorm::Sup), -1.0);
        let ms = [10, 40, 160, 640];
        let f = rate_floor(SequenceKind::Flat2m, 0.6, &ms, FloorNorm::L2).unwrap();
        for i in 1..ms.len() {
            let lm = (ms[i] as f64 / ms[0] as f64).ln();
            let s_sigma = (f.sigma[i] / f.sigma[0]).ln() / lm;
            let s_theory = (f.theory[i] / f.theory[0]).ln() / lm;
            assert!((s_sigma - s_theory).abs() < 1e-10);
        }
    }

    #[test]
    fn one_by_two_kernel() {
        let (u, a, _) = spikiness_trial(1, 9).unwrap();
        let (x, y) = (a[(0, 0)], a[(0, 1)]);
        let n = x.hypot(y);
        let expected = [-y / n, x / n];
        let same = (u[0] - expected[0]).abs() < 1e-14 && (u[1] - expected[1]).abs() < 1e-14;
        let flipped = (u[0] + expected[0]).abs() < 1e-14 && (u[1] + expected[1]).abs() < 1e-14;
        assert!(same || flipped);
    }

    #[test]
    fn spikiness_at_least_one() {
        let report = nullspace_spikiness(&[3, 8, 15], 40, 5).unwrap();
        for stats in &report.statistics {
            assert_eq!(stats.len(), 40);
            assert!(stats.iter().all(|&s| s >= 1.0 - 1e-12));
        }
        assert_eq!(report.to_csv().lines().count(), 1 + 120);
    }

    #[test]
    fn scalar_sigma_min_probability() {
        let report = subgaussian_sigma_min(1, 1, 20000, 3).unwrap();
        assert!((report.fraction - 5.0 / 6.0).abs() < 0.015);
        assert!(report.sigma_min.iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn quantiles() {
        let v = [3.0, 1.0, 2.0, 4.0, 5.0];
        let s = Summary::of(&v);
        assert_eq!(s.median, 3.0);
        assert!((s.q10 - 1.4).abs() < 1e-15);
        assert!((s.q90 - 4.6).abs() < 1e-15);
    }
}
