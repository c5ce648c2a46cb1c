//! Convergence experiments: configuration, trials, relative test error on a sparse grid,
//! geometric statistics, log-log slopes, theory overlays and reproducible CSV output.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::legendre::{DiscreteNorm, VectorExpansion};
use crate::multiindex::{hyperbolic_cross_in, IndexSet, WeightSystem};
use crate::neural::{train, Activation, Mlp, TrainConfig};
use crate::operators::{generate_training_set, parse_key_values, EncoderDecoder, OperatorOracle, OracleSpec};
use crate::polyfit::{assemble_design, greedy_sparse_fit, least_squares_fit, predicted_rates};
use crate::quadrature::{default_test_level, smolyak, RuleFamily, SparseGridRule};
use crate::sampling::mix_seed;

/// Errors below this value are clamped before taking logarithms.
pub const ERROR_FLOOR: f64 = 1e-16;

/// Fraction of failed trials above which an `m` is flagged.
pub const EXCLUSION_LIMIT: f64 = 0.2;

pub const DEFAULT_M_VALUES: [usize; 14] = [10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 200, 300, 400, 500];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    PolyfitLs,
    PolyfitGreedy,
    Mlp,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::PolyfitLs => "polyfit-ls",
            Method::PolyfitGreedy => "polyfit-greedy",
            Method::Mlp => "mlp",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "polyfit-ls" => Ok(Method::PolyfitLs),
            "polyfit-greedy" => Ok(Method::PolyfitGreedy),
            "mlp" => Ok(Method::Mlp),
            other => Err(Error::invalid(format!("unknown method {other:?}"))),
        }
    }
}

/// Hidden-layer shape written `L×N` (or `LxN`): `L` layers of `N` nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Architecture {
    pub depth: usize,
    pub width: usize,
}

impl Default for Architecture {
    fn default() -> Self {
        Self { depth: 10, width: 20 }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.depth, self.width)
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (l, n) = s
            .split_once(['x', '×'])
            .ok_or_else(|| Error::invalid(format!("architecture {s:?} is not of the form LxN")))?;
        let parse = |v: &str| -> Result<usize> {
            match v.trim().parse::<usize>() {
                Ok(n) if n > 0 => Ok(n),
                _ => Err(Error::invalid(format!("bad architecture {s:?}"))),
            }
        };
        Ok(Self {
            depth: parse(l)?,
            width: parse(n)?,
        })
    }
}

/// Full description of a convergence experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub oracle: OracleSpec,
    pub method: Method,
    /// Hyperbolic cross parameter of the polynomial index set.
    pub index_n: usize,
    /// Greedy budget `k = budget_ratio · m`.
    pub budget_ratio: f64,
    pub xi: f64,
    pub architecture: Architecture,
    pub activation: Activation,
    pub epochs: usize,
    pub m_values: Vec<usize>,
    pub trials: usize,
    /// Clenshaw–Curtis level of the test grid (`None`: chosen from `d` and the largest `m`).
    pub test_level: Option<usize>,
    pub seed_base: u64,
    /// Inclusive `m` range used for the slope fit.
    pub window: (usize, usize),
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            oracle: OracleSpec::default(),
            method: Method::PolyfitLs,
            index_n: 8,
            budget_ratio: 1.0,
            xi: 0.0,
            architecture: Architecture::default(),
            activation: Activation::Tanh,
            epochs: TrainConfig::default().epochs,
            m_values: DEFAULT_M_VALUES.to_vec(),
            trials: 12,
            test_level: None,
            seed_base: 0,
            window: (50, 500),
        }
    }
}

fn join<T: ToString>(values: &[T]) -> String {
    values.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentSpec {
    /// Reduced profile: at most 10⁴ epochs and 3 trials.
    pub fn fast(mut self) -> Self {
        self.epochs = self.epochs.min(10_000);
        self.trials = self.trials.min(3);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_values.is_empty() || self.m_values.windows(2).any(|w| w[0] >= w[1]) || self.m_values[0] == 0 {
            return Err(Error::invalid("m_values must be positive and strictly increasing"));
        }
        if self.trials == 0 || self.epochs == 0 || self.index_n == 0 {
            return Err(Error::invalid("trials, epochs and hc must be positive"));
        }
        if !(self.budget_ratio > 0.0) {
            return Err(Error::invalid("budget_ratio must be positive"));
        }
        if self.window.0 > self.window.1 {
            return Err(Error::invalid("window must satisfy lo <= hi"));
        }
        WeightSystem::new(self.xi)?;
        Ok(())
    }

    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::invalid(format!("bad value {value:?} for {what}"));
        match key {
            "method" => self.method = value.parse()?,
            "hc" => self.index_n = value.parse().map_err(|_| bad("hc"))?,
            "budget_ratio" => self.budget_ratio = value.parse().map_err(|_| bad("budget_ratio"))?,
            "xi" => self.xi = value.parse().map_err(|_| bad("xi"))?,
            "arch" => self.architecture = value.parse()?,
            "activation" => self.activation = Activation::parse(value)?,
            "epochs" => self.epochs = value.parse().map_err(|_| bad("epochs"))?,
            "m_values" => {
                self.m_values = value
                    .split(',')
                    .map(|v| v.trim().parse().map_err(|_| bad("m_values")))
                    .collect::<Result<_>>()?
            }
            "trials" => self.trials = value.parse().map_err(|_| bad("trials"))?,
            "test_level" => {
                self.test_level = match value {
                    "auto" => None,
                    v => Some(v.parse().map_err(|_| bad("test_level"))?),
                }
            }
            "seed" => self.seed_base = value.parse().map_err(|_| bad("seed"))?,
            "window" => {
                let (lo, hi) = value.split_once(',').ok_or_else(|| bad("window"))?;
                self.window = (lo.trim().parse().map_err(|_| bad("window"))?, hi.trim().parse().map_err(|_| bad("window"))?);
            }
            other => self.oracle.apply(other, value)?,
        }
        Ok(())
    }

    /// Parses `key = value` lines; keys not listed here are oracle keys.
    pub fn from_config(text: &str) -> Result<Self> {
        let mut spec = Self::default();
        for (key, value, line) in parse_key_values(text)? {
            spec.apply(&key, &value).map_err(|e| Error::parse(line, e.to_string()))?;
        }
        spec.validate()?;
        Ok(spec)
    }

    /// Canonical configuration text; parsing it back yields the same spec.
    pub fn to_config(&self) -> String {
        let mut out = self.oracle.to_config();
        let _ = writeln!(out, "method = {}", self.method.name());
        let _ = writeln!(out, "hc = {}", self.index_n);
        let _ = writeln!(out, "budget_ratio = {}", self.budget_ratio);
        let _ = writeln!(out, "xi = {}", self.xi);
        let _ = writeln!(out, "arch = {}", self.architecture);
        let _ = writeln!(out, "activation = {}", self.activation.name());
        let _ = writeln!(out, "epochs = {}", self.epochs);
        let _ = writeln!(out, "m_values = {}", join(&self.m_values));
        let _ = writeln!(out, "trials = {}", self.trials);
        match self.test_level {
            Some(l) => {
                let _ = writeln!(out, "test_level = {l}");
            }
            None => out.push_str("test_level = auto\n"),
        }
        let _ = writeln!(out, "seed = {}", self.seed_base);
        let _ = writeln!(out, "window = {},{}", self.window.0, self.window.1);
        out
    }

    pub fn index_set(&self) -> Result<IndexSet> {
        hyperbolic_cross_in(self.index_n, self.oracle.d)
    }

    pub fn test_rule(&self) -> Result<SparseGridRule> {
        let max_m = *self.m_values.last().unwrap_or(&1);
        let level = self.test_level.unwrap_or_else(|| default_test_level(self.oracle.d, max_m));
        smolyak(self.oracle.d, level, RuleFamily::ClenshawCurtis)
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            seed,
            ..TrainConfig::default()
        }
    }

    pub fn manifest(&self) -> Manifest {
        Manifest::new(&self.to_config())
    }
}

/// Configuration text together with its SHA-256 digest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub config: String,
    pub hash: String,
}

impl Manifest {
    pub fn new(config: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(env!("CARGO_PKG_VERSION").as_bytes());
        hasher.update(b"\0");
        hasher.update(config.as_bytes());
        Self {
            config: config.to_string(),
            hash: hex::encode(hasher.finalize()),
        }
    }

    pub fn header(&self) -> String {
        format!("# manifest={}\n", self.hash)
    }
}

/// `(Σ w_i ‖F(X_i) − F̂(X_i)‖²)^{1/2} / (Σ w_i ‖F(X_i)‖²)^{1/2}` on precomputed truth values.
pub fn relative_error_against(predicted: &[Vec<f64>], truth: &[Vec<f64>], rule: &SparseGridRule, norm: &DiscreteNorm) -> Result<f64> {
    if predicted.len() != rule.len() || truth.len() != rule.len() {
        return Err(Error::DimensionMismatch {
            expected: rule.len(),
            found: predicted.len().min(truth.len()),
        });
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for ((p, t), w) in predicted.iter().zip(truth).zip(rule.weights()) {
        if p.len() != norm.dim() || t.len() != norm.dim() {
            return Err(Error::DimensionMismatch {
                expected: norm.dim(),
                found: p.len(),
            });
        }
        num += w * norm.distance(t, p).powi(2);
        den += w * norm.norm(t).powi(2);
    }
    if !(den > 0.0) {
        return Err(Error::ZeroDenominator);
    }
    if !num.is_finite() {
        return Err(Error::NonFinite("test error".into()));
    }
    // sparse-grid weights may be negative; a slightly negative sum means zero error
    Ok((num.max(0.0) / den).sqrt())
}

/// Relative test error of `fhat` against the oracle on the nodes of `rule`.
pub fn relative_test_error<F>(fhat: F, oracle: &OperatorOracle, rule: &SparseGridRule, norm: &DiscreteNorm) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    if rule.dim() != oracle.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: oracle.input_dim(),
            found: rule.dim(),
        });
    }
    let truth = oracle.sample_rule(rule)?;
    let predicted = rule.nodes().par_iter().map(|x| fhat(x)).collect::<Result<Vec<_>>>()?;
    relative_error_against(&predicted, &truth, rule, norm)
}

/// Least-squares slope and intercept of `log y` against `log x`.
pub fn fit_loglog_slope(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::invalid("slope fit needs at least two matching points"));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::invalid("slope fit needs positive finite values"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("slope fit needs distinct abscissae"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Geometric mean and standard-deviation factor of positive values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometricStats {
    pub mean: f64,
    /// `exp(std(log e))`; the band is `[mean/factor, mean·factor]`.
    pub factor: f64,
    /// Whether any value was clamped to [`ERROR_FLOOR`].
    pub clamped: bool,
}

pub fn geometric_stats(values: &[f64]) -> Option<GeometricStats> {
    if values.is_empty() {
        return None;
    }
    let clamped = values.iter().any(|&v| v < ERROR_FLOOR);
    let logs: Vec<f64> = values.iter().map(|&v| v.max(ERROR_FLOOR).ln()).collect();
    let n = logs.len() as f64;
    let mu = logs.iter().sum::<f64>() / n;
    let var = if logs.len() > 1 {
        logs.iter().map(|l| (l - mu).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Some(GeometricStats {
        mean: mu.exp(),
        factor: var.sqrt().exp(),
        clamped,
    })
}

/// Outcome of one `(m, trial)` pair.
#[derive(Clone, Debug, PartialEq)]
pub enum TrialOutcome {
    Error(f64),
    Failed(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub m: usize,
    pub trials: Vec<TrialOutcome>,
    pub stats: Option<GeometricStats>,
    /// More than [`EXCLUSION_LIMIT`] of the trials failed.
    pub flagged: bool,
}

impl ConvergenceRow {
    pub fn errors(&self) -> Vec<f64> {
        self.trials
            .iter()
            .filter_map(|t| match t {
                TrialOutcome::Error(e) => Some(*e),
                TrialOutcome::Failed(_) => None,
            })
            .collect()
    }

    pub fn failures(&self) -> usize {
        self.trials.iter().filter(|t| matches!(t, TrialOutcome::Failed(_))).count()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub manifest: Manifest,
    pub method: Method,
    pub rows: Vec<ConvergenceRow>,
    pub window: (usize, usize),
    /// Log-log slope of the geometric mean over the window, if at least two rows qualify.
    pub slope: Option<f64>,
}

impl ConvergenceTable {
    pub fn flagged(&self) -> bool {
        self.rows.iter().any(|r| r.flagged)
    }

    pub fn row(&self, m: usize) -> Option<&ConvergenceRow> {
        self.rows.iter().find(|r| r.m == m)
    }

    pub fn geometric_mean(&self, m: usize) -> Option<f64> {
        self.row(m).and_then(|r| r.stats).map(|s| s.mean)
    }

    /// One line per `m`: geometric mean, band, trial counts and flags.
    pub fn to_csv(&self) -> String {
        let mut out = self.manifest.header();
        match self.slope {
            Some(s) => {
                let _ = writeln!(out, "# slope[{},{}]={s:.16e}", self.window.0, self.window.1);
            }
            None => {
                let _ = writeln!(out, "# slope[{},{}]=nan", self.window.0, self.window.1);
            }
        }
        out.push_str("m,geomean,band_lo,band_hi,trials_ok,trials_failed,clamped,flagged\n");
        for r in &self.rows {
            let (g, lo, hi, clamped) = match r.stats {
                Some(s) => (s.mean, s.mean / s.factor, s.mean * s.factor, s.clamped),
                None => (f64::NAN, f64::NAN, f64::NAN, false),
            };
            let _ = writeln!(
                out,
                "{},{g:.16e},{lo:.16e},{hi:.16e},{},{},{},{}",
                r.m,
                r.errors().len(),
                r.failures(),
                clamped,
                r.flagged
            );
        }
        out
    }

    /// One line per trial: the error, or `nan` with the failure message.
    pub fn trials_csv(&self) -> String {
        let mut out = self.manifest.header();
        out.push_str("m,trial,error,failure\n");
        for r in &self.rows {
            for (t, outcome) in r.trials.iter().enumerate() {
                match outcome {
                    TrialOutcome::Error(e) => {
                        let _ = writeln!(out, "{},{t},{e:.16e},", r.m);
                    }
                    TrialOutcome::Failed(msg) => {
                        let _ = writeln!(out, "{},{t},nan,{}", r.m, msg.replace(',', ";"));
                    }
                }
            }
        }
        out
    }
}

/// Aggregates per-trial outcomes into a table and fits the slope over `window`.
pub fn build_table(manifest: Manifest, method: Method, window: (usize, usize), outcomes: Vec<(usize, Vec<TrialOutcome>)>) -> ConvergenceTable {
    let rows: Vec<ConvergenceRow> = outcomes
        .into_iter()
        .map(|(m, trials)| {
            let mut row = ConvergenceRow {
                m,
                trials,
                stats: None,
                flagged: false,
            };
            row.stats = geometric_stats(&row.errors());
            row.flagged = row.failures() as f64 > EXCLUSION_LIMIT * row.trials.len() as f64;
            row
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.m >= window.0 && r.m <= window.1)
        .filter_map(|r| r.stats.map(|s| (r.m as f64, s.mean)))
        .unzip();
    let slope = fit_loglog_slope(&xs, &ys).ok().map(|(s, _)| s);
    ConvergenceTable {
        manifest,
        method,
        rows,
        window,
        slope,
    }
}

/// Legendre basis values at the test nodes (`n_test × |Λ|`), shared by every polynomial trial.
struct TestBasis<'a> {
    nodes: &'a [Vec<f64>],
    psi: Option<DMatrix<f64>>,
}

impl TestBasis<'_> {
    fn predict(&self, lambda: &IndexSet, expansion: &VectorExpansion) -> Result<Vec<Vec<f64>>> {
        let psi = self.psi.as_ref().expect("polynomial methods assemble the test basis");
        let mut full = DMatrix::zeros(lambda.len(), expansion.output_dim());
        for (i, nu) in expansion.support().iter().enumerate() {
            let pos = lambda.position(nu).ok_or_else(|| Error::invalid("fit support is not contained in the index set"))?;
            full.row_mut(pos).copy_from(&expansion.coefficients().row(i));
        }
        let out = psi * full;
        Ok(out.row_iter().map(|r| r.iter().copied().collect()).collect())
    }
}

/// Fits one trial and returns the predictions on the test nodes.
fn run_trial(spec: &ExperimentSpec, oracle: &OperatorOracle, lambda: &IndexSet, test: &TestBasis<'_>, m: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let data = generate_training_set(oracle, m, spec.oracle.noise, seed)?;
    let norm = oracle.output_norm();
    match spec.method {
        Method::PolyfitLs | Method::PolyfitGreedy => {
            let design = assemble_design(lambda, &data.x)?;
            let fit = if spec.method == Method::PolyfitLs {
                least_squares_fit(&design, &data.y, norm)?
            } else {
                let w = WeightSystem::new(spec.xi)?;
                greedy_sparse_fit(&design, &data.y, spec.budget_ratio * m as f64, &w, norm)?
            };
            test.predict(lambda, &fit.expansion)
        }
        Method::Mlp => {
            let enc_dec = EncoderDecoder::exact(oracle);
            let net = Mlp::with_architecture(
                oracle.input_dim(),
                oracle.output_dim(),
                spec.architecture.depth,
                spec.architecture.width,
                spec.activation,
                seed,
            )?;
            let outcome = train(&net, &data, &enc_dec, norm, &spec.train_config(seed))?;
            let out = outcome.net.forward_points(test.nodes)?;
            Ok(out.iter().map(|y| enc_dec.decode_output(y)).collect())
        }
    }
}

/// Seed of trial `t` at sample count `m`.
pub fn trial_seed(seed_base: u64, m: usize, t: usize) -> u64 {
    mix_seed(&[seed_base, m as u64, t as u64])
}

/// Runs every `(m, trial)` pair, measures the relative test error and aggregates.
pub fn run_convergence(spec: &ExperimentSpec) -> Result<ConvergenceTable> {
    spec.validate()?;
    let oracle = spec.oracle.build()?;
    let lambda = spec.index_set()?;
    let rule = spec.test_rule()?;
    let truth = oracle.sample_rule(&rule)?;
    let norm = oracle.output_norm().clone();
    let psi = match spec.method {
        Method::Mlp => None,
        _ => {
            let design = assemble_design(&lambda, rule.nodes())?;
            Some(design.matrix() * (rule.len() as f64).sqrt())
        }
    };
    let test = TestBasis { nodes: rule.nodes(), psi };
    let jobs: Vec<(usize, usize)> = spec.m_values.iter().flat_map(|&m| (0..spec.trials).map(move |t| (m, t))).collect();
    let results: Vec<TrialOutcome> = jobs
        .par_iter()
        .map(|&(m, t)| {
            let seed = trial_seed(spec.seed_base, m, t);
            let outcome = run_trial(spec, &oracle, &lambda, &test, m, seed)
                .and_then(|pred| relative_error_against(&pred, &truth, &rule, &norm));
            match outcome {
                Ok(e) => TrialOutcome::Error(e),
                Err(e) => TrialOutcome::Failed(e.to_string()),
            }
        })
        .collect();
    let mut grouped: Vec<(usize, Vec<TrialOutcome>)> = spec.m_values.iter().map(|&m| (m, Vec::with_capacity(spec.trials))).collect();
    for (job, outcome) in results.into_iter().enumerate() {
        grouped[job / spec.trials].1.push(outcome);
    }
    Ok(build_table(spec.manifest(), spec.method, spec.window, grouped))
}

/// Empirical curve with the predicted rates shifted to agree with it at the smallest `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct TheoryOverlay {
    pub m: Vec<usize>,
    pub empirical: Vec<f64>,
    pub exponent: f64,
    pub theory: Vec<f64>,
    pub theory_log: Vec<f64>,
}

impl TheoryOverlay {
    pub fn to_csv(&self, manifest: &Manifest) -> String {
        let mut out = manifest.header();
        let _ = writeln!(out, "# exponent={:.16e}", self.exponent);
        out.push_str("m,geomean,theory,theory_log\n");
        for i in 0..self.m.len() {
            let _ = writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e}",
                self.m[i], self.empirical[i], self.theory[i], self.theory_log[i]
            );
        }
        out
    }
}

pub fn theory_overlay(table: &ConvergenceTable, b: &[f64], p: f64, hilbert: bool) -> Result<TheoryOverlay> {
    let rows: Vec<(usize, f64)> = table.rows.iter().filter_map(|r| r.stats.map(|s| (r.m, s.mean))).collect();
    let Some(&(_, anchor)) = rows.first() else {
        return Err(Error::invalid("table has no successful trials"));
    };
    let m_values: Vec<f64> = rows.iter().map(|&(m, _)| m as f64).collect();
    let curve = predicted_rates(b, p, &m_values, hilbert)?;
    let theory = curve.q2.iter().map(|v| anchor * (v / curve.q2[0])).collect();
    let theory_log = curve.q2_log.iter().map(|v| anchor * (v / curve.q2_log[0])).collect();
    Ok(TheoryOverlay {
        m: rows.iter().map(|&(m, _)| m).collect(),
        empirical: rows.iter().map(|&(_, g)| g).collect(),
        exponent: curve.exponent_q2,
        theory,
        theory_log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::legendre::NormKind;
    use crate::polyfit::predicted_rates;

    #[test]
    fn relative_error_examples() {
        let spec = OracleSpec {
            k: 33,
            ..OracleSpec::default()
        };
        let oracle = spec.build().unwrap();
        let rule = smolyak(4, 2, RuleFamily::ClenshawCurtis).unwrap();
        let norm = oracle.output_norm().clone();
        let same = relative_test_error(|x| oracle.eval(x), &oracle, &rule, &norm).unwrap();
        assert_eq!(same, 0.0);
        let zero = relative_test_error(|_| Ok(vec![0.0; 33]), &oracle, &rule, &norm).unwrap();
        assert!((zero - 1.0).abs() < 1e-14);
        let double = relative_test_error(|x| Ok(oracle.eval(x)?.iter().map(|v| 2.0 * v).collect()), &oracle, &rule, &norm).unwrap();
        assert!((double - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_reference_is_an_error() {
        let rule = smolyak(2, 1, RuleFamily::ClenshawCurtis).unwrap();
        let norm = DiscreteNorm::unit(NormKind::WeightedEuclidean, 2);
        let zeros = vec![vec![0.0; 2]; rule.len()];
        assert!(matches!(relative_error_against(&zeros, &zeros, &rule, &norm), Err(Error::ZeroDenominator)));
    }

    #[test]
    fn slope_of_power_laws() {
        let ms: Vec<f64> = DEFAULT_M_VALUES.iter().map(|&m| m as f64).collect();
        for hilbert in [true, false] {
            let curve = predicted_rates(&[1.0, 0.5], 0.6, &ms, hilbert).unwrap();
            let (s, _) = fit_loglog_slope(&ms, &curve.q2).unwrap();
            assert!((s - curve.exponent_q2).abs() < 1e-10);
        }
    }

    #[test]
    fn geometric_statistics() {
        let s = geometric_stats(&[1e-2, 1e-4]).unwrap();
        assert!((s.mean - 1e-3).abs() < 1e-15);
        assert!(!s.clamped);
        let z = geometric_stats(&[0.0, 1e-2]).unwrap();
        assert!(z.clamped);
        assert!((z.mean - 1e-9).abs() < 1e-20);
        assert!(geometric_stats(&[]).is_none());
    }

    #[test]
    fn exclusion_flag() {
        let ok = TrialOutcome::Error(0.1);
        let bad = TrialOutcome::Failed("diverged".into());
        let outcomes = vec![(10, vec![ok.clone(), ok.clone(), ok.clone(), ok.clone(), bad.clone()]), (20, vec![ok.clone(), bad.clone(), bad, ok])];
        let table = build_table(Manifest::new(""), Method::Mlp, (10, 20), outcomes);
        assert!(!table.rows[0].flagged);
        assert!(table.rows[1].flagged);
        assert!(table.flagged());
        assert_eq!(table.slope, Some(0.0));
    }

    #[test]
    fn config_round_trip() {
        let spec = ExperimentSpec {
            method: Method::Mlp,
            architecture: Architecture { depth: 4, width: 40 },
            m_values: vec![10, 50],
            trials: 2,
            test_level: Some(3),
            ..ExperimentSpec::default()
        };
        let back = ExperimentSpec::from_config(&spec.to_config()).unwrap();
        assert_eq!(back, spec);
        assert_eq!(back.manifest(), spec.manifest());
        assert!(ExperimentSpec::from_config("m_values = 20,10\n").is_err());
        assert!(ExperimentSpec::from_config("colour = red\n").is_err());
        assert_eq!("4×40".parse::<Architecture>().unwrap(), Architecture { depth: 4, width: 40 });
    }

    #[test]
    fn overlay_anchored_at_first_m() {
        let outcomes = vec![(10, vec![TrialOutcome::Error(0.2)]), (100, vec![TrialOutcome::Error(0.03)])];
        let table = build_table(Manifest::new(""), Method::PolyfitLs, (10, 100), outcomes);
        let hil = theory_overlay(&table, &[1.0], 2.0 / 3.0, true).unwrap();
        assert_eq!(hil.theory[0], hil.empirical[0]);
        assert!((hil.exponent + 1.0).abs() < 1e-12);
        let ban = theory_overlay(&table, &[1.0], 2.0 / 3.0, false).unwrap();
        assert!((ban.exponent - hil.exponent - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exact_representability_and_determinism() {
        let spec = ExperimentSpec {
            oracle: OracleSpec {
                family: "synthetic-affine".into(),
                k: 17,
                ..OracleSpec::default()
            },
            index_n: 4,
            m_values: vec![24, 30],
            trials: 2,
            test_level: Some(2),
            ..ExperimentSpec::default()
        };
        let table = run_convergence(&spec).unwrap();
        for row in &table.rows {
            assert!(row.errors().iter().all(|&e| e <= 1e-8), "{:?}", row.errors());
        }
        assert_eq!(table.to_csv(), run_convergence(&spec).unwrap().to_csv());
    }
}
