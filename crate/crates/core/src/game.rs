//! Symmetric two-player games: payoffs, Nash and ESS tests, and exhaustive
//! support enumeration of symmetric Nash equilibria.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg;

/// Tolerance on simplex membership of a [`MixedStrategy`].
pub const SIMPLEX_TOL: f64 = 1e-12;
/// Default tolerance for equilibrium arithmetic.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Weights at or below this are treated as zero when reading off a support.
pub const SUPPORT_TOL: f64 = 1e-8;
/// Equilibria closer than this (L-infinity) are reported once.
pub const DEDUP_TOL: f64 = 1e-7;
/// Number of random mixed mutants tried by [`is_ess`].
pub const DEFAULT_MUTANT_SAMPLES: usize = 1000;
pub const DEFAULT_SEED: u64 = 0;
/// Largest game accepted by [`enumerate_symmetric_nash`].
pub const MAX_ENUMERATION_SIZE: usize = 6;

/// Row player's payoffs `a_ij` for strategy `i` against strategy `j`. The
/// column player receives the transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    entries: DMatrix<f64>,
    labels: Option<Vec<String>>,
}

impl PayoffMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyGame);
        }
        let mut entries = DMatrix::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::RaggedRow { row: i, len: row.len(), expected: n });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinitePayoff { row: i, col: j });
                }
                entries[(i, j)] = v;
            }
        }
        Ok(Self { entries, labels: None })
    }

    pub fn from_row_major(n: usize, data: &[f64]) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGame);
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: data.len() });
        }
        let rows: Vec<Vec<f64>> = data.chunks(n).map(<[f64]>::to_vec).collect();
        Self::from_rows(&rows)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: labels.len() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub(crate) fn check_dim(&self, len: usize) -> Result<()> {
        if len == self.n() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.n(), found: len })
        }
    }

    /// `(A x)_i` for an arbitrary vector; no simplex check.
    pub(crate) fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n).map(|i| (0..n).map(|j| self.entries[(i, j)] * x[j]).sum()).collect()
    }

    /// `p^T A q` for arbitrary vectors.
    pub(crate) fn bilinear(&self, p: &[f64], q: &[f64]) -> f64 {
        let aq = self.apply(q);
        p.iter().zip(&aq).map(|(a, b)| a * b).sum()
    }
}

/// A probability vector over the strategies of a game.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedStrategy {
    weights: Vec<f64>,
}

impl MixedStrategy {
    /// Validates that every weight lies in `[0, 1]` and the weights sum to 1,
    /// both within [`SIMPLEX_TOL`].
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyGame);
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(-SIMPLEX_TOL..=1.0 + SIMPLEX_TOL).contains(&value) {
                return Err(Error::WeightOutOfRange { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::SimplexSum { sum });
        }
        Ok(Self { weights })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGame);
        }
        Ok(Self { weights: vec![1.0 / n as f64; n] })
    }

    /// The vertex `e_index`.
    pub fn pure(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(Error::DimensionMismatch { expected: n, found: index + 1 });
        }
        let mut weights = vec![0.0; n];
        weights[index] = 1.0;
        Ok(Self { weights })
    }

    /// Clamps negatives no larger than `slack` in magnitude to zero and
    /// rescales to unit sum. Anything further from the simplex is rejected.
    pub fn from_clamped(raw: &[f64], slack: f64) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyGame);
        }
        let mut weights = Vec::with_capacity(raw.len());
        for (index, &value) in raw.iter().enumerate() {
            if !value.is_finite() || value < -slack {
                return Err(Error::WeightOutOfRange { index, value });
            }
            weights.push(value.max(0.0));
        }
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) || (sum - 1.0).abs() > slack.max(SIMPLEX_TOL) {
            return Err(Error::SimplexSum { sum });
        }
        for w in &mut weights {
            *w /= sum;
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Indices with weight above `tol`.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.weights[i] > tol).collect()
    }

    pub fn linf_distance(&self, other: &Self) -> f64 {
        self.weights.iter().zip(&other.weights).fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

/// `E(p, q) = sum_ij p_i a_ij q_j`.
pub fn expected_payoff(a: &PayoffMatrix, p: &MixedStrategy, q: &MixedStrategy) -> Result<f64> {
    a.check_dim(p.len())?;
    a.check_dim(q.len())?;
    Ok(a.bilinear(p.weights(), q.weights()))
}

/// Largest gain from a pure deviation, `max(0, max_i E(e_i, p) - E(p, p))`.
pub fn nash_residual(a: &PayoffMatrix, p: &MixedStrategy) -> Result<f64> {
    a.check_dim(p.len())?;
    let fitness = a.apply(p.weights());
    let own: f64 = p.weights().iter().zip(&fitness).map(|(x, f)| x * f).sum();
    Ok(fitness.iter().fold(0.0_f64, |acc, f| acc.max(f - own)))
}

/// `E(p, p) >= E(e_i, p) - tol` for every pure strategy. Bilinearity makes
/// pure deviations sufficient.
pub fn is_nash(a: &PayoffMatrix, p: &MixedStrategy, tol: f64) -> Result<bool> {
    Ok(nash_residual(a, p)? <= tol)
}

/// ESS test against every pure mutant and `mutant_samples` uniformly drawn
/// mixed mutants, using [`DEFAULT_SEED`].
pub fn is_ess(a: &PayoffMatrix, p: &MixedStrategy, tol: f64, mutant_samples: usize) -> Result<bool> {
    is_ess_seeded(a, p, tol, mutant_samples, DEFAULT_SEED)
}

/// Sampling only approximates the "for all mutants" quantifier; a `true`
/// answer means no sampled mutant could invade.
pub fn is_ess_seeded(a: &PayoffMatrix, p: &MixedStrategy, tol: f64, mutant_samples: usize, seed: u64) -> Result<bool> {
    a.check_dim(p.len())?;
    let n = a.n();
    let pw = p.weights();
    let epp = a.bilinear(pw, pw);

    let resists = |r: &[f64]| -> bool {
        let erp = a.bilinear(r, pw);
        if epp > erp + tol {
            return true;
        }
        if (epp - erp).abs() <= tol {
            return a.bilinear(pw, r) > a.bilinear(r, r) + tol;
        }
        false
    };

    let mut r = vec![0.0; n];
    for i in 0..n {
        r.iter_mut().for_each(|v| *v = 0.0);
        r[i] = 1.0;
        if distance(&r, pw) <= SIMPLEX_TOL {
            continue;
        }
        if !resists(&r) {
            return Ok(false);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..mutant_samples {
        sample_simplex(&mut rng, &mut r);
        if distance(&r, pw) <= SIMPLEX_TOL {
            continue;
        }
        if !resists(&r) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}

/// Uniform draw from the simplex via normalized exponentials.
pub(crate) fn sample_simplex<R: Rng>(rng: &mut R, out: &mut [f64]) {
    let mut total = 0.0;
    for v in out.iter_mut() {
        let u: f64 = rng.random();
        *v = -libm::log(1.0 - u);
        total += *v;
    }
    for v in out.iter_mut() {
        *v /= total;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub strategy: MixedStrategy,
    pub is_strict: bool,
    pub is_ess: bool,
    pub support: Vec<usize>,
    /// Largest Nash-condition violation, see [`nash_residual`].
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnumerationOptions {
    pub tol: f64,
    pub support_tol: f64,
    pub mutant_samples: usize,
    pub seed: u64,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, support_tol: SUPPORT_TOL, mutant_samples: DEFAULT_MUTANT_SAMPLES, seed: DEFAULT_SEED }
    }
}

/// Symmetric Nash equilibria by support enumeration with default options and
/// the given tolerance.
pub fn enumerate_symmetric_nash(a: &PayoffMatrix, tol: f64) -> Result<Vec<EquilibriumReport>> {
    enumerate_symmetric_nash_with(a, &EnumerationOptions { tol, ..EnumerationOptions::default() })
}

pub fn enumerate_symmetric_nash_with(a: &PayoffMatrix, opts: &EnumerationOptions) -> Result<Vec<EquilibriumReport>> {
    let n = a.n();
    if n > MAX_ENUMERATION_SIZE {
        return Err(Error::TooManyStrategies { n, max: MAX_ENUMERATION_SIZE });
    }
    if !(opts.tol > 0.0) {
        return Err(Error::param("tol", format!("must be positive, got {}", opts.tol)));
    }

    let mut found: Vec<EquilibriumReport> = Vec::new();
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let Some((weights, value)) = solve_support(a, &support) else {
            continue;
        };
        if weights.iter().any(|&w| w < -opts.support_tol) {
            continue;
        }
        let Ok(strategy) = MixedStrategy::from_clamped(&weights, opts.support_tol) else {
            continue;
        };
        let fitness = a.apply(strategy.weights());
        let outside_ok = (0..n).filter(|i| mask & (1 << i) == 0).all(|i| fitness[i] <= value + opts.tol);
        if !outside_ok || !is_nash(a, &strategy, opts.tol)? {
            continue;
        }
        if found.iter().any(|r| r.strategy.linf_distance(&strategy) < DEDUP_TOL) {
            continue;
        }
        found.push(report(a, strategy, opts)?);
    }
    Ok(found)
}

fn report(a: &PayoffMatrix, strategy: MixedStrategy, opts: &EnumerationOptions) -> Result<EquilibriumReport> {
    let support = strategy.support(opts.support_tol);
    let residual = nash_residual(a, &strategy)?;
    let is_strict = support.len() == 1 && {
        let i = support[0];
        let fitness = a.apply(strategy.weights());
        (0..a.n()).filter(|&j| j != i).all(|j| fitness[j] < fitness[i] - opts.tol)
    };
    let is_ess = is_ess_seeded(a, &strategy, opts.tol, opts.mutant_samples, opts.seed)?;
    Ok(EquilibriumReport { strategy, is_strict, is_ess, support, residual })
}

/// Solves the indifference system on `support`: `(A x)_i = v` for `i` in the
/// support, weights summing to one, zero weight elsewhere. Returns the full
/// weight vector and the common payoff `v`, or `None` when singular.
pub(crate) fn solve_support(a: &PayoffMatrix, support: &[usize]) -> Option<(Vec<f64>, f64)> {
    let k = support.len();
    let mut m = DMatrix::zeros(k + 1, k + 1);
    let mut rhs = DVector::zeros(k + 1);
    for (r, &i) in support.iter().enumerate() {
        for (c, &j) in support.iter().enumerate() {
            m[(r, c)] = a.entry(i, j);
        }
        m[(r, k)] = -1.0;
        m[(k, r)] = 1.0;
    }
    rhs[k] = 1.0;
    let sol = linalg::solve(&m, &rhs)?;
    let mut weights = vec![0.0; a.n()];
    for (r, &i) in support.iter().enumerate() {
        weights[i] = sol[r];
    }
    Some((weights, sol[k]))
}
