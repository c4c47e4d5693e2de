//! Vector-form replicator dynamics `dx_i/dt = (f_i(x) - <f(x)>) x_i`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::game::{self, MixedStrategy, PayoffMatrix, SUPPORT_TOL};
use crate::rk4::{rk4_step, TimeGrid};
use crate::{linalg, Complex64};

/// Field norm below which a state counts as a rest point.
pub const REST_POINT_TOL: f64 = 1e-7;
/// Real parts within this of zero are treated as zero when classifying.
pub const CLASSIFICATION_TOL: f64 = 1e-6;
pub const DEFAULT_JACOBIAN_STEP: f64 = 1e-6;
pub const DEFAULT_DT: f64 = 1e-3;
/// Largest clamp-and-renormalize correction tolerated in a single step.
pub const MAX_STEP_CORRECTION: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct FitnessStats {
    pub fitness: Vec<f64>,
    pub mean: f64,
}

/// `f_i = sum_j a_ij x_j` and `<f> = sum_kl a_kl x_k x_l`.
pub fn fitness_stats(a: &PayoffMatrix, x: &MixedStrategy) -> Result<FitnessStats> {
    a.check_dim(x.len())?;
    let fitness = a.apply(x.weights());
    let mean = a.bilinear(x.weights(), x.weights());
    Ok(FitnessStats { fitness, mean })
}

pub fn replicator_field(a: &PayoffMatrix, x: &MixedStrategy) -> Result<Vec<f64>> {
    a.check_dim(x.len())?;
    Ok(field_raw(a, x.weights()))
}

/// The replicator field at an arbitrary point of R^n.
pub(crate) fn field_raw(a: &PayoffMatrix, x: &[f64]) -> Vec<f64> {
    let fitness = a.apply(x);
    let mean = a.bilinear(x, x);
    x.iter().zip(&fitness).map(|(xi, fi)| (fi - mean) * xi).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorSettings {
    pub t_end: f64,
    pub dt: f64,
    /// Record every `stride`-th step; the initial and final states are always kept.
    pub stride: usize,
}

impl IntegratorSettings {
    pub fn new(t_end: f64, dt: f64) -> Result<Self> {
        Self { t_end, dt, stride: 1 }.validated()
    }

    pub fn with_stride(self, stride: usize) -> Result<Self> {
        Self { stride, ..self }.validated()
    }

    pub(crate) fn validated(self) -> Result<Self> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::param("t_end", format!("must be positive and finite, got {}", self.t_end)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param("dt", format!("must be positive and finite, got {}", self.dt)));
        }
        if self.stride == 0 {
            return Err(Error::param("stride", "must be at least 1"));
        }
        Ok(self)
    }

    pub(crate) fn grid(&self) -> TimeGrid {
        TimeGrid::new(self.t_end, self.dt)
    }

    pub(crate) fn records(&self, k: usize, grid: &TimeGrid) -> bool {
        k.is_multiple_of(self.stride) || k == grid.steps
    }
}

/// Drift-correction bookkeeping for a vector trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DriftDiagnostics {
    /// Largest L-infinity change made by clamp-and-renormalize in one step.
    pub max_correction: f64,
    /// Smallest component seen before clamping.
    pub min_component: f64,
    /// Largest `|sum_i x_i - 1|` seen before renormalizing.
    pub max_sum_defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<MixedStrategy>,
    pub settings: IntegratorSettings,
    pub diagnostics: DriftDiagnostics,
}

impl Trajectory {
    pub fn last(&self) -> &MixedStrategy {
        self.states.last().expect("trajectory always holds the initial state")
    }

    /// Largest componentwise difference over matching records.
    pub fn linf_distance(&self, other: &Trajectory) -> Result<f64> {
        if self.times.len() != other.times.len() {
            return Err(Error::DimensionMismatch { expected: self.times.len(), found: other.times.len() });
        }
        Ok(self.states.iter().zip(&other.states).fold(0.0, |acc, (a, b)| acc.max(a.linf_distance(b))))
    }
}

/// Fixed-step RK4 with clamp-and-renormalize after each step.
pub fn integrate(a: &PayoffMatrix, x0: &MixedStrategy, t_end: f64, dt: f64) -> Result<Trajectory> {
    integrate_with(a, x0, &IntegratorSettings::new(t_end, dt)?)
}

pub fn integrate_with(a: &PayoffMatrix, x0: &MixedStrategy, settings: &IntegratorSettings) -> Result<Trajectory> {
    a.check_dim(x0.len())?;
    let settings = settings.validated()?;
    let grid = settings.grid();
    let mut diagnostics = DriftDiagnostics { min_component: f64::INFINITY, ..Default::default() };
    let mut times = vec![0.0];
    let mut states = vec![x0.clone()];
    let mut x = x0.weights().to_vec();

    for k in 0..grid.steps {
        let t = grid.time(k + 1);
        let next = rk4_step::<_, Error>(&x, grid.step_size(k), |y| Ok(field_raw(a, y)))?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t });
        }
        let min = next.iter().copied().fold(f64::INFINITY, f64::min);
        let sum: f64 = next.iter().sum();
        diagnostics.min_component = diagnostics.min_component.min(min);
        diagnostics.max_sum_defect = diagnostics.max_sum_defect.max((sum - 1.0).abs());

        let clamped_sum: f64 = next.iter().map(|v| v.max(0.0)).sum();
        let corrected: Vec<f64> = next.iter().map(|v| v.max(0.0) / clamped_sum).collect();
        let correction = corrected.iter().zip(&next).fold(0.0_f64, |acc, (c, v)| acc.max((c - v).abs()));
        diagnostics.max_correction = diagnostics.max_correction.max(correction);
        if correction > MAX_STEP_CORRECTION {
            return Err(Error::InvariantDrift {
                name: "simplex correction",
                value: correction,
                limit: MAX_STEP_CORRECTION,
                t,
            });
        }
        x = corrected;
        if settings.records(k + 1, &grid) {
            times.push(t);
            states.push(MixedStrategy::from_clamped(&x, MAX_STEP_CORRECTION)?);
        }
    }
    if diagnostics.min_component == f64::INFINITY {
        diagnostics.min_component = x0.weights().iter().copied().fold(f64::INFINITY, f64::min);
    }
    Ok(Trajectory { times, states, settings, diagnostics })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityKind {
    Stable,
    Unstable,
    /// Non-hyperbolic: linearization alone does not decide.
    Neutral,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityVerdict {
    pub kind: StabilityKind,
    /// Spectrum of the Jacobian restricted to the simplex tangent space.
    pub eigenvalues: Vec<Complex64>,
    pub rest_point: MixedStrategy,
}

/// Full `n x n` Jacobian of the field by central differences.
pub fn jacobian(a: &PayoffMatrix, x: &[f64], h: f64) -> DMatrix<f64> {
    let n = x.len();
    let mut jac = DMatrix::zeros(n, n);
    let mut probe = x.to_vec();
    for j in 0..n {
        probe[j] = x[j] + h;
        let plus = field_raw(a, &probe);
        probe[j] = x[j] - h;
        let minus = field_raw(a, &probe);
        probe[j] = x[j];
        for i in 0..n {
            jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    jac
}

/// Linear stability of a rest point on the simplex.
pub fn classify_rest_point(a: &PayoffMatrix, xstar: &MixedStrategy, h: f64) -> Result<StabilityVerdict> {
    a.check_dim(xstar.len())?;
    if !(h > 0.0) {
        return Err(Error::param("h", format!("must be positive, got {h}")));
    }
    let norm = field_raw(a, xstar.weights()).iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if norm > REST_POINT_TOL {
        return Err(Error::NotRestPoint { norm, limit: REST_POINT_TOL });
    }
    let n = a.n();
    let eigenvalues: Vec<Complex64> = if n == 1 {
        Vec::new()
    } else {
        let basis = linalg::simplex_tangent_basis(n);
        let reduced = basis.transpose() * jacobian(a, xstar.weights(), h) * &basis;
        reduced.complex_eigenvalues().iter().copied().collect()
    };
    let kind = if eigenvalues.iter().any(|l| l.re > CLASSIFICATION_TOL) {
        StabilityKind::Unstable
    } else if eigenvalues.iter().all(|l| l.re < -CLASSIFICATION_TOL) {
        StabilityKind::Stable
    } else {
        StabilityKind::Neutral
    };
    Ok(StabilityVerdict { kind, eigenvalues, rest_point: xstar.clone() })
}

/// Refines `seed` to a nearby rest point on the face spanned by its support,
/// by Newton iteration on the equal-fitness conditions.
pub fn newton_rest_point(a: &PayoffMatrix, seed: &MixedStrategy) -> Result<Option<MixedStrategy>> {
    a.check_dim(seed.len())?;
    let support = seed.support(SUPPORT_TOL);
    let k = support.len();
    let n = a.n();
    let embed = |xs: &[f64]| {
        let mut full = vec![0.0; n];
        for (r, &i) in support.iter().enumerate() {
            full[i] = xs[r];
        }
        full
    };
    // k - 1 fitness gaps f_i - f_last plus the unit-sum constraint.
    let residual = |xs: &[f64]| -> DVector<f64> {
        let f = a.apply(&embed(xs));
        let last = f[support[k - 1]];
        let mut out = DVector::zeros(k);
        for (r, &i) in support.iter().take(k - 1).enumerate() {
            out[r] = f[i] - last;
        }
        out[k - 1] = xs.iter().sum::<f64>() - 1.0;
        out
    };
    let mut xs: Vec<f64> = support.iter().map(|&i| seed.weights()[i]).collect();
    for _ in 0..50 {
        let r = residual(&xs);
        if r.amax() < 1e-14 {
            break;
        }
        let h = 1e-7;
        let mut jac = DMatrix::zeros(k, k);
        for c in 0..k {
            let mut p = xs.clone();
            p[c] += h;
            let mut m = xs.clone();
            m[c] -= h;
            let col = (residual(&p) - residual(&m)) / (2.0 * h);
            jac.set_column(c, &col);
        }
        let Some(delta) = linalg::solve(&jac, &r) else {
            return Ok(None);
        };
        for (x, d) in xs.iter_mut().zip(delta.iter()) {
            *x -= d;
        }
    }
    let full = embed(&xs);
    let Ok(x) = MixedStrategy::from_clamped(&full, SUPPORT_TOL) else {
        return Ok(None);
    };
    let norm = field_raw(a, x.weights()).iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    Ok((norm <= REST_POINT_TOL).then_some(x))
}

/// Isolated rest points: the interior rest point of every face whose
/// indifference system is nonsingular, plus Newton refinements of `seeds`
/// (typically trajectory endpoints or enumerated equilibria). Duplicates are
/// merged.
pub fn find_rest_points(a: &PayoffMatrix, seeds: &[MixedStrategy]) -> Result<Vec<MixedStrategy>> {
    let n = a.n();
    let mut found: Vec<MixedStrategy> = Vec::new();
    let push = |x: MixedStrategy, found: &mut Vec<MixedStrategy>| {
        if !found.iter().any(|y| y.linf_distance(&x) < game::DEDUP_TOL) {
            found.push(x);
        }
    };
    if n <= game::MAX_ENUMERATION_SIZE {
        for mask in 1u32..(1 << n) {
            let support: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let Some((weights, _)) = game::solve_support(a, &support) else {
                continue;
            };
            if weights.iter().any(|&w| w < -SUPPORT_TOL) {
                continue;
            }
            if let Ok(x) = MixedStrategy::from_clamped(&weights, SUPPORT_TOL) {
                push(x, &mut found);
            }
        }
    }
    for seed in seeds {
        a.check_dim(seed.len())?;
        if let Some(x) = newton_rest_point(a, seed)? {
            push(x, &mut found);
        }
    }
    Ok(found)
}
