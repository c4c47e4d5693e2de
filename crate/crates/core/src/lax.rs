//! Matrix form of the replicator dynamics. The frequency matrix
//! `X_ij = sqrt(x_i x_j)` evolves by `dX/dt = [Lambda, X]` with
//! `Lambda = [Q, X]` and `Q = diag(f / 2)`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::game::{MixedStrategy, PayoffMatrix};
use crate::linalg::{self, commutator, projector_defect, symmetry_defect};
use crate::replicator::{DriftDiagnostics, IntegratorSettings, Trajectory, MAX_STEP_CORRECTION};
use crate::rk4::rk4_step;

/// Diagonal entries below this are read as exactly zero under a square root.
pub const SQRT_FLOOR: f64 = 1e-14;
/// Projector and trace drift tolerated along an integrated trajectory.
pub const DRIFT_LIMIT: f64 = 1e-6;

/// A symmetric, trace-one, idempotent matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyMatrix {
    entries: DMatrix<f64>,
}

impl FrequencyMatrix {
    /// Accepts `m` if it is symmetric, has unit trace and `X^2 = X`, each
    /// within `tol`.
    pub fn from_matrix(m: DMatrix<f64>, tol: f64) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(invalid(format!("shape {}x{}", m.nrows(), m.ncols())));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(invalid("non-finite entry".into()));
        }
        let sym = symmetry_defect(&m);
        if sym > tol {
            return Err(invalid(format!("symmetry defect {sym:e}")));
        }
        let trace = m.trace();
        if (trace - 1.0).abs() > tol {
            return Err(invalid(format!("trace {trace}")));
        }
        let proj = projector_defect(&m);
        if proj > tol {
            return Err(invalid(format!("projector defect {proj:e}")));
        }
        Ok(Self { entries: m })
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.entries.diagonal().iter().copied().collect()
    }
}

fn invalid(reason: String) -> Error {
    Error::InvalidMatrix { kind: "frequency matrix", reason }
}

/// `X_ij = sqrt(x_i x_j)`, with the diagonal set to `x` itself.
pub fn frequency_matrix(x: &MixedStrategy) -> Result<FrequencyMatrix> {
    Ok(FrequencyMatrix { entries: outer_sqrt(x.weights()) })
}

fn geometric_mean(a: f64, b: f64) -> f64 {
    if a < SQRT_FLOOR || b < SQRT_FLOOR {
        0.0
    } else {
        libm::sqrt(a * b)
    }
}

pub(crate) fn outer_sqrt(x: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    DMatrix::from_fn(n, n, |i, j| if i == j { x[i] } else { geometric_mean(x[i], x[j]) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaxPair {
    /// Diagonal, `q_ii = f_i / 2`.
    pub q: DMatrix<f64>,
    /// Antisymmetric, `Lambda = [Q, X]`.
    pub lambda: DMatrix<f64>,
}

pub fn lax_pair(a: &PayoffMatrix, x: &MixedStrategy) -> Result<LaxPair> {
    a.check_dim(x.len())?;
    let half = half_fitness(a, x.weights());
    let lambda = lambda_compact(&half, x.weights());
    debug_assert!(
        linalg::max_abs(&(&lambda - lambda_expanded(a, &outer_sqrt(x.weights()), x.weights()))) <= 1e-12,
        "compact and expanded Lambda disagree"
    );
    Ok(LaxPair { q: DMatrix::from_diagonal(&DVector::from_vec(half)), lambda })
}

pub(crate) fn half_fitness(a: &PayoffMatrix, x: &[f64]) -> Vec<f64> {
    a.apply(x).into_iter().map(|f| 0.5 * f).collect()
}

/// `Lambda_ij = sqrt(x_i x_j) (q_ii - q_jj)`.
pub(crate) fn lambda_compact(half_fitness: &[f64], x: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    DMatrix::from_fn(
        n,
        n,
        |i, j| {
            if i == j {
                0.0
            } else {
                geometric_mean(x[i], x[j]) * (half_fitness[i] - half_fitness[j])
            }
        },
    )
}

/// Term-by-term form `Lambda_ij = (f_i x_ij - x_ji f_j) / 2`, reading `x_ij`
/// from `xm` and the fitness from `x`.
pub fn lambda_expanded(a: &PayoffMatrix, xm: &DMatrix<f64>, x: &[f64]) -> DMatrix<f64> {
    let f = a.apply(x);
    let n = x.len();
    DMatrix::from_fn(n, n, |i, j| 0.5 * (f[i] * xm[(i, j)] - xm[(j, i)] * f[j]))
}

/// `(G + G^T)_ij = f_i x_ij / 2 + f_j x_ji / 2 - <f> x_ij`, the time
/// derivative of `X` written directly in terms of the replicator field.
pub fn gsym_matrix(a: &PayoffMatrix, x: &MixedStrategy) -> Result<DMatrix<f64>> {
    a.check_dim(x.len())?;
    let xm = outer_sqrt(x.weights());
    let f = a.apply(x.weights());
    let mean = a.bilinear(x.weights(), x.weights());
    let n = x.len();
    Ok(DMatrix::from_fn(n, n, |i, j| 0.5 * f[i] * xm[(i, j)] + 0.5 * f[j] * xm[(j, i)] - mean * xm[(i, j)]))
}

/// `[Lambda, X]` with `Q` taken from `diag(X)`.
pub fn lax_field(a: &PayoffMatrix, xm: &FrequencyMatrix) -> Result<DMatrix<f64>> {
    a.check_dim(xm.n())?;
    Ok(lax_rhs(a, xm.as_matrix()))
}

/// `Lambda = [Q, X] = X_ij (q_ii - q_jj)` read from the entries of `xm`
/// rather than from square roots of its diagonal. On a frequency matrix the
/// two agree; off it, only this form keeps the field polynomial in `X`, so a
/// strategy whose share underflows is not frozen at the square-root floor.
pub(crate) fn lambda_from_state<T>(a: &PayoffMatrix, xm: &DMatrix<T>, diag: impl Fn(&T) -> f64) -> DMatrix<T>
where
    T: nalgebra::ComplexField<RealField = f64>,
{
    let x: Vec<f64> = xm.diagonal().iter().map(diag).collect();
    let q = half_fitness(a, &x);
    DMatrix::from_fn(x.len(), x.len(), |i, j| xm[(i, j)].clone() * T::from_real(q[i] - q[j]))
}

pub(crate) fn lax_rhs(a: &PayoffMatrix, xm: &DMatrix<f64>) -> DMatrix<f64> {
    commutator(&lambda_from_state(a, xm, |v| *v), xm)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LaxDiagnostics {
    /// Largest `|Tr X - 1|` before trace renormalization.
    pub max_trace_defect: f64,
    /// Largest asymmetry before re-symmetrization.
    pub max_symmetry_defect: f64,
    /// Largest `max |X^2 - X|` over recorded steps.
    pub max_projector_defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<DMatrix<f64>>,
    /// `diag X(t)` as a vector trajectory.
    pub diagonal: Trajectory,
    pub diagnostics: LaxDiagnostics,
}

pub fn integrate_lax(a: &PayoffMatrix, x0: &MixedStrategy, t_end: f64, dt: f64) -> Result<MatrixTrajectory> {
    integrate_lax_with(a, x0, &IntegratorSettings::new(t_end, dt)?)
}

/// RK4 on `dX/dt = [Lambda, X]`, re-symmetrizing and renormalizing the trace
/// after each step. The projector defect is monitored but never corrected.
pub fn integrate_lax_with(
    a: &PayoffMatrix,
    x0: &MixedStrategy,
    settings: &IntegratorSettings,
) -> Result<MatrixTrajectory> {
    a.check_dim(x0.len())?;
    let settings = settings.validated()?;
    let grid = settings.grid();
    let mut diagnostics = LaxDiagnostics::default();
    let mut xm = frequency_matrix(x0)?.into_matrix();
    let mut times = vec![0.0];
    let mut states = vec![xm.clone()];
    let mut diag_states = vec![x0.clone()];

    for k in 0..grid.steps {
        let t = grid.time(k + 1);
        let next = rk4_step::<_, Error>(&xm, grid.step_size(k), |y| Ok(lax_rhs(a, y)))?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t });
        }
        diagnostics.max_symmetry_defect = diagnostics.max_symmetry_defect.max(symmetry_defect(&next));
        let mut sym = (&next + next.transpose()) * 0.5;
        let trace = sym.trace();
        let trace_defect = (trace - 1.0).abs();
        diagnostics.max_trace_defect = diagnostics.max_trace_defect.max(trace_defect);
        if trace_defect > DRIFT_LIMIT {
            return Err(Error::InvariantDrift { name: "trace of X", value: trace_defect, limit: DRIFT_LIMIT, t });
        }
        sym /= trace;
        xm = sym;

        if settings.records(k + 1, &grid) {
            let proj = projector_defect(&xm);
            diagnostics.max_projector_defect = diagnostics.max_projector_defect.max(proj);
            if proj > DRIFT_LIMIT {
                return Err(Error::InvariantDrift { name: "projector defect", value: proj, limit: DRIFT_LIMIT, t });
            }
            times.push(t);
            states.push(xm.clone());
            let diag: Vec<f64> = xm.diagonal().iter().copied().collect();
            diag_states.push(diagonal_strategy(&diag, t)?);
        }
    }

    let diagonal =
        Trajectory { times: times.clone(), states: diag_states, settings, diagnostics: DriftDiagnostics::default() };
    Ok(MatrixTrajectory { times, states, diagonal, diagnostics })
}

pub(crate) fn diagonal_strategy(diag: &[f64], t: f64) -> Result<MixedStrategy> {
    MixedStrategy::from_clamped(diag, MAX_STEP_CORRECTION).map_err(|e| match e {
        Error::WeightOutOfRange { value, .. } => {
            Error::InvariantDrift { name: "diagonal positivity", value: -value, limit: MAX_STEP_CORRECTION, t }
        }
        Error::SimplexSum { sum } => {
            Error::InvariantDrift { name: "diagonal sum", value: (sum - 1.0).abs(), limit: MAX_STEP_CORRECTION, t }
        }
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::replicator::replicator_field;
    use alloc::vec;

    fn pd() -> PayoffMatrix {
        PayoffMatrix::from_rows(&[vec![3.0, 0.0], vec![5.0, 1.0]]).unwrap()
    }
    fn rps() -> PayoffMatrix {
        PayoffMatrix::from_rows(&[vec![0.0, -1.0, 1.0], vec![1.0, 0.0, -1.0], vec![-1.0, 1.0, 0.0]]).unwrap()
    }
    fn ms(w: &[f64]) -> MixedStrategy {
        MixedStrategy::new(w.to_vec()).unwrap()
    }
    fn mat(n: usize, rows: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(n, n, rows)
    }

    #[test]
    fn frequency_matrix_examples() {
        assert_eq!(frequency_matrix(&ms(&[1.0, 0.0])).unwrap().as_matrix(), &mat(2, &[1.0, 0.0, 0.0, 0.0]));
        assert_eq!(frequency_matrix(&ms(&[0.5, 0.5])).unwrap().as_matrix(), &mat(2, &[0.5; 4]));
        let third = 1.0 / 3.0;
        let x = frequency_matrix(&ms(&[third; 3])).unwrap();
        assert!(x.as_matrix().iter().all(|v| (v - third).abs() < 1e-16));
    }

    #[test]
    fn frequency_matrix_validation() {
        assert!(FrequencyMatrix::from_matrix(mat(2, &[0.5; 4]), 1e-10).is_ok());
        assert!(FrequencyMatrix::from_matrix(mat(2, &[0.5, 0.0, 0.0, 0.5]), 1e-10).is_err());
        assert!(FrequencyMatrix::from_matrix(mat(2, &[0.5, 0.6, 0.4, 0.5]), 1e-10).is_err());
    }

    #[test]
    fn lax_pair_examples() {
        let a = PayoffMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let lp = lax_pair(&a, &ms(&[0.5, 0.5])).unwrap();
        assert_eq!(lp.q, mat(2, &[0.25, 0.0, 0.0, 0.25]));
        assert_eq!(lp.lambda, DMatrix::zeros(2, 2));

        let third = 1.0 / 3.0;
        let lp = lax_pair(&rps(), &ms(&[third; 3])).unwrap();
        assert!(linalg::max_abs(&lp.lambda) < 1e-16);

        let lp = lax_pair(&pd(), &ms(&[0.5, 0.5])).unwrap();
        assert_eq!(lp.q, mat(2, &[0.75, 0.0, 0.0, 1.5]));
        assert_eq!(lp.lambda, mat(2, &[0.0, -0.375, 0.375, 0.0]));
        let xm = frequency_matrix(&ms(&[0.5, 0.5])).unwrap();
        assert_eq!(lp.lambda, commutator(&lp.q, xm.as_matrix()));
    }

    #[test]
    fn gsym_examples() {
        let hd = PayoffMatrix::from_rows(&[vec![-1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(gsym_matrix(&hd, &ms(&[0.5, 0.5])).unwrap(), DMatrix::zeros(2, 2));
        assert_eq!(gsym_matrix(&rps(), &ms(&[0.0, 0.0, 1.0])).unwrap(), DMatrix::zeros(3, 3));
        assert_eq!(gsym_matrix(&pd(), &ms(&[0.5, 0.5])).unwrap(), mat(2, &[-0.375, 0.0, 0.0, 0.375]));
    }

    #[test]
    fn lax_field_examples() {
        let x = ms(&[0.5, 0.5]);
        let field = lax_field(&pd(), &frequency_matrix(&x).unwrap()).unwrap();
        assert_eq!(field, mat(2, &[-0.375, 0.0, 0.0, 0.375]));
        let v = replicator_field(&pd(), &x).unwrap();
        assert_eq!((field[(0, 0)], field[(1, 1)]), (v[0], v[1]));

        let vertex = frequency_matrix(&ms(&[0.0, 1.0])).unwrap();
        assert_eq!(lax_field(&pd(), &vertex).unwrap(), DMatrix::zeros(2, 2));
    }

    #[test]
    fn lax_from_vertex_is_constant() {
        let x = ms(&[1.0, 0.0, 0.0]);
        let traj = integrate_lax(&rps(), &x, 1.0, 1e-2).unwrap();
        let x0 = frequency_matrix(&x).unwrap().into_matrix();
        assert!(traj.states.iter().all(|s| s == &x0));
    }

    #[test]
    fn rps_lax_flow_is_isospectral() {
        let traj = integrate_lax(&rps(), &ms(&[0.5, 0.3, 0.2]), 20.0, 1e-3).unwrap();
        for s in &traj.states {
            let ev = linalg::symmetric_eigenvalues(s);
            assert!((ev[0] - 1.0).abs() < 1e-6 && ev[1].abs() < 1e-6 && ev[2].abs() < 1e-6, "{ev:?}");
        }
    }
}
