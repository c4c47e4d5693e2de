//! Density-operator form: the population state is mapped to the rank-one
//! operator `rho_ij = sqrt(x_i x_j)` and evolved by the von Neumann equation
//! `i hbar drho/dt = [H, rho]`.
//!
//! With `H = i hbar Lambda` the von Neumann right-hand side reduces to
//! `[Lambda, rho]`, so the operator flow reproduces the Lax flow of the
//! frequency matrix. `Lambda = [Q, rho]` depends on the population through
//! the fitness in `Q`, so by default the Hamiltonian is rebuilt from the
//! current state at every RK4 stage (a self-consistent field).
//! [`HamiltonianMode::Frozen`] evolves under a fixed `H` instead.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::game::{MixedStrategy, PayoffMatrix};
use crate::lax::{self, DRIFT_LIMIT};
use crate::linalg::{self, hermiticity_defect};
use crate::replicator::{DriftDiagnostics, IntegratorSettings, Trajectory};
use crate::rk4::rk4_step;
use crate::Complex64;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
pub const ANTISYMMETRY_TOL: f64 = 1e-10;

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    entries: DMatrix<Complex64>,
    hbar: f64,
}

impl DensityOperator {
    pub fn new(entries: DMatrix<Complex64>, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(invalid(format!("shape {}x{}", entries.nrows(), entries.ncols())));
        }
        if entries.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(invalid("non-finite entry".into()));
        }
        let herm = hermiticity_defect(&entries);
        if herm > HERMITIAN_TOL {
            return Err(invalid(format!("hermiticity defect {herm:e}")));
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(invalid(format!("trace {trace}")));
        }
        let min = linalg::hermitian_eigenvalues(&entries).last().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::NegativeEigenvalue { value: min });
        }
        let rho = Self { entries, hbar };
        let p = purity(&rho);
        if p > 1.0 + TRACE_TOL {
            return Err(invalid(format!("purity {p}")));
        }
        Ok(rho)
    }

    /// Diagonal (classical) state `diag(p)`.
    pub fn from_probabilities(p: &MixedStrategy) -> Result<Self> {
        let d = nalgebra::DVector::from_iterator(p.len(), p.weights().iter().map(|&v| Complex64::new(v, 0.0)));
        Self::new(DMatrix::from_diagonal(&d), 1.0)
    }

    pub fn with_hbar(self, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        Ok(Self { hbar, ..self })
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    /// Real parts of the diagonal.
    pub fn populations(&self) -> Vec<f64> {
        self.entries.diagonal().iter().map(|v| v.re).collect()
    }
}

fn invalid(reason: String) -> Error {
    Error::InvalidMatrix { kind: "density operator", reason }
}

fn check_hbar(hbar: f64) -> Result<()> {
    if hbar > 0.0 && hbar.is_finite() {
        Ok(())
    } else {
        Err(Error::param("hbar", format!("must be positive and finite, got {hbar}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    entries: DMatrix<Complex64>,
}

impl Hamiltonian {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::InvalidMatrix { kind: "Hamiltonian", reason: "not square".into() });
        }
        let defect = hermiticity_defect(&entries);
        if defect > HERMITIAN_TOL {
            return Err(Error::InvalidMatrix { kind: "Hamiltonian", reason: format!("hermiticity defect {defect:e}") });
        }
        Ok(Self { entries })
    }

    /// Real diagonal Hamiltonian.
    pub fn diagonal(energies: &[f64]) -> Self {
        let d = nalgebra::DVector::from_iterator(energies.len(), energies.iter().map(|&e| Complex64::new(e, 0.0)));
        Self { entries: DMatrix::from_diagonal(&d) }
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }
}

/// Rank-one operator `rho_ij = sqrt(x_i x_j)` with `diag(rho) = x`, `hbar = 1`.
pub fn quantize(x: &MixedStrategy) -> Result<DensityOperator> {
    let real = lax::frequency_matrix(x)?.into_matrix();
    Ok(DensityOperator { entries: real.map(|v| Complex64::new(v, 0.0)), hbar: 1.0 })
}

/// `H = i hbar Lambda` for a real antisymmetric `Lambda`.
pub fn hamiltonian_from_lambda(lambda: &DMatrix<f64>, hbar: f64) -> Result<Hamiltonian> {
    check_hbar(hbar)?;
    if !lambda.is_square() {
        return Err(Error::InvalidMatrix { kind: "Lambda", reason: "not square".into() });
    }
    let defect = linalg::max_abs(&(lambda + lambda.transpose()));
    if defect > ANTISYMMETRY_TOL {
        return Err(Error::InvalidMatrix { kind: "Lambda", reason: format!("antisymmetry defect {defect:e}") });
    }
    let entries = lambda.map(|v| Complex64::new(0.0, hbar * v));
    // Symmetrize away the rounding-level defect so the result is exactly Hermitian.
    let entries = (&entries + entries.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(Hamiltonian { entries })
}

/// `drho/dt = -(i / hbar) [H, rho]`.
pub fn von_neumann_rhs(h: &DMatrix<Complex64>, rho: &DMatrix<Complex64>, hbar: f64) -> DMatrix<Complex64> {
    linalg::commutator(h, rho) * Complex64::new(0.0, -1.0 / hbar)
}

/// `Tr rho^2`.
pub fn purity(rho: &DensityOperator) -> f64 {
    purity_of(rho.entries())
}

pub(crate) fn purity_of(m: &DMatrix<Complex64>) -> f64 {
    // Tr(rho rho) = sum_ij rho_ij rho_ji
    let n = m.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += m[(i, j)] * m[(j, i)];
        }
    }
    acc.re
}

#[derive(Debug, Clone, PartialEq)]
pub enum HamiltonianMode {
    /// `H(t) = i hbar [Q(diag rho(t)), rho(t)]`, rebuilt at every stage.
    SelfConsistent,
    /// A fixed Hamiltonian; the payoff matrix is ignored.
    Frozen(Hamiltonian),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OperatorDiagnostics {
    /// Largest hermiticity defect before Hermitization.
    pub max_hermiticity_defect: f64,
    /// Largest `|Tr rho - 1|` before renormalization.
    pub max_trace_defect: f64,
    /// Largest `|Tr rho^2 - Tr rho_0^2|` over recorded steps.
    pub max_purity_drift: f64,
    /// Largest `|Im rho_ii|` over recorded steps.
    pub max_imag_diagonal: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<DMatrix<Complex64>>,
    pub hbar: f64,
    /// Real parts of `diag rho(t)` as a vector trajectory.
    pub diagonal: Trajectory,
    pub diagnostics: OperatorDiagnostics,
}

/// Evolves `quantize(x0)` under the self-consistent Hamiltonian.
pub fn integrate_von_neumann(
    a: &PayoffMatrix,
    x0: &MixedStrategy,
    t_end: f64,
    dt: f64,
    hbar: f64,
) -> Result<OperatorTrajectory> {
    let rho0 = quantize(x0)?.with_hbar(hbar)?;
    integrate_von_neumann_with(a, &rho0, &IntegratorSettings::new(t_end, dt)?, &HamiltonianMode::SelfConsistent)
}

/// RK4 in complex arithmetic with Hermitization and trace renormalization
/// after every step. Any invariant drifting past `1e-6` aborts the run.
pub fn integrate_von_neumann_with(
    a: &PayoffMatrix,
    rho0: &DensityOperator,
    settings: &IntegratorSettings,
    mode: &HamiltonianMode,
) -> Result<OperatorTrajectory> {
    let n = rho0.n();
    a.check_dim(n)?;
    if let HamiltonianMode::Frozen(h) = mode {
        if h.entries().nrows() != n {
            return Err(Error::DimensionMismatch { expected: n, found: h.entries().nrows() });
        }
    }
    let settings = settings.validated()?;
    let grid = settings.grid();
    let hbar = rho0.hbar();
    let purity0 = purity(rho0);

    let rhs = |rho: &DMatrix<Complex64>| -> Result<DMatrix<Complex64>> {
        match mode {
            HamiltonianMode::SelfConsistent => {
                let lambda = lax::lambda_from_state(a, rho, |v| v.re);
                let h = lambda.map(|v| Complex64::new(0.0, hbar) * v);
                Ok(von_neumann_rhs(&h, rho, hbar))
            }
            HamiltonianMode::Frozen(h) => Ok(von_neumann_rhs(h.entries(), rho, hbar)),
        }
    };

    let mut diagnostics = OperatorDiagnostics::default();
    let mut rho = rho0.entries().clone();
    let mut times = vec![0.0];
    let mut states = vec![rho.clone()];
    let mut diag_states = vec![lax::diagonal_strategy(&rho0.populations(), 0.0)?];

    for k in 0..grid.steps {
        let t = grid.time(k + 1);
        let next = rk4_step(&rho, grid.step_size(k), rhs)?;
        if next.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFiniteState { t });
        }
        let herm = hermiticity_defect(&next);
        diagnostics.max_hermiticity_defect = diagnostics.max_hermiticity_defect.max(herm);
        if herm > DRIFT_LIMIT {
            return Err(Error::InvariantDrift { name: "hermiticity", value: herm, limit: DRIFT_LIMIT, t });
        }
        let mut hermitized = (&next + next.adjoint()) * Complex64::new(0.5, 0.0);
        let trace = hermitized.trace().re;
        let trace_defect = (trace - 1.0).abs();
        diagnostics.max_trace_defect = diagnostics.max_trace_defect.max(trace_defect);
        if trace_defect > DRIFT_LIMIT {
            return Err(Error::InvariantDrift { name: "trace of rho", value: trace_defect, limit: DRIFT_LIMIT, t });
        }
        hermitized /= Complex64::new(trace, 0.0);
        rho = hermitized;

        if settings.records(k + 1, &grid) {
            let drift = (purity_of(&rho) - purity0).abs();
            diagnostics.max_purity_drift = diagnostics.max_purity_drift.max(drift);
            if drift > DRIFT_LIMIT {
                return Err(Error::InvariantDrift { name: "purity", value: drift, limit: DRIFT_LIMIT, t });
            }
            let imag = rho.diagonal().iter().fold(0.0_f64, |acc, v| acc.max(v.im.abs()));
            diagnostics.max_imag_diagonal = diagnostics.max_imag_diagonal.max(imag);
            times.push(t);
            let populations: Vec<f64> = rho.diagonal().iter().map(|v| v.re).collect();
            diag_states.push(lax::diagonal_strategy(&populations, t)?);
            states.push(rho.clone());
        }
    }

    let diagonal =
        Trajectory { times: times.clone(), states: diag_states, settings, diagnostics: DriftDiagnostics::default() };
    Ok(OperatorTrajectory { times, states, hbar, diagonal, diagnostics })
}
