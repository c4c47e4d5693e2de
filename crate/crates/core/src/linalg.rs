//! Small dense helpers shared by the matrix and operator forms.

use alloc::vec::Vec;
use nalgebra::{ComplexField, DMatrix, DVector};

use crate::Complex64;

/// `[a, b] = ab - ba`.
pub fn commutator<T: ComplexField>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    a * b - b * a
}

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

pub fn max_abs_complex(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(libm::hypot(v.re, v.im)))
}

/// `max |a_ij - a_ji|`.
pub fn symmetry_defect(m: &DMatrix<f64>) -> f64 {
    max_abs(&(m - m.transpose()))
}

/// `max |a_ij - conj(a_ji)|`.
pub fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    max_abs_complex(&(m - m.adjoint()))
}

/// `max |X^2 - X|`.
pub fn projector_defect(m: &DMatrix<f64>) -> f64 {
    max_abs(&(m * m - m))
}

/// Eigenvalues of a real symmetric matrix, sorted in descending order.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Eigenvalues of a Hermitian matrix, sorted in descending order.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Solves `a x = b`, returning `None` when `a` is numerically singular or the
/// solution does not reproduce `b`.
pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let scale = a.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    let lu = a.clone().full_piv_lu();
    let u = lu.u();
    let min_pivot = u.diagonal().iter().fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
    if min_pivot <= 1e-12 * scale {
        return None;
    }
    let x = lu.solve(b)?;
    if x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let residual = (a * &x - b).amax();
    if residual > 1e-9 * scale * x.amax().max(1.0) {
        return None;
    }
    Some(x)
}

/// Orthonormal basis (as columns) of the hyperplane `sum_i v_i = 0` in R^n.
///
/// Built from Helmert contrasts, so it is exact up to rounding and needs no
/// factorization.
pub fn simplex_tangent_basis(n: usize) -> DMatrix<f64> {
    let mut basis = DMatrix::zeros(n, n.saturating_sub(1));
    for k in 1..n {
        let norm = libm::sqrt((k * (k + 1)) as f64);
        for i in 0..k {
            basis[(i, k - 1)] = 1.0 / norm;
        }
        basis[(k, k - 1)] = -(k as f64) / norm;
    }
    basis
}
