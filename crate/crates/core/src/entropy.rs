//! Shannon entropy of population vectors and von Neumann entropy of density
//! operators, in nats.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::game::MixedStrategy;
use crate::lax::{MatrixTrajectory, DRIFT_LIMIT};
use crate::linalg;
use crate::quantum::{DensityOperator, OperatorTrajectory, PSD_TOL};
use crate::replicator::Trajectory;
use crate::Complex64;

/// `-sum_i x_i ln x_i`, with `0 ln 0 = 0`.
pub fn shannon(x: &MixedStrategy) -> f64 {
    shannon_of(x.weights())
}

/// Shannon entropy of raw weights; non-positive entries contribute nothing.
pub fn shannon_of(p: &[f64]) -> f64 {
    -p.iter().filter(|&&v| v > 0.0).map(|&v| v * libm::log(v)).sum::<f64>()
}

/// `-Tr(rho ln rho)` from the spectrum of `rho`.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    spectral_entropy(rho.entries(), PSD_TOL)
}

/// Entropy of a Hermitian matrix read back from an integrated trajectory,
/// where the spectrum may sit up to `slack` below zero.
///
/// Eigenvalues in `[-slack, 0)` are clamped to zero and the spectrum is
/// renormalized to unit sum; anything more negative is rejected.
pub fn spectral_entropy(m: &DMatrix<Complex64>, slack: f64) -> Result<f64> {
    let ev = linalg::hermitian_eigenvalues(m);
    let min = ev.last().copied().unwrap_or(0.0);
    if min < -slack {
        return Err(Error::NegativeEigenvalue { value: min });
    }
    let clamped: Vec<f64> = ev.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    let normalized: Vec<f64> = clamped.iter().map(|v| v / total).collect();
    Ok(shannon_of(&normalized).max(0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropySeries {
    pub times: Vec<f64>,
    pub shannon: Vec<f64>,
    pub von_neumann: Option<Vec<f64>>,
}

/// Anything that can report an entropy series per recorded time.
pub trait EntropySource {
    fn entropy_series(&self) -> Result<EntropySeries>;
}

impl EntropySource for Trajectory {
    fn entropy_series(&self) -> Result<EntropySeries> {
        Ok(EntropySeries {
            times: self.times.clone(),
            shannon: self.states.iter().map(shannon).collect(),
            von_neumann: None,
        })
    }
}

impl EntropySource for MatrixTrajectory {
    fn entropy_series(&self) -> Result<EntropySeries> {
        self.diagonal.entropy_series()
    }
}

/// Along an integrated trajectory the spectrum may drift from the pure state
/// by up to the integrator's drift limit, so negative eigenvalues down to
/// that limit are clamped rather than rejected.
impl EntropySource for OperatorTrajectory {
    fn entropy_series(&self) -> Result<EntropySeries> {
        let von_neumann =
            self.states.iter().map(|rho| spectral_entropy(rho, DRIFT_LIMIT)).collect::<Result<Vec<f64>>>()?;
        Ok(EntropySeries {
            times: self.times.clone(),
            shannon: self.diagonal.states.iter().map(shannon).collect(),
            von_neumann: Some(von_neumann),
        })
    }
}

pub fn entropy_series<T: EntropySource + ?Sized>(traj: &T) -> Result<EntropySeries> {
    traj.entropy_series()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::PayoffMatrix;
    use crate::quantum::quantize;
    use crate::replicator::integrate;
    use alloc::vec;

    fn ms(w: &[f64]) -> MixedStrategy {
        MixedStrategy::new(w.to_vec()).unwrap()
    }

    #[test]
    fn shannon_examples() {
        assert_eq!(shannon(&ms(&[1.0, 0.0, 0.0])), 0.0);
        assert!((shannon(&MixedStrategy::uniform(4).unwrap()) - libm::log(4.0)).abs() < 1e-15);
        assert!((shannon(&ms(&[0.5, 0.25, 0.25])) - 1.039721).abs() < 1e-6);
        assert!((shannon(&ms(&[0.5, 0.25, 0.25])) - 1.5 * core::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn von_neumann_examples() {
        let rho = quantize(&ms(&[0.2, 0.3, 0.5])).unwrap();
        assert!(von_neumann_entropy(&rho).unwrap() < 1e-8);
        let rho = DensityOperator::from_probabilities(&ms(&[0.5, 0.5])).unwrap();
        assert!((von_neumann_entropy(&rho).unwrap() - core::f64::consts::LN_2).abs() < 1e-14);
        let rho = DensityOperator::from_probabilities(&ms(&[0.75, 0.25])).unwrap();
        assert!((von_neumann_entropy(&rho).unwrap() - 0.562335).abs() < 1e-6);
    }

    #[test]
    fn negative_spectrum_is_rejected() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(1.1, 0.0),
            Complex64::new(-0.1, 0.0),
        ]));
        assert!(matches!(spectral_entropy(&m, PSD_TOL), Err(Error::NegativeEigenvalue { .. })));
    }

    #[test]
    fn series_examples() {
        let rps = PayoffMatrix::from_rows(&[vec![0.0, -1.0, 1.0], vec![1.0, 0.0, -1.0], vec![-1.0, 1.0, 0.0]]).unwrap();
        let vertex = integrate(&rps, &ms(&[0.0, 1.0, 0.0]), 1.0, 0.1).unwrap();
        assert!(entropy_series(&vertex).unwrap().shannon.iter().all(|&h| h == 0.0));

        let centre = integrate(&rps, &MixedStrategy::uniform(3).unwrap(), 1.0, 0.1).unwrap();
        let series = entropy_series(&centre).unwrap();
        assert!(series.shannon.iter().all(|h| (h - libm::log(3.0)).abs() < 1e-12));
        assert!(series.von_neumann.is_none());

        let pd = PayoffMatrix::from_rows(&[vec![3.0, 0.0], vec![5.0, 1.0]]).unwrap();
        let traj = integrate(&pd, &ms(&[0.5, 0.5]), 200.0, 1e-3).unwrap();
        let series = entropy_series(&traj).unwrap();
        assert!((series.shannon[0] - core::f64::consts::LN_2).abs() < 1e-15);
        assert!(*series.shannon.last().unwrap() < 1e-3);
    }
}
