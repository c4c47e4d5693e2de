//! Replicator dynamics for symmetric two-player games, expressed three ways:
//! the classical vector ODE on the simplex, the Lax commutator flow of the
//! frequency matrix `X_ij = sqrt(x_i x_j)`, and von Neumann evolution of a
//! density operator. The three integrators share one RK4 scheme so their
//! trajectories can be cross-checked against each other.
//!
//! Alongside the dynamics the crate provides Nash/ESS testing and support
//! enumeration, Shannon and von Neumann entropy, and a small thermalization
//! toy model of clusters that exchange temperature with their neighbours.
//!
//! The crate is `no_std` (it needs `alloc`). File formats and the CLI live in
//! the `evoquant` crate.

#![no_std]
// `!(v > 0.0)` is used on purpose so that NaN fails positivity checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod entropy;
pub mod error;
pub mod game;
pub mod lax;
pub mod linalg;
pub mod quantum;
pub mod replicator;
mod rk4;
pub mod thermal;

pub use entropy::{entropy_series, shannon, von_neumann_entropy, EntropySeries, EntropySource};
pub use error::{Error, Result};
pub use game::{
    enumerate_symmetric_nash, expected_payoff, is_ess, is_nash, EquilibriumReport, MixedStrategy, PayoffMatrix,
};
pub use lax::{
    frequency_matrix, gsym_matrix, integrate_lax, lax_field, lax_pair, FrequencyMatrix, LaxPair, MatrixTrajectory,
};
pub use quantum::{
    hamiltonian_from_lambda, integrate_von_neumann, purity, quantize, DensityOperator, Hamiltonian, HamiltonianMode,
    OperatorTrajectory,
};
pub use replicator::{
    classify_rest_point, fitness_stats, integrate, replicator_field, IntegratorSettings, StabilityKind,
    StabilityVerdict, Trajectory,
};
pub use thermal::{EnsembleState, ThermalRecord, ThermalRun};

/// Complex scalar used by the density-operator form.
pub type Complex64 = nalgebra::Complex<f64>;
