//! Qualitative coarsening toy: clusters on a line exchange "temperature" with
//! their neighbours and merge once adjacent temperatures agree, until a single
//! cluster remains. The dynamics are illustrative and carry no empirical
//! meaning.
//!
//! Update rule for cluster `i` with neighbours `j` (chain adjacency):
//!
//! ```text
//! T_i <- T_i + kappa * sum_j w_j / (w_i + w_j) * (T_j - T_i)
//! ```
//!
//! applied simultaneously, followed by merging every run of adjacent clusters
//! whose temperatures differ by less than `merge_eps`. Each merged cluster
//! carries the summed weight and the weighted-mean temperature, so
//! `sum_i w_i T_i` is conserved.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub const MAX_KAPPA: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleState {
    temperatures: Vec<f64>,
    weights: Vec<f64>,
}

impl EnsembleState {
    pub fn new(temperatures: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if temperatures.is_empty() {
            return Err(Error::param("temperatures", "need at least one cluster"));
        }
        if temperatures.len() != weights.len() {
            return Err(Error::DimensionMismatch { expected: temperatures.len(), found: weights.len() });
        }
        if let Some(i) = temperatures.iter().position(|t| !t.is_finite()) {
            return Err(Error::param("temperatures", format!("entry {i} is not finite")));
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositiveWeight { index, value });
            }
        }
        Ok(Self { temperatures, weights })
    }

    /// Equal unit weights.
    pub fn uniform_weights(temperatures: Vec<f64>) -> Result<Self> {
        let weights = alloc::vec![1.0; temperatures.len()];
        Self::new(temperatures, weights)
    }

    pub fn temperatures(&self) -> &[f64] {
        &self.temperatures
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cluster_count(&self) -> usize {
        self.temperatures.len()
    }

    /// `sum_i w_i T_i`.
    pub fn heat(&self) -> f64 {
        self.temperatures.iter().zip(&self.weights).map(|(t, w)| t * w).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn mean_temperature(&self) -> f64 {
        self.heat() / self.total_weight()
    }

    pub fn min_temperature(&self) -> f64 {
        self.temperatures.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_temperature(&self) -> f64 {
        self.temperatures.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// One heat exchange followed by merging.
    pub fn step(&self, kappa: f64, merge_eps: f64) -> Result<Self> {
        check_params(kappa, merge_eps)?;
        let n = self.cluster_count();
        let t = &self.temperatures;
        let w = &self.weights;
        let mut exchanged = t.clone();
        for i in 0..n {
            let mut flow = 0.0;
            for j in [i.wrapping_sub(1), i + 1] {
                if j < n {
                    flow += w[j] / (w[i] + w[j]) * (t[j] - t[i]);
                }
            }
            exchanged[i] += kappa * flow;
        }
        Ok(merge(&exchanged, w, merge_eps))
    }
}

fn check_params(kappa: f64, merge_eps: f64) -> Result<()> {
    if !(0.0..=MAX_KAPPA).contains(&kappa) {
        return Err(Error::param("kappa", format!("must lie in [0, {MAX_KAPPA}], got {kappa}")));
    }
    if !(merge_eps > 0.0) {
        return Err(Error::param("merge_eps", format!("must be positive, got {merge_eps}")));
    }
    Ok(())
}

/// Merges every maximal run of neighbours with `|T_i - T_{i+1}| < eps`.
fn merge(temperatures: &[f64], weights: &[f64], eps: f64) -> EnsembleState {
    let mut out_t = Vec::with_capacity(temperatures.len());
    let mut out_w = Vec::with_capacity(weights.len());
    let mut heat = temperatures[0] * weights[0];
    let mut weight = weights[0];
    for i in 1..temperatures.len() {
        if (temperatures[i] - temperatures[i - 1]).abs() < eps {
            heat += temperatures[i] * weights[i];
            weight += weights[i];
        } else {
            out_t.push(heat / weight);
            out_w.push(weight);
            heat = temperatures[i] * weights[i];
            weight = weights[i];
        }
    }
    out_t.push(heat / weight);
    out_w.push(weight);
    EnsembleState { temperatures: out_t, weights: out_w }
}

/// `step` as a free function.
pub fn step(state: &EnsembleState, kappa: f64, merge_eps: f64) -> Result<EnsembleState> {
    state.step(kappa, merge_eps)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalRecord {
    pub step: usize,
    pub state: EnsembleState,
}

impl ThermalRecord {
    pub fn cluster_count(&self) -> usize {
        self.state.cluster_count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalRun {
    /// Step 0 is the initial state.
    pub records: Vec<ThermalRecord>,
}

impl ThermalRun {
    pub fn last(&self) -> &ThermalRecord {
        self.records.last().expect("run always records the initial state")
    }

    pub fn converged(&self) -> bool {
        self.last().cluster_count() == 1
    }
}

/// Steps until one cluster remains or `max_steps` steps have been taken.
pub fn run(state: &EnsembleState, kappa: f64, merge_eps: f64, max_steps: usize) -> Result<ThermalRun> {
    check_params(kappa, merge_eps)?;
    if max_steps == 0 {
        return Err(Error::param("max_steps", "must be at least 1"));
    }
    let mut records = alloc::vec![ThermalRecord { step: 0, state: state.clone() }];
    let mut current = state.clone();
    for k in 1..=max_steps {
        if current.cluster_count() == 1 {
            break;
        }
        current = current.step(kappa, merge_eps)?;
        records.push(ThermalRecord { step: k, state: current.clone() });
    }
    Ok(ThermalRun { records })
}
