use alloc::vec::Vec;
use nalgebra::DMatrix;

use crate::Complex64;

/// States the fixed-step integrator can combine linearly.
pub(crate) trait OdeState: Sized {
    fn add_scaled(&self, h: f64, k: &Self) -> Self;
}

impl OdeState for Vec<f64> {
    fn add_scaled(&self, h: f64, k: &Self) -> Self {
        self.iter().zip(k).map(|(y, d)| y + h * d).collect()
    }
}

impl OdeState for DMatrix<f64> {
    fn add_scaled(&self, h: f64, k: &Self) -> Self {
        self.zip_map(k, |y, d| y + h * d)
    }
}

impl OdeState for DMatrix<Complex64> {
    fn add_scaled(&self, h: f64, k: &Self) -> Self {
        self.zip_map(k, |y, d| y + d * h)
    }
}

/// One classical fourth-order Runge-Kutta step of an autonomous system.
pub(crate) fn rk4_step<S, E>(y: &S, h: f64, mut f: impl FnMut(&S) -> Result<S, E>) -> Result<S, E>
where
    S: OdeState,
{
    let k1 = f(y)?;
    let k2 = f(&y.add_scaled(0.5 * h, &k1))?;
    let k3 = f(&y.add_scaled(0.5 * h, &k2))?;
    let k4 = f(&y.add_scaled(h, &k3))?;
    Ok(y.add_scaled(h / 6.0, &k1).add_scaled(h / 3.0, &k2).add_scaled(h / 3.0, &k3).add_scaled(h / 6.0, &k4))
}

/// Fixed-step time grid over `[0, t_end]`. The last step is shortened when
/// `t_end` is not a multiple of `dt`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TimeGrid {
    pub steps: usize,
    dt: f64,
    t_end: f64,
}

impl TimeGrid {
    pub fn new(t_end: f64, dt: f64) -> Self {
        let ratio = t_end / dt;
        let mut steps = libm::round(ratio) as usize;
        if (steps as f64) < ratio * (1.0 - 1e-12) {
            steps += 1;
        }
        Self { steps: steps.max(1), dt, t_end }
    }

    /// Time after `k` steps.
    pub fn time(&self, k: usize) -> f64 {
        if k >= self.steps {
            self.t_end
        } else {
            k as f64 * self.dt
        }
    }

    /// Size of step `k` (taking the state from `time(k)` to `time(k + 1)`).
    pub fn step_size(&self, k: usize) -> f64 {
        self.time(k + 1) - self.time(k)
    }
}
