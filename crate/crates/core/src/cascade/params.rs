use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Number of steps used when the caller does not choose one.
pub const DEFAULT_STEPS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CascadeParams<F> {
    /// Cumulative failure rate over the whole run, in `[0, 1]`.
    pub alpha: F,
    /// Overall discount rate over the whole run, `>= 0`.
    pub gamma: F,
    pub steps: usize,
    /// Fraction of nodes failed at `t = 0`, in `[0, 1)`.
    pub shock_fraction: F,
    pub seed: u64,
}

impl<F: Scalar> CascadeParams<F> {
    pub fn new(alpha: F, gamma: F, steps: usize, seed: u64) -> Self {
        Self {
            alpha,
            gamma,
            steps,
            shock_fraction: F::from_f64_lossy(0.1),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= F::zero() && self.alpha <= F::one()) {
            return Err(Error::InvalidParam(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        if !(self.gamma >= F::zero()) || self.gamma.is_infinite() {
            return Err(Error::InvalidParam(format!("gamma {} must be finite and >= 0", self.gamma)));
        }
        if self.steps == 0 {
            return Err(Error::InvalidParam("at least one time step is required".into()));
        }
        if !(self.shock_fraction >= F::zero() && self.shock_fraction < F::one()) {
            return Err(Error::InvalidParam(format!(
                "shock fraction {} outside [0, 1)",
                self.shock_fraction
            )));
        }
        Ok(())
    }

    pub fn step_params(&self) -> Result<StepParams<F>> {
        derive_step_params(self.alpha, self.gamma, self.steps)
    }
}

/// Per-step failure and discount rates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepParams<F> {
    pub k_step: F,
    /// May be infinite for very large discount rates, which makes the
    /// dynamics memoryless.
    pub r_step: F,
}

/// Converts whole-run rates into per-step rates.
///
/// `k = 1 - (1 - alpha)^(2 / (T + 1))` and `r = exp(gamma / T) - 1`.
pub fn derive_step_params<F: Scalar>(alpha: F, gamma: F, steps: usize) -> Result<StepParams<F>> {
    if !(alpha >= F::zero() && alpha <= F::one()) {
        return Err(Error::InvalidParam(format!("alpha {alpha} outside [0, 1]")));
    }
    if !(gamma >= F::zero()) {
        return Err(Error::InvalidParam(format!("gamma {gamma} must be >= 0")));
    }
    if steps == 0 {
        return Err(Error::InvalidParam("at least one time step is required".into()));
    }
    let t = F::from_usize_lossy(steps);
    let k_step = if steps == 1 {
        alpha
    } else {
        let exponent = F::from_f64_lossy(2.0) / (t + F::one());
        F::one() - (F::one() - alpha).powf(exponent)
    };
    let r_step = (gamma / t).exp_m1();
    Ok(StepParams { k_step, r_step })
}
