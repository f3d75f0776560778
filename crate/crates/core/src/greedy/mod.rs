//! Greedy sampling functions: each state picks the increment minimizing
//! its own expected cost `c(S, T) = d(S, T) + ρ / T`.
//!
//! For AR(1) the greedy choice is a constant increment (uniform sampling).
//! For the Markov-switching AR(1) the cost depends on the estimated regime
//! of the hidden chain and on the estimator's error probability.

mod ar1;
mod bounds;
mod estimator;
mod markov;

pub use ar1::{
    ar1_greedy_distortion, ar1_greedy_increment, ar1_root, ar1_state_cost, distortion_sum, distortion_table,
};
pub use bounds::{thm4_bounds, RdBounds};
pub use estimator::{estimate_theta, regime_posterior, RegimeClass, RegimePosterior, StateEstimate};
pub use markov::{greedy_markov_step, markov_cond_cost, GreedyMarkov};

use crate::error::{Result, TansError};

/// Default cap on increments searched by every argmin.
pub const DEFAULT_T_UP: usize = 200;

/// Rate award and increment search range shared by all sampling functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    pub rho: f64,
    /// Prediction error variance charged when the regime is unknown.
    pub sigma_max_sq: f64,
    /// Largest admissible increment.
    pub t_up: usize,
}

impl CostParams {
    /// `σ²_max = 1` (unit-power models) and `t_up = 200`.
    pub fn new(rho: f64) -> Result<Self> {
        Self::with_limits(rho, 1.0, DEFAULT_T_UP)
    }

    pub fn with_limits(rho: f64, sigma_max_sq: f64, t_up: usize) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(TansError::param("rho", rho, "a positive rate award"));
        }
        if !(sigma_max_sq >= 1.0 && sigma_max_sq.is_finite()) {
            return Err(TansError::param(
                "sigma_max_sq",
                sigma_max_sq,
                "at least the unit signal power",
            ));
        }
        if t_up < 2 {
            return Err(TansError::param("t_up", t_up as f64, "an increment cap of at least 2"));
        }
        Ok(Self {
            rho,
            sigma_max_sq,
            t_up,
        })
    }
}

/// Shared cost expression `(1 - pe) S + pe (T - 1) σ² + ρ / T`, where `S`
/// is the in-regime distortion sum. Every greedy path evaluates exactly
/// this expression so argmins agree bit for bit.
#[inline]
pub(crate) fn mixed_cost(in_regime: f64, pe: f64, t: usize, cost: &CostParams) -> f64 {
    (1.0 - pe) * in_regime + pe * ((t - 1) as f64 * cost.sigma_max_sq) + cost.rho / t as f64
}

/// Cost when the regime is considered unknown: `(T - 1) σ² + ρ / T`.
#[inline]
pub(crate) fn unknown_regime_cost(t: usize, cost: &CostParams) -> f64 {
    (t - 1) as f64 * cost.sigma_max_sq + cost.rho / t as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cost_params_validation() {
        assert!(CostParams::new(0.0).is_err());
        assert!(CostParams::with_limits(1.0, 0.5, 10).is_err());
        assert!(CostParams::with_limits(1.0, 1.0, 1).is_err());
        let c = CostParams::new(2.0).unwrap();
        assert_eq!((c.sigma_max_sq, c.t_up), (1.0, 200));
    }

    #[test]
    fn unit_increment_costs_rho() {
        let c = CostParams::new(0.7).unwrap();
        assert_eq!(mixed_cost(0.0, 0.3, 1, &c), 0.7);
        assert_eq!(unknown_regime_cost(1, &c), 0.7);
    }
}
