//! Dynamic-programming sampling functions.
//!
//! [`source_coding`] solves the two-state Bellman equations of online
//! source coding for a binary hidden-Markov stream by value iteration.
//! [`adp`] is the one-step approximate-DP sampler for Markov-switching
//! AR(1) signals, which corrects the greedy cost by a discounted quality of
//! the predicted next sampling state.

pub mod adp;
pub mod source_coding;

pub use adp::{adp_step, AdpConfig, AdpSampler, QualityMode, QualitySign};
pub use source_coding::{
    ar1_discounted_value, bellman_update, sc_reconstruct, sc_state_cost, sc_value_iteration, PolicyTable,
};

use crate::error::{Result, TansError};

/// Value-iteration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpConfig {
    /// Discount factor `β` in `(0, 1)`.
    pub beta: f64,
    /// Largest increment considered.
    pub t_max: usize,
    /// Stop once the largest per-state update falls below this.
    pub tol: f64,
    pub max_iters: usize,
    /// Skip the `t_max ≤ ⌊0.2 min(1/ε₀, 1/ε₁)⌋` check.
    pub override_t_max: bool,
}

impl DpConfig {
    pub const DEFAULT_TOL: f64 = 1e-10;
    pub const DEFAULT_MAX_ITERS: usize = 1_000_000;

    pub fn new(beta: f64, t_max: usize) -> Result<Self> {
        let cfg = Self {
            beta,
            t_max,
            tol: Self::DEFAULT_TOL,
            max_iters: Self::DEFAULT_MAX_ITERS,
            override_t_max: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_override(mut self, override_t_max: bool) -> Self {
        self.override_t_max = override_t_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(TansError::param("beta", self.beta, "a discount factor in (0, 1)"));
        }
        if self.t_max == 0 {
            return Err(TansError::param("t_max", 0.0, "at least 1"));
        }
        if !(self.tol > 0.0) {
            return Err(TansError::param("tol", self.tol, "a positive tolerance"));
        }
        if self.max_iters == 0 {
            return Err(TansError::param("max_iters", 0.0, "at least 1"));
        }
        Ok(())
    }
}
