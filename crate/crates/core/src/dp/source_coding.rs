//! Online source coding of a binary hidden-Markov stream.
//!
//! The signal equals its two-state chain. After a sample in state `s` the
//! encoder skips `T_s - 1` indices, which the decoder fills with the last
//! sampled value. With `ε_s ≪ 1` the chain is still in `s` at the next
//! sample with probability `(1 - ε_s)^T`, giving the coupled equations
//!
//! `J(s) = min_T c(s, T) + β (1 - ε_s)^T J(s) + β (1 - (1 - ε_s)^T) J(1 - s)`.

use alloc::vec::Vec;

use super::DpConfig;
use crate::error::{check_open_unit, Result, TansError};
use crate::greedy::{ar1_state_cost, CostParams};
use crate::num::{argmin_increment, powi};
use crate::signals::BinaryHmmParams;

/// `c(s, T) = Σ_{j=1}^{T-1} (1 - ε)^{j-1} ε (T - j) + ρ / T`: expected
/// number of fill errors when the first switch happens after `j` steps, plus
/// the rate term.
pub fn sc_state_cost(eps: f64, t: usize, rho: f64) -> f64 {
    debug_assert!(t >= 1);
    let mut stay = 1.0;
    let mut s = 0.0;
    for j in 1..t {
        s += stay * eps * (t - j) as f64;
        stay *= 1.0 - eps;
    }
    s + rho / t as f64
}

/// Solved source-coding policy.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTable {
    /// Cost-to-go `J(0)`, `J(1)`.
    pub j_values: [f64; 2],
    /// Increment chosen after a sample in state 0 and in state 1.
    pub increments: [usize; 2],
    pub converged: bool,
    pub iterations: usize,
    /// `max_s |(B J)(s) - J(s)|` for the returned values.
    pub residual: f64,
}

impl PolicyTable {
    /// Increment after a sample of value `x` (0 or 1).
    pub fn increment_for(&self, x: f64) -> usize {
        if x >= 0.5 {
            self.increments[1]
        } else {
            self.increments[0]
        }
    }
}

struct Tables {
    cost: [Vec<f64>; 2],
    stay: [Vec<f64>; 2],
}

impl Tables {
    fn new(params: &BinaryHmmParams, rho: f64, t_max: usize) -> Self {
        let build = |s: u8| {
            let eps = params.eps(s);
            let cost = (0..=t_max)
                .map(|t| {
                    if t == 0 {
                        f64::INFINITY
                    } else {
                        sc_state_cost(eps, t, rho)
                    }
                })
                .collect();
            let stay = (0..=t_max).map(|t| powi(1.0 - eps, t as u64)).collect();
            (cost, stay)
        };
        let (c0, s0) = build(0);
        let (c1, s1) = build(1);
        Self {
            cost: [c0, c1],
            stay: [s0, s1],
        }
    }

    fn update(&self, beta: f64, j: [f64; 2]) -> ([f64; 2], [usize; 2]) {
        let t_max = self.cost[0].len() - 1;
        let mut out = [0.0; 2];
        let mut inc = [1; 2];
        for s in 0..2 {
            let (own, other) = (j[s], j[1 - s]);
            let q = |t: usize| {
                let stay = self.stay[s][t];
                self.cost[s][t] + beta * stay * own + beta * (1.0 - stay) * other
            };
            let t = argmin_increment(t_max, q);
            inc[s] = t;
            out[s] = q(t);
        }
        (out, inc)
    }
}

fn check_inputs(params: &BinaryHmmParams, rho: f64, cfg: &DpConfig) -> Result<()> {
    cfg.validate()?;
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(TansError::param("rho", rho, "a positive rate award"));
    }
    if !cfg.override_t_max {
        let cap = libm::floor(0.2 * (1.0 / params.eps(0)).min(1.0 / params.eps(1))) as usize;
        if cfg.t_max > cap {
            return Err(TansError::precondition(alloc::format!(
                "t_max = {} exceeds {cap} = floor(0.2 min(1/eps0, 1/eps1)); \
                 increments must stay well below the mean sojourn time (override to force)",
                cfg.t_max
            )));
        }
    }
    Ok(())
}

/// One application of the Bellman operator: the updated values and the
/// minimizing increments.
pub fn bellman_update(
    params: &BinaryHmmParams,
    rho: f64,
    cfg: &DpConfig,
    j: [f64; 2],
) -> Result<([f64; 2], [usize; 2])> {
    check_inputs(params, rho, cfg)?;
    Ok(Tables::new(params, rho, cfg.t_max).update(cfg.beta, j))
}

/// Value iteration from `J ≡ 0`.
pub fn sc_value_iteration(params: &BinaryHmmParams, rho: f64, cfg: &DpConfig) -> Result<PolicyTable> {
    check_inputs(params, rho, cfg)?;
    let tables = Tables::new(params, rho, cfg.t_max);
    let mut j = [0.0; 2];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iters {
        let (next, _) = tables.update(cfg.beta, j);
        iterations += 1;
        let delta = (next[0] - j[0]).abs().max((next[1] - j[1]).abs());
        j = next;
        if delta < cfg.tol {
            converged = true;
            break;
        }
    }
    let (after, increments) = tables.update(cfg.beta, j);
    let residual = (after[0] - j[0]).abs().max((after[1] - j[1]).abs());
    Ok(PolicyTable {
        j_values: j,
        increments,
        converged: converged && residual <= cfg.tol,
        iterations,
        residual,
    })
}

/// Single-state discounted problem for an AR(1) signal,
/// `J = min_T c(T) + β J`, solved by value iteration. Returns `(J, T)`.
pub fn ar1_discounted_value(alpha: f64, cost: &CostParams, cfg: &DpConfig) -> Result<(f64, usize)> {
    cfg.validate()?;
    check_open_unit("alpha", alpha)?;
    let t_max = cfg.t_max.min(cost.t_up);
    let costs: Vec<f64> = (0..=t_max)
        .map(|t| {
            if t == 0 {
                f64::INFINITY
            } else {
                ar1_state_cost(alpha, t, cost)
            }
        })
        .collect();
    let mut j = 0.0;
    for _ in 0..cfg.max_iters {
        let t = argmin_increment(t_max, |t| costs[t] + cfg.beta * j);
        let next = costs[t] + cfg.beta * j;
        let delta = (next - j).abs();
        j = next;
        if delta < cfg.tol {
            break;
        }
    }
    let t = argmin_increment(t_max, |t| costs[t] + cfg.beta * j);
    Ok((j, t))
}

/// Causal most-probable fill: every index takes the value of the latest
/// sample at or before it (the first sample's value before it).
pub fn sc_reconstruct(samples: &[(usize, f64)], len: usize) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(TansError::precondition("reconstruction needs at least one sample"));
    }
    for (k, &(t, x)) in samples.iter().enumerate() {
        if x != 0.0 && x != 1.0 {
            return Err(TansError::MeasureMismatch { t, value: x });
        }
        if t >= len || (k > 0 && t <= samples[k - 1].0) {
            return Err(TansError::precondition(
                "sample times must be strictly increasing and inside the trace",
            ));
        }
    }
    let mut out = Vec::with_capacity(len);
    let mut next = 0;
    let mut current = samples[0].1;
    for t in 0..len {
        while next < samples.len() && samples[next].0 <= t {
            current = samples[next].1;
            next += 1;
        }
        out.push(current);
    }
    Ok(out)
}
