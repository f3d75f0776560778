use alloc::vec::Vec;

use super::ar1::distortion_table;
use super::{estimate_theta, mixed_cost, unknown_regime_cost, CostParams, RegimeClass, StateEstimate};
use crate::error::{Result, TansError};
use crate::num::argmin_increment;
use crate::prediction::SamplingState;
use crate::signals::MarkovAr1Params;

/// Expected cost of increment `t` given the regime estimate:
/// `(1 - P_e) Σ (1 - α_θ^{2ℓ}) + P_e (T - 1) σ²_max + ρ / T`, or
/// `(T - 1) σ²_max + ρ / T` when a transition is suspected.
pub fn markov_cond_cost(
    estimate: &StateEstimate,
    t: usize,
    params: &MarkovAr1Params,
    cost: &CostParams,
) -> Result<f64> {
    if t == 0 || t > cost.t_up {
        return Err(TansError::IncrementOutOfRange {
            increment: t,
            t_up: cost.t_up,
        });
    }
    Ok(match estimate.theta_hat {
        RegimeClass::Transition => unknown_regime_cost(t, cost),
        class => {
            let alpha = params.alpha(class.label());
            mixed_cost(super::distortion_sum(alpha, t), estimate.p_error, t, cost)
        }
    })
}

/// Greedy sampler for the Markov-switching AR(1) signal with cached
/// per-regime distortion tables.
#[derive(Debug, Clone)]
pub struct GreedyMarkov {
    params: MarkovAr1Params,
    cost: CostParams,
    tables: [Vec<f64>; 2],
}

impl GreedyMarkov {
    pub fn new(params: MarkovAr1Params, cost: CostParams) -> Self {
        let tables = [
            distortion_table(params.alpha(0), cost.t_up),
            distortion_table(params.alpha(1), cost.t_up),
        ];
        Self { params, cost, tables }
    }

    pub fn params(&self) -> &MarkovAr1Params {
        &self.params
    }

    pub fn cost(&self) -> &CostParams {
        &self.cost
    }

    /// Cost of increment `t`, identical to [`markov_cond_cost`].
    pub fn cost_of(&self, estimate: &StateEstimate, t: usize) -> f64 {
        match estimate.theta_hat {
            RegimeClass::Transition => unknown_regime_cost(t, &self.cost),
            class => {
                let table = &self.tables[usize::from(class.label())];
                mixed_cost(table[t], estimate.p_error, t, &self.cost)
            }
        }
    }

    /// Argmin of the conditional cost over `[1, t_up]`.
    pub fn increment_for(&self, estimate: &StateEstimate) -> usize {
        argmin_increment(self.cost.t_up, |t| self.cost_of(estimate, t))
    }

    /// Estimate the regime, then choose the next increment.
    pub fn step(&self, state: &SamplingState) -> Result<(usize, StateEstimate)> {
        let est = estimate_theta(state, &self.params)?;
        Ok((self.increment_for(&est), est))
    }
}

/// One step of the greedy Markovian sampler.
pub fn greedy_markov_step(
    state: &SamplingState,
    params: &MarkovAr1Params,
    cost: &CostParams,
) -> Result<(usize, StateEstimate)> {
    GreedyMarkov::new(*params, *cost).step(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greedy::{ar1_greedy_increment, ar1_state_cost};
    use proptest::prelude::*;

    fn params() -> MarkovAr1Params {
        MarkovAr1Params::symmetric(0.01, 0.99, 0.001).unwrap()
    }

    fn est(theta_hat: RegimeClass, p_error: f64) -> StateEstimate {
        StateEstimate { theta_hat, p_error }
    }

    fn oracle_cost(e: &StateEstimate, t: usize, p: &MarkovAr1Params, c: &CostParams) -> f64 {
        let unknown = (t as f64 - 1.0) * c.sigma_max_sq + c.rho / t as f64;
        let a = match e.theta_hat {
            RegimeClass::Transition => return unknown,
            RegimeClass::Zero => p.alpha(0),
            RegimeClass::One => p.alpha(1),
        };
        let mut s = 0.0;
        for l in 1..t {
            s += 1.0 - a.powi(2 * l as i32);
        }
        (1.0 - e.p_error) * s + e.p_error * (t as f64 - 1.0) * c.sigma_max_sq + c.rho / t as f64
    }

    #[test]
    fn unit_increment_costs_rho() {
        let c = CostParams::new(3.0).unwrap();
        for cls in [RegimeClass::Zero, RegimeClass::One, RegimeClass::Transition] {
            assert_eq!(markov_cond_cost(&est(cls, 0.2), 1, &params(), &c).unwrap(), 3.0);
        }
    }

    #[test]
    fn degenerate_error_probabilities() {
        let c = CostParams::new(1.5).unwrap();
        let p = params();
        for t in 1..=40 {
            let genie = markov_cond_cost(&est(RegimeClass::Zero, 0.0), t, &p, &c).unwrap();
            assert_eq!(genie, ar1_state_cost(0.01, t, &c));
            let fail = markov_cond_cost(&est(RegimeClass::Zero, 1.0), t, &p, &c).unwrap();
            let trans = markov_cond_cost(&est(RegimeClass::Transition, 0.3), t, &p, &c).unwrap();
            assert_eq!(fail, trans);
        }
    }

    #[test]
    fn rejects_out_of_range_increment() {
        let c = CostParams::with_limits(1.0, 1.0, 10).unwrap();
        let e = est(RegimeClass::One, 0.0);
        assert!(markov_cond_cost(&e, 0, &params(), &c).is_err());
        assert!(markov_cond_cost(&e, 11, &params(), &c).is_err());
    }

    #[test]
    fn genie_matches_ar1_greedy() {
        let p = params();
        for rho in [0.05, 0.5, 2.0, 10.0, 40.0] {
            let c = CostParams::new(rho).unwrap();
            let g = GreedyMarkov::new(p, c);
            for regime in 0..2u8 {
                let t = g.increment_for(&StateEstimate::genie(regime));
                assert_eq!(t, ar1_greedy_increment(p.alpha(regime), &c).unwrap());
            }
        }
    }

    #[test]
    fn transition_class_brute_force() {
        let c = CostParams::new(7.0).unwrap();
        let g = GreedyMarkov::new(params(), c);
        let mut best = (f64::INFINITY, 0);
        for t in 1..=c.t_up {
            let v = (t - 1) as f64 + 7.0 / t as f64;
            if v < best.0 {
                best = (v, t);
            }
        }
        assert_eq!(g.increment_for(&est(RegimeClass::Transition, 0.0)), best.1);
    }

    proptest! {
        #[test]
        fn step_is_exhaustive_argmin(
            rho in 0.01f64..50.0,
            pe in 0.0f64..1.0,
            cls in 0u8..3,
            t_up in 2usize..120,
        ) {
            let p = params();
            let c = CostParams::with_limits(rho, 1.0, t_up).unwrap();
            let e = est(match cls { 0 => RegimeClass::Zero, 1 => RegimeClass::One, _ => RegimeClass::Transition }, pe);
            let g = GreedyMarkov::new(p, c);
            let mut best = (f64::INFINITY, 0);
            for t in 1..=t_up {
                let v = markov_cond_cost(&e, t, &p, &c).unwrap();
                prop_assert!((v - oracle_cost(&e, t, &p, &c)).abs() < 1e-9);
                prop_assert_eq!(v, g.cost_of(&e, t));
                if v < best.0 {
                    best = (v, t);
                }
            }
            prop_assert_eq!(g.increment_for(&e), best.1);
        }

        #[test]
        fn free_step_matches_sampler(x0 in -3.0f64..3.0, x1 in -3.0f64..3.0, gap in 1usize..20, rho in 0.1f64..20.0) {
            let p = params();
            let c = CostParams::new(rho).unwrap();
            let s = SamplingState::from_slice(&[(0, x0), (gap, x1)]).unwrap();
            let (t, e) = greedy_markov_step(&s, &p, &c).unwrap();
            prop_assert_eq!(e, estimate_theta(&s, &p).unwrap());
            prop_assert_eq!(t, GreedyMarkov::new(p, c).increment_for(&e));
        }
    }
}
