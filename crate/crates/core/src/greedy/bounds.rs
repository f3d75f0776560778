use super::ar1::distortion_table;
use super::{mixed_cost, CostParams};
use crate::error::{Result, TansError};
use crate::num::argmin_increment;
use crate::signals::MarkovAr1Params;

/// Rate and distortion bounds of the greedy Markovian sampler for a
/// symmetric chain, given bounds on the estimator's error probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdBounds {
    pub t0_low: usize,
    pub t0_up: usize,
    pub t1_low: usize,
    pub t1_up: usize,
    pub d0_low: f64,
    pub d0_up: f64,
    pub d1_low: f64,
    pub d1_up: f64,
    pub rate_low: f64,
    pub rate_up: f64,
    pub dist_low: f64,
    pub dist_up: f64,
}

/// Increment minimizing the regime cost under error probability `pe`.
fn regime_increment(table: &[f64], pe: f64, cost: &CostParams) -> usize {
    argmin_increment(cost.t_up, |t| mixed_cost(table[t], pe, t, cost))
}

pub fn thm4_bounds(params: &MarkovAr1Params, cost: &CostParams, pe_low: f64, pe_up: f64) -> Result<RdBounds> {
    if !params.is_symmetric() {
        return Err(TansError::AsymmetricChain {
            p01: params.p01(),
            p10: params.p10(),
        });
    }
    if !(0.0..=1.0).contains(&pe_low) {
        return Err(TansError::param("pe_low", pe_low, "a probability in [0, 1]"));
    }
    if !(pe_low..=1.0).contains(&pe_up) {
        return Err(TansError::param("pe_up", pe_up, "a probability in [pe_low, 1]"));
    }
    let t0 = distortion_table(params.alpha(0), cost.t_up);
    let t1 = distortion_table(params.alpha(1), cost.t_up);
    // A larger error probability favors shorter increments.
    let t0_low = regime_increment(&t0, pe_up, cost);
    let t0_up = regime_increment(&t0, pe_low, cost);
    let t1_low = regime_increment(&t1, pe_up, cost);
    let t1_up = regime_increment(&t1, pe_low, cost);

    let per_sample = |table: &[f64], t: usize, pe: f64| {
        ((1.0 - pe) * table[t] + pe * ((t - 1) as f64 * cost.sigma_max_sq)) / t as f64
    };
    let d0_up = per_sample(&t0, t0_up, pe_up);
    let d0_low = per_sample(&t0, t0_low, pe_low);
    let d1_up = per_sample(&t1, t1_up, pe_up);
    let d1_low = per_sample(&t1, t1_low, pe_low);

    Ok(RdBounds {
        t0_low,
        t0_up,
        t1_low,
        t1_up,
        d0_low,
        d0_up,
        d1_low,
        d1_up,
        rate_low: 0.5 / t0_up as f64 + 0.5 / t1_up as f64,
        rate_up: 0.5 / t0_low as f64 + 0.5 / t1_low as f64,
        dist_low: 0.5 * (d0_low + d1_low),
        dist_up: 0.5 * (d0_up + d1_up),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greedy::{ar1_greedy_distortion, ar1_greedy_increment};
    use proptest::prelude::*;

    fn sym(a0: f64, a1: f64) -> MarkovAr1Params {
        MarkovAr1Params::symmetric(a0, a1, 0.001).unwrap()
    }

    #[test]
    fn zero_error_is_genie_pair() {
        let p = sym(0.01, 0.99);
        for rho in [0.1, 1.0, 5.0, 30.0] {
            let c = CostParams::new(rho).unwrap();
            let b = thm4_bounds(&p, &c, 0.0, 0.0).unwrap();
            let g0 = ar1_greedy_increment(0.01, &c).unwrap();
            let g1 = ar1_greedy_increment(0.99, &c).unwrap();
            assert_eq!((b.t0_low, b.t0_up, b.t1_low, b.t1_up), (g0, g0, g1, g1));
            let rate = 0.5 / g0 as f64 + 0.5 / g1 as f64;
            let dist = 0.5 * (ar1_greedy_distortion(0.01, g0) + ar1_greedy_distortion(0.99, g1));
            assert_eq!((b.rate_low, b.rate_up), (rate, rate));
            assert!((b.dist_low - dist).abs() < 1e-15 && (b.dist_up - dist).abs() < 1e-15);
        }
    }

    #[test]
    fn equal_alphas_reduce_to_single_state() {
        let p = sym(0.9, 0.9);
        let c = CostParams::new(2.0).unwrap();
        let b = thm4_bounds(&p, &c, 0.0, 0.0).unwrap();
        let t = ar1_greedy_increment(0.9, &c).unwrap();
        assert_eq!(b.t0_up, b.t1_up);
        assert_eq!(b.rate_low, 1.0 / t as f64);
    }

    #[test]
    fn rejects_asymmetric_chain_and_bad_range() {
        let c = CostParams::new(1.0).unwrap();
        let p = MarkovAr1Params::new(0.2, 0.9, 0.01, 0.02).unwrap();
        assert!(matches!(
            thm4_bounds(&p, &c, 0.0, 0.1),
            Err(TansError::AsymmetricChain { .. })
        ));
        assert!(thm4_bounds(&sym(0.2, 0.9), &c, 0.2, 0.1).is_err());
        assert!(thm4_bounds(&sym(0.2, 0.9), &c, -0.1, 0.1).is_err());
    }

    #[test]
    fn lower_error_probability_dominates() {
        // Each pe gives one curve; at every ρ the lower pe takes longer
        // increments (lower rate) for comparable distortion.
        let p = MarkovAr1Params::symmetric(0.97, 0.7, 0.001).unwrap();
        let pes = [0.0, 0.05, 0.1, 0.2];
        for rho in [0.5, 2.0, 8.0, 32.0] {
            let c = CostParams::new(rho).unwrap();
            let mut prev_rate = 0.0;
            for &pe in &pes {
                let b = thm4_bounds(&p, &c, pe, pe).unwrap();
                assert!(b.rate_low >= prev_rate);
                prev_rate = b.rate_low;
            }
        }
    }

    /// Increment oracle from the cost-difference condition
    /// `(1 - pe)(1 - α^{2T}) + pe σ² - ρ / (T (T + 1))` changing sign.
    fn difference_root_increment(alpha: f64, pe: f64, rho: f64, t_up: usize) -> usize {
        for t in 1..t_up {
            let tf = t as f64;
            let h = (1.0 - pe) * (1.0 - alpha.powi(2 * t as i32)) + pe - rho / (tf * (tf + 1.0));
            if h >= 0.0 {
                return t;
            }
        }
        t_up
    }

    proptest! {
        #[test]
        fn ordering_invariants(
            a0 in 0.01f64..0.999, a1 in 0.01f64..0.999,
            rho in 0.01f64..100.0, lo in 0.0f64..0.5, width in 0.0f64..0.5,
        ) {
            let p = sym(a0, a1);
            let c = CostParams::new(rho).unwrap();
            let b = thm4_bounds(&p, &c, lo, lo + width).unwrap();
            prop_assert!(b.t0_low <= b.t0_up && b.t1_low <= b.t1_up);
            prop_assert!(b.rate_low <= b.rate_up);
            prop_assert!(b.rate_up <= 1.0 && b.dist_low >= 0.0);
        }

        #[test]
        fn increments_match_difference_condition(
            a in 0.01f64..0.999, rho in 0.01f64..100.0, pe in 0.0f64..1.0,
        ) {
            let p = sym(a, a);
            let c = CostParams::new(rho).unwrap();
            let b = thm4_bounds(&p, &c, pe, pe).unwrap();
            prop_assert_eq!(b.t0_low, difference_root_increment(a, pe, rho, c.t_up));
        }
    }
}
