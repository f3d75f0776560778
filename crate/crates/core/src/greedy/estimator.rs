//! Maximum-likelihood (MAP) estimate of the hidden regime during a sampling
//! state of the Markov-switching AR(1) signal.
//!
//! Hypotheses, for a state with `m` samples spanning `S = t_i - t_{i-m+1}`
//! time steps and a most recent interval of length `T`:
//!
//! * regime `a` throughout the window: prior `π_a p_aa^{S-1}`, likelihood the
//!   product over intervals of `N(α_a^{T_k} x_{k-1}, 1 - α_a^{2T_k})`;
//! * one switch `a → b` inside the most recent interval after `j` steps in
//!   `a`: earlier intervals follow regime `a`, the last one
//!   `N(α_a^j α_b^{T-j} x_{i-1}, 1 - α_a^{2j} α_b^{2(T-j)})`, prior
//!   `π_a p_aa^{S-T+j-1} p_ab p_bb^{T-j-1}`. `j` ranges over `1..T` when the
//!   window is a single interval and over `0..T` otherwise (`j = 0` is a
//!   switch exactly at the previous sample, only distinguishable when an
//!   earlier interval pins down regime `a`).
//!
//! Switch hypotheses are pooled into the "transition" class.

use alloc::vec::Vec;

use crate::error::{Result, TansError};
use crate::num::{ln_normal_pdf, log_sum_exp, powi};
use crate::prediction::SamplingState;
use crate::signals::{MarkovAr1Params, Regime};

/// Estimated regime class of a sampling state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegimeClass {
    Zero,
    One,
    /// The chain switched inside the most recent interval.
    Transition,
}

impl RegimeClass {
    /// Label `0`, `1` or `2`.
    pub fn label(self) -> u8 {
        match self {
            RegimeClass::Zero => 0,
            RegimeClass::One => 1,
            RegimeClass::Transition => 2,
        }
    }

    pub fn from_regime(regime: Regime) -> Self {
        if regime == 0 {
            RegimeClass::Zero
        } else {
            RegimeClass::One
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateEstimate {
    pub theta_hat: RegimeClass,
    /// Posterior probability that `theta_hat` is wrong.
    pub p_error: f64,
}

impl StateEstimate {
    /// Genie-aided estimate: the true regime, no error.
    pub fn genie(regime: Regime) -> Self {
        Self {
            theta_hat: RegimeClass::from_regime(regime),
            p_error: 0.0,
        }
    }
}

/// Posterior mass of each class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimePosterior {
    pub zero: f64,
    pub one: f64,
    pub transition: f64,
}

impl RegimePosterior {
    /// MAP class (ties resolved toward 0, then 1) and its error probability.
    pub fn estimate(&self) -> StateEstimate {
        let mut best = (RegimeClass::Zero, self.zero);
        if self.one > best.1 {
            best = (RegimeClass::One, self.one);
        }
        if self.transition > best.1 {
            best = (RegimeClass::Transition, self.transition);
        }
        StateEstimate {
            theta_hat: best.0,
            p_error: (1.0 - best.1).clamp(0.0, 1.0),
        }
    }
}

/// Log-likelihood of the intervals `entries[1..end]` under a single regime
/// coefficient.
fn ln_lik_regime(entries: &[(usize, f64)], end: usize, alpha: f64) -> f64 {
    entries[..end]
        .windows(2)
        .map(|w| {
            let t = (w[1].0 - w[0].0) as u64;
            let a = powi(alpha, t);
            ln_normal_pdf(w[1].1, a * w[0].1, 1.0 - a * a)
        })
        .sum()
}

pub fn regime_posterior(state: &SamplingState, params: &MarkovAr1Params) -> Result<RegimePosterior> {
    let entries = state.entries();
    let m = entries.len();
    if m < 2 {
        return Err(TansError::precondition("regime estimation needs at least two samples"));
    }
    let span = entries[m - 1].0 - entries[0].0;
    let (t_prev, x_prev) = entries[m - 2];
    let (t_last, x_last) = entries[m - 1];
    let last_len = t_last - t_prev;
    let first_j = if m == 2 { 1 } else { 0 };

    let mut stay = [0.0; 2];
    let mut switch_terms: Vec<f64> = Vec::with_capacity(2 * last_len);
    for a in 0..2u8 {
        let b = 1 - a;
        let alpha_a = params.alpha(a);
        let alpha_b = params.alpha(b);
        let ln_pi = libm::log(params.stationary(a));
        let ln_stay_a = libm::log(params.stay_prob(a));
        let ln_stay_b = libm::log(params.stay_prob(b));
        let ln_switch = libm::log(params.switch_prob(a));

        let earlier = ln_lik_regime(entries, m - 1, alpha_a);
        let a_last = powi(alpha_a, last_len as u64);
        stay[usize::from(a)] = ln_pi
            + (span - 1) as f64 * ln_stay_a
            + earlier
            + ln_normal_pdf(x_last, a_last * x_prev, 1.0 - a_last * a_last);

        for j in first_j..last_len {
            let gain = powi(alpha_a, j as u64) * powi(alpha_b, (last_len - j) as u64);
            let prior = ln_pi
                + (span - last_len + j - 1) as f64 * ln_stay_a
                + ln_switch
                + (last_len - j - 1) as f64 * ln_stay_b;
            switch_terms.push(prior + earlier + ln_normal_pdf(x_last, gain * x_prev, 1.0 - gain * gain));
        }
    }

    let ln_switch_total = log_sum_exp(&switch_terms);
    let total = log_sum_exp(&[stay[0], stay[1], ln_switch_total]);
    Ok(RegimePosterior {
        zero: libm::exp(stay[0] - total),
        one: libm::exp(stay[1] - total),
        transition: libm::exp(ln_switch_total - total),
    })
}

/// MAP regime class and its posterior error probability.
pub fn estimate_theta(state: &SamplingState, params: &MarkovAr1Params) -> Result<StateEstimate> {
    Ok(regime_posterior(state, params)?.estimate())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn state(entries: &[(usize, f64)]) -> SamplingState {
        SamplingState::from_slice(entries).unwrap()
    }

    /// Brute force over every hidden path of the coefficient sequence with
    /// at most one switch, restricted to the last interval: enumerates the
    /// full path probability and multiplies per-step Gaussian transition
    /// densities directly (no interval aggregation).
    fn brute_force(entries: &[(usize, f64)], p: &MarkovAr1Params) -> RegimePosterior {
        let t0 = entries[0].0;
        let span = entries.last().unwrap().0 - t0;
        let last_start = entries[entries.len() - 2].0 - t0;
        let mut mass = [0.0f64; 3];
        // path = regime of each coefficient step 0..span
        for a in 0..2u8 {
            let lo = if entries.len() == 2 { last_start + 1 } else { last_start };
            let mut switch_points: Vec<Option<usize>> = vec![None];
            switch_points.extend((lo..span).map(Some));
            for sp in switch_points {
                let path: Vec<u8> = (0..span)
                    .map(|s| match sp {
                        Some(k) if s >= k => 1 - a,
                        _ => a,
                    })
                    .collect();
                let mut prob = p.stationary(path[0]);
                for s in 1..span {
                    prob *= if path[s] == path[s - 1] {
                        p.stay_prob(path[s - 1])
                    } else {
                        p.switch_prob(path[s - 1])
                    };
                }
                let mut lik = 1.0;
                for w in entries.windows(2) {
                    let mut gain = 1.0;
                    for s in (w[0].0 - t0)..(w[1].0 - t0) {
                        gain *= p.alpha(path[s]);
                    }
                    let var = 1.0 - gain * gain;
                    let d = w[1].1 - gain * w[0].1;
                    lik *= (-d * d / (2.0 * var)).exp() / (2.0 * core::f64::consts::PI * var).sqrt();
                }
                let class = if sp.is_some() { 2 } else { usize::from(a) };
                mass[class] += prob * lik;
            }
        }
        let total: f64 = mass.iter().sum();
        RegimePosterior {
            zero: mass[0] / total,
            one: mass[1] / total,
            transition: mass[2] / total,
        }
    }

    #[test]
    fn persistent_high_correlation_state() {
        let p = MarkovAr1Params::symmetric(0.01, 0.99, 0.001).unwrap();
        let est = estimate_theta(&state(&[(10, 2.0), (11, 1.99)]), &p).unwrap();
        assert_eq!(est.theta_hat, RegimeClass::One);
        assert!(est.p_error < 0.5);
    }

    #[test]
    fn equal_alphas_reduce_to_prior() {
        let p = MarkovAr1Params::new(0.6, 0.6, 0.01, 0.03).unwrap();
        let s = state(&[(0, 0.3), (4, -1.2), (7, 0.8)]);
        let post = regime_posterior(&s, &p).unwrap();
        // span 7: stay priors π_a p_aa^6
        let w0 = 0.75 * 0.99f64.powi(6);
        let w1 = 0.25 * 0.97f64.powi(6);
        let mut wt = 0.0;
        for (a, b) in [(0u8, 1u8), (1, 0)] {
            for j in 0..3 {
                wt += p.stationary(a)
                    * p.stay_prob(a).powi(4 + j - 1)
                    * p.switch_prob(a)
                    * p.stay_prob(b).powi(3 - j - 1);
            }
            let _ = b;
        }
        let z = w0 + w1 + wt;
        assert!((post.zero - w0 / z).abs() < 1e-12);
        assert!((post.one - w1 / z).abs() < 1e-12);
        assert_eq!(post.estimate().theta_hat, RegimeClass::Zero);
    }

    #[test]
    fn matches_path_enumeration() {
        let p = MarkovAr1Params::new(0.2, 0.95, 0.05, 0.08).unwrap();
        let cases: [&[(usize, f64)]; 4] = [
            &[(0, 1.0), (3, 0.9)],
            &[(0, 1.0), (1, 0.1)],
            &[(0, -0.5), (2, -0.45), (6, 1.3)],
            &[(5, 0.7), (6, 0.68), (8, 0.6), (9, -0.9), (13, 0.2)],
        ];
        for entries in cases {
            let got = regime_posterior(&state(entries), &p).unwrap();
            let want = brute_force(entries, &p);
            assert!((got.zero - want.zero).abs() < 1e-10, "{entries:?}");
            assert!((got.one - want.one).abs() < 1e-10, "{entries:?}");
            assert!((got.transition - want.transition).abs() < 1e-10, "{entries:?}");
        }
    }

    #[test]
    fn transition_variance_matches_composed_recursion() {
        // Var of α_b^{T-j} (α_a^j x + noise_a) + noise_b, starting from a
        // known x, equals 1 - α_a^{2j} α_b^{2(T-j)}.
        let (aa, ab) = (0.3f64, 0.9f64);
        for t in 2..8 {
            for j in 1..t {
                let gb = ab.powi(2 * (t - j));
                let composed = gb * (1.0 - aa.powi(2 * j)) + (1.0 - gb);
                let closed = 1.0 - aa.powi(2 * j) * gb;
                assert!((composed - closed).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn detects_switch_to_white_regime() {
        let p = MarkovAr1Params::symmetric(0.01, 0.99, 0.001).unwrap();
        // a long smooth decay, then a large jump in the last interval
        let mut entries: Vec<(usize, f64)> = (0..9).map(|k| (4 * k, 1.5 * 0.99f64.powi(4 * k as i32))).collect();
        entries.push((36, -1.9));
        let s = state(&entries);
        let est = estimate_theta(&s, &p).unwrap();
        assert_eq!(est.theta_hat, RegimeClass::Transition);
    }

    #[test]
    fn posterior_sums_to_one_and_underflow_safe() {
        let p = MarkovAr1Params::symmetric(0.01, 0.999, 0.001).unwrap();
        let s = state(&[(0, 50.0), (1, -50.0), (2, 50.0)]);
        let post = regime_posterior(&s, &p).unwrap();
        let total = post.zero + post.one + post.transition;
        assert!((total - 1.0).abs() < 1e-12 && post.zero.is_finite());
        assert!(regime_posterior(&state(&[(0, 1.0)]), &p).is_err());
    }
}
