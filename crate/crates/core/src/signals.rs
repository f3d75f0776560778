//! Seeded generators for the three signal classes: stationary AR(1),
//! AR(1) whose coefficient is switched by a hidden two-state Markov chain,
//! and a binary signal equal to the hidden chain state.
//!
//! Every generator starts from its stationary distribution: `X(0) ~ N(0, 1)`
//! for the AR models and the chain's stationary law for the hidden state.

use alloc::vec::Vec;

use crate::error::{check_open_unit, Result, TansError};
use crate::rng::SignalRng;

/// Hidden chain state label.
pub type Regime = u8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ar1Params {
    alpha: f64,
}

impl Ar1Params {
    pub fn new(alpha: f64) -> Result<Self> {
        check_open_unit("alpha", alpha)?;
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Innovation variance `1 - alpha^2` keeping the signal at unit power.
    pub fn noise_variance(&self) -> f64 {
        1.0 - self.alpha * self.alpha
    }
}

/// Two AR coefficients selected by a hidden chain with switching
/// probabilities `p01` (0 → 1) and `p10` (1 → 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovAr1Params {
    alpha: [f64; 2],
    p01: f64,
    p10: f64,
}

impl MarkovAr1Params {
    pub fn new(alpha0: f64, alpha1: f64, p01: f64, p10: f64) -> Result<Self> {
        check_open_unit("alpha0", alpha0)?;
        check_open_unit("alpha1", alpha1)?;
        check_open_unit("p01", p01)?;
        check_open_unit("p10", p10)?;
        Ok(Self {
            alpha: [alpha0, alpha1],
            p01,
            p10,
        })
    }

    /// Symmetric chain, `p01 = p10 = p`.
    pub fn symmetric(alpha0: f64, alpha1: f64, p: f64) -> Result<Self> {
        Self::new(alpha0, alpha1, p, p)
    }

    pub fn alpha(&self, regime: Regime) -> f64 {
        self.alpha[usize::from(regime & 1)]
    }

    pub fn p01(&self) -> f64 {
        self.p01
    }

    pub fn p10(&self) -> f64 {
        self.p10
    }

    pub fn is_symmetric(&self) -> bool {
        self.p01 == self.p10
    }

    /// Probability of leaving `regime` in one step.
    pub fn switch_prob(&self, regime: Regime) -> f64 {
        if regime == 0 {
            self.p01
        } else {
            self.p10
        }
    }

    pub fn stay_prob(&self, regime: Regime) -> f64 {
        1.0 - self.switch_prob(regime)
    }

    pub fn stationary(&self, regime: Regime) -> f64 {
        stationary(self.p01, self.p10, regime)
    }
}

/// Binary hidden-chain signal: `X(t) = θ_t`, with `eps0 = P(0 → 1)` and
/// `eps1 = P(1 → 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryHmmParams {
    eps: [f64; 2],
}

impl BinaryHmmParams {
    pub fn new(eps0: f64, eps1: f64) -> Result<Self> {
        check_open_unit("eps0", eps0)?;
        check_open_unit("eps1", eps1)?;
        Ok(Self { eps: [eps0, eps1] })
    }

    /// Probability of leaving state `regime` in one step.
    pub fn eps(&self, regime: Regime) -> f64 {
        self.eps[usize::from(regime & 1)]
    }

    pub fn stationary(&self, regime: Regime) -> f64 {
        stationary(self.eps[0], self.eps[1], regime)
    }
}

fn stationary(p01: f64, p10: f64, regime: Regime) -> f64 {
    if regime == 0 {
        p10 / (p01 + p10)
    } else {
        p01 / (p01 + p10)
    }
}

/// A finite realization plus its hidden-state ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalTrace {
    pub values: Vec<f64>,
    /// Empty for AR(1); otherwise `hidden_states[t] = θ_t`.
    pub hidden_states: Vec<Regime>,
    pub seed: u64,
}

impl SignalTrace {
    pub fn new(values: Vec<f64>, hidden_states: Vec<Regime>, seed: u64) -> Result<Self> {
        if !hidden_states.is_empty() && hidden_states.len() != values.len() {
            return Err(TansError::LengthMismatch {
                expected: values.len(),
                actual: hidden_states.len(),
            });
        }
        Ok(Self {
            values,
            hidden_states,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_binary(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }
}

fn check_length(length: usize) -> Result<()> {
    if length == 0 {
        Err(TansError::precondition("trace length must be at least 1"))
    } else {
        Ok(())
    }
}

fn draw_regime(rng: &mut SignalRng, p01: f64, p10: f64) -> Regime {
    Regime::from(rng.bernoulli(stationary(p01, p10, 1)))
}

fn step_regime(rng: &mut SignalRng, regime: Regime, p01: f64, p10: f64) -> Regime {
    let leave = if regime == 0 { p01 } else { p10 };
    if rng.bernoulli(leave) {
        1 - regime
    } else {
        regime
    }
}

/// `X(t+1) = α X(t) + Z(t+1)`, `Z ~ N(0, 1 - α²)`.
pub fn gen_ar1(params: &Ar1Params, length: usize, seed: u64) -> Result<SignalTrace> {
    check_length(length)?;
    let mut rng = SignalRng::from_seed(seed);
    let noise_sd = libm::sqrt(params.noise_variance());
    let mut values = Vec::with_capacity(length);
    let mut x = rng.standard_normal();
    values.push(x);
    for _ in 1..length {
        x = params.alpha * x + noise_sd * rng.standard_normal();
        values.push(x);
    }
    SignalTrace::new(values, Vec::new(), seed)
}

/// `X(t+1) = α_{θ_t} X(t) + Z_{θ_t}(t+1)` with `θ` a two-state chain.
pub fn gen_markov_ar1(params: &MarkovAr1Params, length: usize, seed: u64) -> Result<SignalTrace> {
    check_length(length)?;
    let mut rng = SignalRng::from_seed(seed);
    let noise_sd = [
        libm::sqrt(1.0 - params.alpha[0] * params.alpha[0]),
        libm::sqrt(1.0 - params.alpha[1] * params.alpha[1]),
    ];
    let mut values = Vec::with_capacity(length);
    let mut states = Vec::with_capacity(length);
    let mut theta = draw_regime(&mut rng, params.p01, params.p10);
    let mut x = rng.standard_normal();
    values.push(x);
    states.push(theta);
    for _ in 1..length {
        let k = usize::from(theta);
        x = params.alpha[k] * x + noise_sd[k] * rng.standard_normal();
        theta = step_regime(&mut rng, theta, params.p01, params.p10);
        values.push(x);
        states.push(theta);
    }
    SignalTrace::new(values, states, seed)
}

pub fn gen_binary_hmm(params: &BinaryHmmParams, length: usize, seed: u64) -> Result<SignalTrace> {
    check_length(length)?;
    let mut rng = SignalRng::from_seed(seed);
    let mut states = Vec::with_capacity(length);
    let mut theta = draw_regime(&mut rng, params.eps[0], params.eps[1]);
    states.push(theta);
    for _ in 1..length {
        theta = step_regime(&mut rng, theta, params.eps[0], params.eps[1]);
        states.push(theta);
    }
    let values = states.iter().map(|&s| f64::from(s)).collect();
    SignalTrace::new(values, states, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lag_autocorr(x: &[f64], lag: usize) -> f64 {
        let n = x.len() - lag;
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / x.len() as f64;
        let cov = (0..n).map(|t| (x[t] - mean) * (x[t + lag] - mean)).sum::<f64>() / n as f64;
        cov / var
    }

    fn sojourn_lengths(states: &[Regime]) -> [(usize, usize); 2] {
        // (total length, count) of completed runs per state
        let mut acc = [(0, 0); 2];
        let mut start = 0;
        for t in 1..states.len() {
            if states[t] != states[t - 1] {
                if start > 0 {
                    let s = usize::from(states[t - 1]);
                    acc[s].0 += t - start;
                    acc[s].1 += 1;
                }
                start = t;
            }
        }
        acc
    }

    #[test]
    fn ar1_noise_variance_matches_reported_power() {
        let p = Ar1Params::new(0.99).unwrap();
        assert!((p.noise_variance() - 0.0199).abs() < 1e-12);
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(Ar1Params::new(1.0).is_err());
        assert!(Ar1Params::new(0.0).is_err());
        assert!(MarkovAr1Params::new(0.5, 1.2, 0.1, 0.1).is_err());
        assert!(MarkovAr1Params::new(0.5, 0.7, 0.0, 0.1).is_err());
        assert!(BinaryHmmParams::new(0.1, 1.0).is_err());
        let p = Ar1Params::new(0.5).unwrap();
        assert!(gen_ar1(&p, 0, 1).is_err());
    }

    #[test]
    fn length_one_is_a_single_draw() {
        let p = Ar1Params::new(0.3).unwrap();
        let tr = gen_ar1(&p, 1, 17).unwrap();
        assert_eq!(tr.values.len(), 1);
        assert!(tr.hidden_states.is_empty());
        let mut rng = SignalRng::from_seed(17);
        assert_eq!(tr.values[0].to_bits(), rng.standard_normal().to_bits());
    }

    #[test]
    fn ar1_lag1_autocorrelation() {
        let p = Ar1Params::new(0.9).unwrap();
        let tr = gen_ar1(&p, 1_000_000, 5).unwrap();
        let r1 = lag_autocorr(&tr.values, 1);
        assert!((r1 - 0.9).abs() < 0.01, "r1 = {r1}");
        let var = tr.values.iter().map(|v| v * v).sum::<f64>() / tr.len() as f64;
        assert!((var - 1.0).abs() < 0.02, "var = {var}");
        assert!(tr.values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn markov_ar1_figure_parameters_generate() {
        let p = MarkovAr1Params::symmetric(0.01, 0.99, 0.001).unwrap();
        let tr = gen_markov_ar1(&p, 10_000, 1).unwrap();
        assert_eq!(tr.values.len(), tr.hidden_states.len());
        assert!(tr.hidden_states.iter().all(|&s| s <= 1));
    }

    #[test]
    fn markov_sojourn_means() {
        let p = MarkovAr1Params::symmetric(0.5, 0.9, 0.1).unwrap();
        let tr = gen_markov_ar1(&p, 1_000_000, 11).unwrap();
        let runs = sojourn_lengths(&tr.hidden_states);
        for (total, count) in runs {
            let mean = total as f64 / count as f64;
            assert!((mean - 10.0).abs() < 0.5, "mean sojourn {mean}");
        }
        let frac0 = tr.hidden_states.iter().filter(|&&s| s == 0).count() as f64 / tr.len() as f64;
        assert!((frac0 - 0.5).abs() < 0.01, "frac0 {frac0}");
    }

    #[test]
    fn equal_alphas_behave_as_ar1() {
        let p = MarkovAr1Params::symmetric(0.8, 0.8, 0.05).unwrap();
        let tr = gen_markov_ar1(&p, 500_000, 2).unwrap();
        for k in 1..=4 {
            let r = lag_autocorr(&tr.values, k);
            assert!((r - 0.8f64.powi(k as i32)).abs() < 0.01, "lag {k}: {r}");
        }
    }

    #[test]
    fn binary_hmm_stationary_fraction() {
        let p = BinaryHmmParams::new(0.1, 0.01).unwrap();
        let tr = gen_binary_hmm(&p, 1_000_000, 9).unwrap();
        assert!(tr.is_binary());
        assert!(tr
            .values
            .iter()
            .zip(&tr.hidden_states)
            .all(|(&v, &s)| v == f64::from(s)));
        let frac1 = tr.values.iter().sum::<f64>() / tr.len() as f64;
        let expected = 0.1 / 0.11;
        assert!((frac1 - expected).abs() < 0.05 * expected, "frac1 {frac1}");
    }

    #[test]
    fn binary_hmm_transition_rate() {
        let p = BinaryHmmParams::new(0.05, 0.05).unwrap();
        let tr = gen_binary_hmm(&p, 400_000, 4).unwrap();
        let switches = tr.hidden_states.windows(2).filter(|w| w[0] != w[1]).count();
        let rate = switches as f64 / (tr.len() - 1) as f64;
        assert!((rate - 0.05).abs() < 0.002, "rate {rate}");
    }

    #[test]
    fn regeneration_is_bit_identical() {
        let p = MarkovAr1Params::new(0.2, 0.95, 0.01, 0.02).unwrap();
        let a = gen_markov_ar1(&p, 5_000, 77).unwrap();
        let b = gen_markov_ar1(&p, 5_000, 77).unwrap();
        assert_eq!(a, b);
        let c = gen_markov_ar1(&p, 5_000, 78).unwrap();
        assert_ne!(a.values, c.values);
    }
}
