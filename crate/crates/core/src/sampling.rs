//! Sampling functions and the encoder/decoder folds.
//!
//! A sampling function maps the current sampling state to the next
//! increment. The encoder ([`run_sampler`]) folds it over a signal; the
//! decoder ([`replay_times`]) folds the same function over the received
//! sample values and the initialization times and recovers every sampling
//! time without time stamps.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

use crate::dp::{AdpConfig, AdpSampler, PolicyTable};
use crate::error::{Result, TansError};
use crate::greedy::{ar1_greedy_increment, CostParams, GreedyMarkov, StateEstimate};
use crate::num::round_half_up;
use crate::prediction::SamplingState;
use crate::signals::{MarkovAr1Params, Regime};

pub trait SamplingFunction {
    /// Number of most recent samples in the state (`m`).
    fn order(&self) -> usize;

    /// Increment after `state`; at least 1.
    fn increment(&mut self, state: &SamplingState) -> Result<usize>;

    /// Regime estimate made by the last call to [`increment`], if any.
    ///
    /// [`increment`]: SamplingFunction::increment
    fn estimate(&self) -> Option<StateEstimate> {
        None
    }

    fn label(&self) -> String;
}

/// `f ≡ T`.
#[derive(Debug, Clone)]
pub struct ConstantIncrement {
    pub increment: usize,
    pub order: usize,
}

impl ConstantIncrement {
    pub fn new(increment: usize) -> Result<Self> {
        if increment == 0 {
            return Err(TansError::param("increment", 0.0, "at least 1"));
        }
        Ok(Self { increment, order: 1 })
    }
}

impl SamplingFunction for ConstantIncrement {
    fn order(&self) -> usize {
        self.order
    }

    fn increment(&mut self, _: &SamplingState) -> Result<usize> {
        Ok(self.increment)
    }

    fn label(&self) -> String {
        format!("uniform(T={})", self.increment)
    }
}

/// Uniform sampling at a non-integer period `1 / R`: after the sample at
/// time 0, the `k`-th sample is at `round_half_up(k / R)`, so the long-run
/// rate is exactly `R`.
#[derive(Debug, Clone)]
pub struct ModifiedUniform {
    period: f64,
    rate: f64,
}

impl ModifiedUniform {
    pub fn new(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(TansError::param("rate", rate, "a sampling rate in (0, 1]"));
        }
        Ok(Self {
            period: 1.0 / rate,
            rate,
        })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    fn time_of(&self, k: u64) -> usize {
        round_half_up(k as f64 * self.period) as usize
    }
}

impl SamplingFunction for ModifiedUniform {
    fn order(&self) -> usize {
        1
    }

    fn increment(&mut self, state: &SamplingState) -> Result<usize> {
        let last = state.last().0;
        // first schedule index whose rounded time lies beyond `last`
        let mut k = libm::floor(last as f64 / self.period) as u64;
        while self.time_of(k) <= last {
            k += 1;
        }
        Ok(self.time_of(k) - last)
    }

    fn label(&self) -> String {
        format!("uniform(R={})", self.rate)
    }
}

/// Optimal greedy sampler of an AR(1) signal: the constant `T*`.
#[derive(Debug, Clone)]
pub struct GreedyAr1 {
    t_star: usize,
}

impl GreedyAr1 {
    pub fn new(alpha: f64, cost: &CostParams) -> Result<Self> {
        Ok(Self {
            t_star: ar1_greedy_increment(alpha, cost)?,
        })
    }

    pub fn t_star(&self) -> usize {
        self.t_star
    }
}

impl SamplingFunction for GreedyAr1 {
    fn order(&self) -> usize {
        1
    }

    fn increment(&mut self, _: &SamplingState) -> Result<usize> {
        Ok(self.t_star)
    }

    fn label(&self) -> String {
        String::from("greedy_ar1")
    }
}

/// Greedy Markovian sampler driven by the regime estimator over the `m`
/// most recent samples.
#[derive(Debug, Clone)]
pub struct GreedyMarkovSampler {
    inner: GreedyMarkov,
    order: usize,
    last: Option<StateEstimate>,
}

impl GreedyMarkovSampler {
    pub fn new(params: MarkovAr1Params, cost: CostParams, order: usize) -> Result<Self> {
        if order < 2 {
            return Err(TansError::param(
                "m",
                order as f64,
                "at least 2 samples for regime estimation",
            ));
        }
        Ok(Self {
            inner: GreedyMarkov::new(params, cost),
            order,
            last: None,
        })
    }
}

impl SamplingFunction for GreedyMarkovSampler {
    fn order(&self) -> usize {
        self.order
    }

    fn increment(&mut self, state: &SamplingState) -> Result<usize> {
        let (t, est) = self.inner.step(state)?;
        self.last = Some(est);
        Ok(t)
    }

    fn estimate(&self) -> Option<StateEstimate> {
        self.last
    }

    fn label(&self) -> String {
        String::from("greedy_markov")
    }
}

/// Greedy Markovian sampler told the true regime at each sampling time.
#[derive(Debug, Clone)]
pub struct GenieGreedy<'a> {
    inner: GreedyMarkov,
    hidden: &'a [Regime],
    last: Option<StateEstimate>,
}

impl<'a> GenieGreedy<'a> {
    pub fn new(params: MarkovAr1Params, cost: CostParams, hidden: &'a [Regime]) -> Result<Self> {
        if hidden.is_empty() {
            return Err(TansError::precondition(
                "genie-aided sampling needs the hidden regime sequence",
            ));
        }
        Ok(Self {
            inner: GreedyMarkov::new(params, cost),
            hidden,
            last: None,
        })
    }
}

impl SamplingFunction for GenieGreedy<'_> {
    fn order(&self) -> usize {
        1
    }

    fn increment(&mut self, state: &SamplingState) -> Result<usize> {
        let t = state.last().0;
        let regime = *self.hidden.get(t).ok_or(TansError::LengthMismatch {
            expected: t + 1,
            actual: self.hidden.len(),
        })?;
        let est = StateEstimate::genie(regime);
        self.last = Some(est);
        Ok(self.inner.increment_for(&est))
    }

    fn estimate(&self) -> Option<StateEstimate> {
        self.last
    }

    fn label(&self) -> String {
        String::from("genie_greedy")
    }
}

/// Source-coding policy: the increment depends on the last binary value.
#[derive(Debug, Clone)]
pub struct DpSampler {
    policy: PolicyTable,
}

impl DpSampler {
    pub fn new(policy: PolicyTable) -> Self {
        Self { policy }
    }

    pub fn policy(&self) -> &PolicyTable {
        &self.policy
    }
}

impl SamplingFunction for DpSampler {
    fn order(&self) -> usize {
        1
    }

    fn increment(&mut self, state: &SamplingState) -> Result<usize> {
        let (t, x) = state.last();
        if x != 0.0 && x != 1.0 {
            return Err(TansError::MeasureMismatch { t, value: x });
        }
        Ok(self.policy.increment_for(x))
    }

    fn label(&self) -> String {
        String::from("dp_source_coding")
    }
}

#[derive(Debug, Clone)]
pub struct AdpMarkovSampler {
    inner: AdpSampler,
    order: usize,
    last: Option<StateEstimate>,
}

impl AdpMarkovSampler {
    pub fn new(params: MarkovAr1Params, cost: CostParams, cfg: AdpConfig, order: usize) -> Result<Self> {
        if order < 2 {
            return Err(TansError::param(
                "m",
                order as f64,
                "at least 2 samples for regime estimation",
            ));
        }
        Ok(Self {
            inner: AdpSampler::new(params, cost, cfg)?,
            order,
            last: None,
        })
    }
}

impl SamplingFunction for AdpMarkovSampler {
    fn order(&self) -> usize {
        self.order
    }

    fn increment(&mut self, state: &SamplingState) -> Result<usize> {
        let (t, est) = self.inner.step(state)?;
        self.last = Some(est);
        Ok(t)
    }

    fn estimate(&self) -> Option<StateEstimate> {
        self.last
    }

    fn label(&self) -> String {
        let c = self.inner.config();
        format!("adp_markov(beta={},gamma={})", c.beta, c.gamma_quality)
    }
}

/// Samples taken by one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    /// `(time, value)`, strictly increasing times.
    pub samples: Vec<(usize, f64)>,
    /// The first `init_count` samples are the initialization.
    pub init_count: usize,
    /// `increments[k] = t_{init+k} - t_{init+k-1}`.
    pub increments: Vec<usize>,
    /// Regime estimate behind each increment, when the sampler makes one.
    pub estimates: Vec<Option<StateEstimate>>,
    pub sampler: String,
    pub seed: u64,
}

impl SampleSet {
    pub fn times(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.1).collect()
    }

    pub fn last_time(&self) -> usize {
        self.samples[self.samples.len() - 1].0
    }

    /// Time of the last initialization sample.
    pub fn init_end(&self) -> usize {
        self.samples[self.init_count - 1].0
    }

    /// Time units after the initialization: `t_last - t_{init}`.
    pub fn horizon(&self) -> usize {
        self.last_time() - self.init_end()
    }

    /// Post-initialization samples per time unit; 0 for an empty horizon.
    pub fn rate(&self) -> f64 {
        let h = self.horizon();
        if h == 0 {
            0.0
        } else {
            (self.samples.len() - self.init_count) as f64 / h as f64
        }
    }
}

fn state_of(samples: &[(usize, f64)], m: usize) -> Result<SamplingState> {
    let k = samples.len().min(m);
    SamplingState::from_slice(&samples[samples.len() - k..])
}

/// Encoder: `m` consecutive initialization samples at the head of the
/// signal, then `t_{i+1} = t_i + f(S_{t_i})` until the signal ends.
pub fn run_sampler(values: &[f64], f: &mut dyn SamplingFunction, seed: u64) -> Result<SampleSet> {
    let m = f.order();
    if m == 0 {
        return Err(TansError::precondition("sampling function order must be at least 1"));
    }
    if values.len() <= m {
        return Err(TansError::precondition(format!(
            "signal of length {} is too short for {m} initialization samples",
            values.len()
        )));
    }
    let mut samples: Vec<(usize, f64)> = (0..m).map(|t| (t, values[t])).collect();
    let mut increments = vec![];
    let mut estimates = vec![];
    loop {
        let state = state_of(&samples, m)?;
        let t = f.increment(&state)?;
        if t == 0 {
            return Err(TansError::precondition("sampling function returned a zero increment"));
        }
        let next = state.last().0 + t;
        if next >= values.len() {
            break;
        }
        samples.push((next, values[next]));
        increments.push(t);
        estimates.push(f.estimate());
    }
    Ok(SampleSet {
        samples,
        init_count: m,
        increments,
        estimates,
        sampler: f.label(),
        seed,
    })
}

/// Decoder: recover all sampling times from the ordered sample values and
/// the initialization times alone.
pub fn replay_times(sample_values: &[f64], init_times: &[usize], f: &mut dyn SamplingFunction) -> Result<Vec<usize>> {
    let m = init_times.len();
    if m != f.order() {
        return Err(TansError::LengthMismatch {
            expected: f.order(),
            actual: m,
        });
    }
    if sample_values.len() < m {
        return Err(TansError::LengthMismatch {
            expected: m,
            actual: sample_values.len(),
        });
    }
    let mut samples: Vec<(usize, f64)> = init_times.iter().copied().zip(sample_values.iter().copied()).collect();
    for &x in &sample_values[m..] {
        let state = state_of(&samples, m)?;
        let next = state.last().0 + f.increment(&state)?;
        samples.push((next, x));
    }
    Ok(samples.into_iter().map(|s| s.0).collect())
}
