//! One-step approximate-DP sampler for Markov-switching AR(1) signals.
//!
//! For each candidate increment `T` the sampler predicts the value at
//! `t_i + T`, forms the predicted next state `Ŝ` (append, drop the oldest)
//! and scores it by the quality `q(Ŝ) = γ T_greedy(Ŝ)`: states that allow a
//! long greedy step are cheap to be in. The increment minimizes
//! `c(S, T) + β q(Ŝ)`; [`QualitySign::Reward`] subtracts the quality instead.

use crate::error::{Result, TansError};
use crate::greedy::{CostParams, GreedyMarkov, StateEstimate};
use crate::num::argmin_increment;
use crate::prediction::{AutocorrFn, GlpPredictor, SamplingState};
use crate::rng::{mix_seed, SignalRng};
use crate::signals::MarkovAr1Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QualitySign {
    /// Minimize `c + β q`.
    Literal,
    /// Minimize `c - β q`.
    Reward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QualityMode {
    /// Quality of the state built from the predicted value.
    MostProbable,
    /// Mean quality over `draws` values from `N(x̂, σ²_e)`. Draws are seeded
    /// from `(seed, t_i, T)` so the decoder can repeat them.
    MonteCarlo { draws: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdpConfig {
    /// Discount `β` in `[0, 1)`.
    pub beta: f64,
    /// Quality scale `γ ≥ 0`.
    pub gamma_quality: f64,
    pub sign: QualitySign,
    pub mode: QualityMode,
}

impl AdpConfig {
    pub fn new(beta: f64, gamma_quality: f64) -> Result<Self> {
        let cfg = Self {
            beta,
            gamma_quality,
            sign: QualitySign::Literal,
            mode: QualityMode::MostProbable,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta < 1.0) {
            return Err(TansError::param("beta", self.beta, "a discount factor in [0, 1)"));
        }
        if !(self.gamma_quality >= 0.0 && self.gamma_quality.is_finite()) {
            return Err(TansError::param(
                "gamma_quality",
                self.gamma_quality,
                "a finite value >= 0",
            ));
        }
        if let QualityMode::MonteCarlo { draws: 0, .. } = self.mode {
            return Err(TansError::param("draws", 0.0, "at least one draw"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct AdpSampler {
    greedy: GreedyMarkov,
    cfg: AdpConfig,
}

impl AdpSampler {
    pub fn new(params: MarkovAr1Params, cost: CostParams, cfg: AdpConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            greedy: GreedyMarkov::new(params, cost),
            cfg,
        })
    }

    pub fn config(&self) -> &AdpConfig {
        &self.cfg
    }

    fn greedy_quality(&self, state: &SamplingState) -> Result<f64> {
        let (t, _) = self.greedy.step(state)?;
        Ok(self.cfg.gamma_quality * t as f64)
    }

    fn quality(&self, state: &SamplingState, pred: &GlpPredictor<'_>, t: usize) -> Result<f64> {
        let next_time = state.last().0 + t;
        let (x_hat, var) = pred.predict(t)?;
        match self.cfg.mode {
            QualityMode::MostProbable => self.greedy_quality(&state.shifted(next_time, x_hat)?),
            QualityMode::MonteCarlo { draws, seed } => {
                let mut rng = SignalRng::from_seed(mix_seed(seed, mix_seed(state.last().0 as u64, t as u64)));
                let sd = libm::sqrt(var);
                let mut total = 0.0;
                for _ in 0..draws {
                    let x = rng.normal(x_hat, sd);
                    total += self.greedy_quality(&state.shifted(next_time, x)?)?;
                }
                Ok(total / draws as f64)
            }
        }
    }

    /// Regime estimate and the ADP increment for `state`.
    pub fn step(&self, state: &SamplingState) -> Result<(usize, StateEstimate)> {
        let (greedy_t, est) = self.greedy.step(state)?;
        if self.cfg.beta == 0.0 || self.cfg.gamma_quality == 0.0 {
            return Ok((greedy_t, est));
        }
        let acf = AutocorrFn::conditional(self.greedy.params(), &est);
        let pred = GlpPredictor::new(state, &acf)?;
        let t_up = self.greedy.cost().t_up;
        let mut scores = alloc::vec::Vec::with_capacity(t_up + 1);
        scores.push(f64::INFINITY);
        for t in 1..=t_up {
            let q = self.quality(state, &pred, t)?;
            let signed = match self.cfg.sign {
                QualitySign::Reward => -q,
                QualitySign::Literal => q,
            };
            scores.push(self.greedy.cost_of(&est, t) + self.cfg.beta * signed);
        }
        Ok((argmin_increment(t_up, |t| scores[t]), est))
    }
}

/// One ADP step.
pub fn adp_step(state: &SamplingState, params: &MarkovAr1Params, cost: &CostParams, cfg: &AdpConfig) -> Result<usize> {
    Ok(AdpSampler::new(*params, *cost, *cfg)?.step(state)?.0)
}
