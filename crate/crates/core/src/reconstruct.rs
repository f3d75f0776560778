//! Full-trace reconstruction from a sample set, and distortion accounting.
//!
//! Every method reproduces the sample values at the sample times. Between
//! samples:
//!
//! * GLP predicts causally from the `m` most recent samples at or before the
//!   previous sample time;
//! * CLC extrapolates the line through the two most recent samples;
//! * NCLC interpolates between the two bracketing samples.

use alloc::vec::Vec;

use crate::error::{Result, TansError};
use crate::greedy::estimate_theta;
use crate::prediction::{acf_estimate_window, AutocorrFn, GlpPredictor, SamplingState};
use crate::sampling::SampleSet;
use crate::signals::{MarkovAr1Params, Regime};

/// Autocorrelation used by GLP reconstruction for each gap.
#[derive(Debug, Clone)]
pub enum AcfMode<'a> {
    /// A fixed model.
    Model(AutocorrFn),
    /// Window estimate over the samples in `[t_i - window + 1, t_i]`. Gaps
    /// where the estimate is unusable (no `r(0)`, or no solvable system)
    /// hold the last sample value.
    Estimated { window: usize, max_lag: usize },
    /// Per-regime AR(1) model for the regime estimated from the state; a
    /// single-sample state, or a suspected transition, is treated as white.
    Conditional(MarkovAr1Params),
    /// Per-regime AR(1) model for the true regime at the previous sample.
    KnownRegime {
        params: MarkovAr1Params,
        hidden: &'a [Regime],
    },
}

impl AcfMode<'_> {
    fn acf_for(&self, samples: &[(usize, f64)], state: &SamplingState) -> Result<Option<AutocorrFn>> {
        Ok(Some(match self {
            AcfMode::Model(acf) => acf.clone(),
            AcfMode::Estimated { window, max_lag } => {
                let end = samples.partition_point(|s| s.0 <= state.last().0);
                let table = acf_estimate_window(&samples[..end], *window, *max_lag)?;
                let acf = AutocorrFn::Estimated(table);
                if acf.power().is_err() {
                    return Ok(None);
                }
                acf
            }
            AcfMode::Conditional(params) => {
                if state.len() < 2 {
                    AutocorrFn::White { power: 1.0 }
                } else {
                    AutocorrFn::conditional(params, &estimate_theta(state, params)?)
                }
            }
            AcfMode::KnownRegime { params, hidden } => {
                let t = state.last().0;
                let regime = *hidden.get(t).ok_or(TansError::LengthMismatch {
                    expected: t + 1,
                    actual: hidden.len(),
                })?;
                AutocorrFn::Ar1 {
                    alpha: params.alpha(regime),
                }
            }
        }))
    }
}

fn check_samples(samples: &[(usize, f64)], len: usize, min: usize) -> Result<()> {
    if samples.len() < min {
        return Err(TansError::precondition(alloc::format!(
            "reconstruction needs at least {min} samples, got {}",
            samples.len()
        )));
    }
    if samples.windows(2).any(|w| w[1].0 <= w[0].0) || samples[samples.len() - 1].0 >= len {
        return Err(TansError::precondition(
            "sample times must be strictly increasing and inside the reconstruction axis",
        ));
    }
    Ok(())
}

/// Causal GLP reconstruction over `0..len`. Indices before the first sample
/// are predicted as the zero mean.
pub fn reconstruct_glp(set: &SampleSet, m: usize, mode: &AcfMode<'_>, len: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(TansError::param("m", 0.0, "at least 1"));
    }
    let samples = &set.samples;
    check_samples(samples, len, 1)?;
    let mut out = alloc::vec![0.0; len];
    for (i, &(t_i, x_i)) in samples.iter().enumerate() {
        out[t_i] = x_i;
        let gap_end = samples.get(i + 1).map_or(len, |s| s.0);
        if gap_end <= t_i + 1 {
            continue;
        }
        let state = SamplingState::from_slice(&samples[(i + 1).saturating_sub(m)..=i])?;
        let hold = |out: &mut [f64]| out[t_i + 1..gap_end].iter_mut().for_each(|v| *v = x_i);
        let Some(acf) = mode.acf_for(samples, &state)? else {
            hold(&mut out);
            continue;
        };
        // an estimated table need not be positive semidefinite; if it fails
        // anywhere in the gap, hold the last sample over the whole gap
        let filled = GlpPredictor::new(&state, &acf).and_then(|pred| {
            (t_i + 1..gap_end)
                .map(|t| pred.predict(t - t_i).map(|p| p.0))
                .collect::<Result<Vec<f64>>>()
        });
        match filled {
            Ok(v) => out[t_i + 1..gap_end].copy_from_slice(&v),
            Err(_) if matches!(mode, AcfMode::Estimated { .. }) => hold(&mut out),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Causal line-connecting: two-point linear extrapolation from the two most
/// recent samples; the first value is held until the second sample.
pub fn reconstruct_clc(set: &SampleSet, len: usize) -> Result<Vec<f64>> {
    let s = &set.samples;
    check_samples(s, len, 2)?;
    let mut out = alloc::vec![s[0].1; len];
    for i in 0..s.len() {
        let (t_i, x_i) = s[i];
        out[t_i] = x_i;
        let gap_end = s.get(i + 1).map_or(len, |n| n.0);
        if i == 0 {
            for v in &mut out[t_i + 1..gap_end] {
                *v = x_i;
            }
            continue;
        }
        let (t_p, x_p) = s[i - 1];
        let slope = (x_i - x_p) / (t_i - t_p) as f64;
        for t in t_i + 1..gap_end {
            out[t] = x_i + slope * (t - t_i) as f64;
        }
    }
    Ok(out)
}

/// Non-causal line-connecting: linear interpolation between bracketing
/// samples; values are held outside the first and last sample.
pub fn reconstruct_nclc(set: &SampleSet, len: usize) -> Result<Vec<f64>> {
    let s = &set.samples;
    check_samples(s, len, 2)?;
    let mut out = alloc::vec![s[0].1; len];
    for w in s.windows(2) {
        let ((t0, x0), (t1, x1)) = (w[0], w[1]);
        let span = (t1 - t0) as f64;
        for t in t0..t1 {
            let u = (t - t0) as f64 / span;
            out[t] = x0 + u * (x1 - x0);
        }
    }
    let (t_last, x_last) = s[s.len() - 1];
    for v in &mut out[t_last..] {
        *v = x_last;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    /// Squared error.
    Mse,
    /// 0/1 mismatch; the truth must be binary.
    Hamming,
}

/// Index set over which distortion is averaged: `(start, end]`, optionally
/// without the sample times.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalScope {
    /// Exclusive lower end (the last initialization sample).
    pub after: usize,
    /// Inclusive upper end.
    pub through: usize,
    pub exclude_sample_times: bool,
}

impl EvalScope {
    /// Everything after the initialization up to the last sample.
    pub fn of(set: &SampleSet, exclude_sample_times: bool) -> Self {
        Self {
            after: set.init_end(),
            through: set.last_time(),
            exclude_sample_times,
        }
    }
}

/// Sum and count of per-index distortion.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DistortionTotal {
    pub sum: f64,
    pub count: usize,
}

impl DistortionTotal {
    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }
}

pub fn distortion_total(
    truth: &[f64],
    recon: &[f64],
    measure: Measure,
    scope: &EvalScope,
    set: &SampleSet,
) -> Result<DistortionTotal> {
    if truth.len() != recon.len() {
        return Err(TansError::LengthMismatch {
            expected: truth.len(),
            actual: recon.len(),
        });
    }
    if scope.through >= truth.len() || scope.after > scope.through {
        return Err(TansError::precondition("evaluation scope lies outside the trace"));
    }
    let mut next_sample = set.samples.partition_point(|s| s.0 <= scope.after);
    let mut total = DistortionTotal::default();
    for t in scope.after + 1..=scope.through {
        let is_sample = next_sample < set.samples.len() && set.samples[next_sample].0 == t;
        if is_sample {
            next_sample += 1;
            if scope.exclude_sample_times {
                continue;
            }
        }
        let d = match measure {
            Measure::Mse => {
                let e = truth[t] - recon[t];
                e * e
            }
            Measure::Hamming => {
                if truth[t] != 0.0 && truth[t] != 1.0 {
                    return Err(TansError::MeasureMismatch { t, value: truth[t] });
                }
                if truth[t] == recon[t] {
                    0.0
                } else {
                    1.0
                }
            }
        };
        total.sum += d;
        total.count += 1;
    }
    Ok(total)
}

/// Mean distortion over the scope.
pub fn distortion(truth: &[f64], recon: &[f64], measure: Measure, scope: &EvalScope, set: &SampleSet) -> Result<f64> {
    Ok(distortion_total(truth, recon, measure, scope, set)?.mean())
}
