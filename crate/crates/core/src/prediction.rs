//! Autocorrelation models and estimators, and the generalized linear
//! predictor (GLP): the MMSE linear predictor of `X(t_i + T)` from `m`
//! nonuniformly spaced past samples.
//!
//! With lags `τ_k = t - t_{i-k}` the optimal weights solve the normal
//! equations `R w = p`, `R[i][j] = r(τ_i - τ_j)`, `p[k] = r(τ_k)`, and the
//! error variance is `r(0) - pᵀw`. `R` depends only on the spacing of the
//! samples, so [`GlpPredictor`] factors it once per state and reuses the
//! factor for every horizon.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Result, TansError};
use crate::greedy::{RegimeClass, StateEstimate};
use crate::linalg::{Cholesky, Lu};
use crate::num::powi;
use crate::signals::MarkovAr1Params;

/// Condition estimate above which the normal equations are diagonally loaded.
pub const CONDITION_LIMIT: f64 = 1e12;
/// Diagonal loading, relative to `r(0)`.
pub const DIAGONAL_LOADING: f64 = 1e-10;
/// Largest roundoff excursion of the error variance outside `[0, r(0)]`
/// (relative to `r(0)`) that is silently clamped.
pub const VARIANCE_CLAMP_TOL: f64 = 1e-8;

/// The `m` most recent `(time, value)` pairs, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingState {
    entries: Vec<(usize, f64)>,
}

impl SamplingState {
    pub fn new(entries: Vec<(usize, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(TansError::precondition("sampling state needs at least one sample"));
        }
        if entries.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(TansError::precondition(
                "sampling state times must be strictly increasing",
            ));
        }
        Ok(Self { entries })
    }

    pub fn from_slice(entries: &[(usize, f64)]) -> Result<Self> {
        Self::new(entries.to_vec())
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Most recent sample.
    pub fn last(&self) -> (usize, f64) {
        self.entries[self.entries.len() - 1]
    }

    /// Appends `(time, value)` and drops the oldest entry, keeping the order.
    pub fn shifted(&self, time: usize, value: f64) -> Result<Self> {
        if time <= self.last().0 {
            return Err(TansError::precondition(format!(
                "new sample time {time} must follow {}",
                self.last().0
            )));
        }
        let mut entries = Vec::with_capacity(self.entries.len());
        entries.extend_from_slice(&self.entries[1..]);
        entries.push((time, value));
        Ok(Self { entries })
    }
}

/// Autocorrelation estimates indexed by lag; `None` marks lags with no
/// observed product.
#[derive(Debug, Clone, PartialEq)]
pub struct AcfTable {
    lags: Vec<Option<f64>>,
}

impl AcfTable {
    pub fn new(lags: Vec<Option<f64>>) -> Self {
        Self { lags }
    }

    /// Table holding `r(0..=max_lag)`, all unavailable.
    pub fn empty(max_lag: usize) -> Self {
        Self {
            lags: vec![None; max_lag + 1],
        }
    }

    pub fn get(&self, lag: usize) -> Option<f64> {
        self.lags.get(lag).copied().flatten()
    }

    pub fn max_lag(&self) -> usize {
        self.lags.len().saturating_sub(1)
    }

    pub fn as_slice(&self) -> &[Option<f64>] {
        &self.lags
    }
}

/// Autocorrelation `r(k) = E[X(t) X(t-k)]` of a real, zero-mean signal.
#[derive(Debug, Clone, PartialEq)]
pub enum AutocorrFn {
    /// Unit-power AR(1): `r(k) = α^|k|`. Also the per-regime model of the
    /// Markovian signal once its regime has been estimated.
    Ar1 { alpha: f64 },
    /// Uncorrelated: `r(0) = power`, zero elsewhere.
    White { power: f64 },
    /// Empirical estimates. Unavailable lags, and lags beyond the table,
    /// are read as zero correlation; `r(0)` must be present.
    Estimated(AcfTable),
}

impl AutocorrFn {
    /// Per-regime model given a regime estimate. An in-interval transition
    /// leaves no usable correlation, so it maps to white unit power.
    pub fn conditional(params: &MarkovAr1Params, estimate: &StateEstimate) -> Self {
        match estimate.theta_hat {
            RegimeClass::Zero => AutocorrFn::Ar1 { alpha: params.alpha(0) },
            RegimeClass::One => AutocorrFn::Ar1 { alpha: params.alpha(1) },
            RegimeClass::Transition => AutocorrFn::White { power: 1.0 },
        }
    }

    pub fn value(&self, lag: usize) -> f64 {
        match self {
            AutocorrFn::Ar1 { alpha } => powi(*alpha, lag as u64),
            AutocorrFn::White { power } => {
                if lag == 0 {
                    *power
                } else {
                    0.0
                }
            }
            AutocorrFn::Estimated(table) => table.get(lag).unwrap_or(0.0),
        }
    }

    /// `r(0)`, validated positive.
    pub fn power(&self) -> Result<f64> {
        let r0 = match self {
            AutocorrFn::Estimated(table) => table
                .get(0)
                .ok_or_else(|| TansError::precondition("estimated autocorrelation lacks r(0)"))?,
            other => other.value(0),
        };
        if r0 > 0.0 && r0.is_finite() {
            Ok(r0)
        } else {
            Err(TansError::param("r(0)", r0, "a positive finite signal power"))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlpSolution {
    /// `weights[k]` multiplies `X(t_{i-k})`; index 0 is the most recent sample.
    pub weights: Vec<f64>,
    /// `lags[k] = t - t_{i-k}`.
    pub lags: Vec<usize>,
    pub err_variance: f64,
    /// Set when the normal equations needed diagonal loading.
    pub regularized: bool,
}

#[derive(Debug, Clone)]
enum Factor {
    Cholesky(Cholesky),
    Lu(Lu),
}

/// Normal-equation factor for one sampling state, reusable across horizons.
#[derive(Debug, Clone)]
pub struct GlpPredictor<'a> {
    acf: &'a AutocorrFn,
    last_time: usize,
    /// `t_i - t_{i-k}` for each k, most recent first.
    offsets: Vec<usize>,
    values: Vec<f64>,
    factor: Factor,
    regularized: bool,
    power: f64,
}

impl<'a> GlpPredictor<'a> {
    pub fn new(state: &SamplingState, acf: &'a AutocorrFn) -> Result<Self> {
        let power = acf.power()?;
        let m = state.len();
        let last_time = state.last().0;
        let (offsets, values): (Vec<usize>, Vec<f64>) =
            state.entries().iter().rev().map(|&(t, x)| (last_time - t, x)).unzip();

        let mut r = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                r[i * m + j] = acf.value(offsets[i].abs_diff(offsets[j]));
            }
        }

        if let Some(ch) = Cholesky::factor(&r, m) {
            if ch.condition_estimate() <= CONDITION_LIMIT {
                return Ok(Self {
                    acf,
                    last_time,
                    offsets,
                    values,
                    factor: Factor::Cholesky(ch),
                    regularized: false,
                    power,
                });
            }
        }

        let loading = DIAGONAL_LOADING * power;
        for i in 0..m {
            r[i * m + i] += loading;
        }
        let factor = match Cholesky::factor(&r, m) {
            Some(ch) => Factor::Cholesky(ch),
            None => Factor::Lu(Lu::factor(&r, m).ok_or(TansError::SingularSystem { dim: m })?),
        };
        Ok(Self {
            acf,
            last_time,
            offsets,
            values,
            factor,
            regularized: true,
            power,
        })
    }

    pub fn last_time(&self) -> usize {
        self.last_time
    }

    pub fn is_regularized(&self) -> bool {
        self.regularized
    }

    pub fn solve(&self, horizon: usize) -> Result<GlpSolution> {
        if horizon == 0 {
            return Err(TansError::precondition("prediction horizon must be at least 1"));
        }
        let lags: Vec<usize> = self.offsets.iter().map(|&o| o + horizon).collect();
        let p: Vec<f64> = lags.iter().map(|&l| self.acf.value(l)).collect();
        let weights = match &self.factor {
            Factor::Cholesky(ch) => ch.solve(&p),
            Factor::Lu(lu) => lu.solve(&p),
        };
        let explained: f64 = p.iter().zip(&weights).map(|(a, b)| a * b).sum();
        let err_variance = clamp_variance(self.power - explained, self.power)?;
        Ok(GlpSolution {
            weights,
            lags,
            err_variance,
            regularized: self.regularized,
        })
    }

    /// `(prediction, error variance)` at `t_i + horizon`.
    pub fn predict(&self, horizon: usize) -> Result<(f64, f64)> {
        let sol = self.solve(horizon)?;
        let x_hat = sol.weights.iter().zip(&self.values).map(|(w, x)| w * x).sum();
        Ok((x_hat, sol.err_variance))
    }
}

fn clamp_variance(v: f64, power: f64) -> Result<f64> {
    let tol = VARIANCE_CLAMP_TOL * power;
    if v < 0.0 {
        if v >= -tol {
            Ok(0.0)
        } else {
            Err(TansError::VarianceOutOfRange { value: v, power })
        }
    } else if v > power {
        if v <= power + tol {
            Ok(power)
        } else {
            Err(TansError::VarianceOutOfRange { value: v, power })
        }
    } else if v.is_nan() {
        Err(TansError::VarianceOutOfRange { value: v, power })
    } else {
        Ok(v)
    }
}

/// Optimal GLP weights and error variance for predicting `horizon` steps
/// past the most recent sample of `state`.
pub fn glp_solve(state: &SamplingState, horizon: usize, acf: &AutocorrFn) -> Result<GlpSolution> {
    if horizon == 0 {
        return Err(TansError::precondition("prediction horizon must be at least 1"));
    }
    GlpPredictor::new(state, acf)?.solve(horizon)
}

pub fn glp_predict(state: &SamplingState, horizon: usize, acf: &AutocorrFn) -> Result<(f64, f64)> {
    if horizon == 0 {
        return Err(TansError::precondition("prediction horizon must be at least 1"));
    }
    GlpPredictor::new(state, acf)?.predict(horizon)
}

/// Stochastic-approximation update `r̂(j) += γ (X(t_i) X(t_i - j) - r̂(j))`
/// for every lag `j` (including 0) that the window provides within the
/// table. Lags without a product keep their value; an unavailable entry is
/// treated as zero before its first update.
pub fn acf_update_gradient(
    table: &AcfTable,
    new_sample: (usize, f64),
    window: &[(usize, f64)],
    step: f64,
) -> Result<AcfTable> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(TansError::param("step", step, "a gradient step in (0, 1]"));
    }
    let (t_new, x_new) = new_sample;
    let mut lags = table.lags.clone();
    let mut update = |lag: usize, product: f64| {
        if let Some(slot) = lags.get_mut(lag) {
            let r = slot.unwrap_or(0.0);
            *slot = Some(r + step * (product - r));
        }
    };
    update(0, x_new * x_new);
    for &(t, x) in window {
        if t < t_new {
            update(t_new - t, x_new * x);
        }
    }
    Ok(AcfTable { lags })
}

/// Window estimate: `r̂(j)` is the mean of `X(t) X(t - j)` over all sample
/// pairs inside `[t_i - W + 1, t_i]`, where `t_i` is the latest sample time.
pub fn acf_estimate_window(samples: &[(usize, f64)], window_size: usize, max_lag: usize) -> Result<AcfTable> {
    if window_size < 2 {
        return Err(TansError::precondition(
            "autocorrelation window must span at least 2 time steps",
        ));
    }
    let Some(&(t_last, _)) = samples.last() else {
        return Ok(AcfTable::empty(max_lag));
    };
    let start = (t_last + 1).saturating_sub(window_size);
    let inside: Vec<(usize, f64)> = samples.iter().copied().filter(|&(t, _)| t >= start).collect();

    let mut sums = vec![0.0; max_lag + 1];
    let mut counts = vec![0usize; max_lag + 1];
    for (b, &(tb, xb)) in inside.iter().enumerate() {
        for &(ta, xa) in inside[..=b].iter().rev() {
            let lag = tb - ta;
            if lag > max_lag {
                break;
            }
            sums[lag] += xa * xb;
            counts[lag] += 1;
        }
    }
    let lags = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| (c > 0).then(|| s / c as f64))
        .collect();
    Ok(AcfTable { lags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::mat_vec;
    use crate::rng::SignalRng;
    use crate::signals::{gen_ar1, Ar1Params};

    fn state(entries: &[(usize, f64)]) -> SamplingState {
        SamplingState::from_slice(entries).unwrap()
    }

    fn residual(sol: &GlpSolution, acf: &AutocorrFn) -> f64 {
        let m = sol.lags.len();
        let mut r = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                r[i * m + j] = acf.value(sol.lags[i].abs_diff(sol.lags[j]));
            }
        }
        let rw = mat_vec(&r, &sol.weights, m);
        rw.iter()
            .zip(&sol.lags)
            .map(|(a, &l)| (a - acf.value(l)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn state_validation() {
        assert!(SamplingState::new(vec![]).is_err());
        assert!(SamplingState::new(vec![(3, 0.0), (3, 1.0)]).is_err());
        let s = state(&[(1, 0.1), (4, 0.2)]);
        let s2 = s.shifted(6, 0.3).unwrap();
        assert_eq!(s2.entries(), &[(4, 0.2), (6, 0.3)]);
        assert!(s.shifted(4, 0.0).is_err());
    }

    #[test]
    fn single_sample_ar1() {
        let acf = AutocorrFn::Ar1 { alpha: 0.9 };
        for t in 1..20 {
            let sol = glp_solve(&state(&[(5, 1.3)]), t, &acf).unwrap();
            assert!((sol.weights[0] - 0.9f64.powi(t as i32)).abs() < 1e-14);
            assert!((sol.err_variance - (1.0 - 0.9f64.powi(2 * t as i32))).abs() < 1e-12);
            let (x, _) = glp_predict(&state(&[(5, 1.3)]), t, &acf).unwrap();
            assert!((x - 1.3 * 0.9f64.powi(t as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn ar1_weight_concentrates_on_latest_sample() {
        let acf = AutocorrFn::Ar1 { alpha: 0.8 };
        let s = state(&[(0, 0.4), (3, -1.0), (4, 0.7)]);
        let sol = glp_solve(&s, 2, &acf).unwrap();
        assert_eq!(sol.lags, vec![2, 3, 6]);
        assert!((sol.weights[0] - 0.64).abs() < 1e-9);
        assert!(sol.weights[1].abs() < 1e-9 && sol.weights[2].abs() < 1e-9);
        assert!(residual(&sol, &acf) < 1e-9);
    }

    #[test]
    fn estimated_two_by_two() {
        let acf = AutocorrFn::Estimated(AcfTable::new(vec![Some(1.0), Some(0.5), Some(0.1)]));
        // uniform samples one step apart, horizon 1 -> lags [1, 2]
        let sol = glp_solve(&state(&[(0, 1.0), (1, 1.0)]), 1, &acf).unwrap();
        // [[1, .5], [.5, 1]] w = [.5, .1]  ->  w = [0.6, -0.2]
        assert!((sol.weights[0] - 0.6).abs() < 1e-12);
        assert!((sol.weights[1] + 0.2).abs() < 1e-12);
        assert!((sol.err_variance - (1.0 - (0.5 * 0.6 - 0.1 * 0.2))).abs() < 1e-12);
    }

    #[test]
    fn zero_state_predicts_zero_and_white_predicts_nothing() {
        let acf = AutocorrFn::Ar1 { alpha: 0.95 };
        let (x, _) = glp_predict(&state(&[(0, 0.0), (2, 0.0), (3, 0.0)]), 4, &acf).unwrap();
        assert_eq!(x, 0.0);
        let white = AutocorrFn::White { power: 2.0 };
        let (x, v) = glp_predict(&state(&[(0, 1.0), (2, -3.0)]), 1, &white).unwrap();
        assert_eq!(x, 0.0);
        assert_eq!(v, 2.0);
    }

    #[test]
    fn rejects_zero_horizon_and_missing_power() {
        let acf = AutocorrFn::Ar1 { alpha: 0.5 };
        assert!(glp_solve(&state(&[(0, 1.0)]), 0, &acf).is_err());
        let est = AutocorrFn::Estimated(AcfTable::new(vec![None, Some(0.3)]));
        assert!(glp_solve(&state(&[(0, 1.0)]), 1, &est).is_err());
    }

    #[test]
    fn near_singular_system_is_loaded_and_flagged() {
        // r(k) = 1 for every lag: R is all ones (rank one).
        let acf = AutocorrFn::Estimated(AcfTable::new(vec![Some(1.0); 10]));
        let sol = glp_solve(&state(&[(0, 1.0), (1, 1.0), (2, 1.0)]), 1, &acf).unwrap();
        assert!(sol.regularized);
        assert!(sol.err_variance >= 0.0 && sol.err_variance <= 1.0);
    }

    #[test]
    fn err_variance_nondecreasing_in_horizon() {
        let acf = AutocorrFn::Ar1 { alpha: 0.97 };
        let s = state(&[(0, 0.2), (5, -0.4), (6, 1.1), (9, 0.3)]);
        let pred = GlpPredictor::new(&s, &acf).unwrap();
        let mut prev = 0.0;
        for h in 1..60 {
            let v = pred.solve(h).unwrap().err_variance;
            assert!(v + 1e-15 >= prev);
            prev = v;
        }
    }

    #[test]
    fn gradient_update_arithmetic() {
        let table = AcfTable::new(vec![Some(1.0), Some(0.5), None]);
        let out = acf_update_gradient(&table, (10, 1.0), &[(9, 1.0)], 0.1).unwrap();
        assert!((out.get(1).unwrap() - 0.55).abs() < 1e-15);
        assert_eq!(out.get(2), None);

        let out = acf_update_gradient(&table, (10, 2.0), &[(8, -1.5), (9, 0.5)], 1.0).unwrap();
        assert_eq!(out.get(0), Some(4.0));
        assert_eq!(out.get(1), Some(1.0));
        assert_eq!(out.get(2), Some(-3.0));
        assert!(acf_update_gradient(&table, (10, 2.0), &[], 0.0).is_err());
    }

    #[test]
    fn gradient_update_converges_on_ar1() {
        // A single iterate at step 0.01 fluctuates with sd ~0.1, so the
        // check is on the iterate average over the second half.
        let p = Ar1Params::new(0.8).unwrap();
        let tr = gen_ar1(&p, 100_001, 21).unwrap();
        let mut table = AcfTable::empty(3);
        let (mut acc, mut n) = (0.0, 0);
        for t in 1..tr.len() {
            let lo = t.saturating_sub(3);
            let window: Vec<(usize, f64)> = (lo..t).map(|s| (s, tr.values[s])).collect();
            table = acf_update_gradient(&table, (t, tr.values[t]), &window, 0.01).unwrap();
            if t > tr.len() / 2 {
                acc += table.get(1).unwrap();
                n += 1;
            }
        }
        let mean = acc / n as f64;
        assert!((mean - 0.8).abs() < 0.05, "{mean}");
        assert!((table.get(1).unwrap() - 0.8).abs() < 0.5);
    }

    #[test]
    fn window_estimate_simple_cases() {
        let constant: Vec<(usize, f64)> = (0..6).map(|t| (t * 2, 1.5)).collect();
        let t = acf_estimate_window(&constant, 100, 5).unwrap();
        for lag in [0, 2, 4] {
            assert!((t.get(lag).unwrap() - 2.25).abs() < 1e-15);
        }
        assert_eq!(t.get(1), None);
        let two = acf_estimate_window(&[(3, 2.0), (4, -0.5)], 2, 1).unwrap();
        assert_eq!(two.get(1), Some(-1.0));
        assert!(acf_estimate_window(&constant, 1, 2).is_err());
    }

    #[test]
    fn window_estimate_tracks_ar1() {
        let p = Ar1Params::new(0.9).unwrap();
        let tr = gen_ar1(&p, 200_000, 8).unwrap();
        let samples: Vec<(usize, f64)> = tr.values.iter().copied().enumerate().collect();
        let table = acf_estimate_window(&samples, samples.len(), 4).unwrap();
        for j in 0..=4 {
            let expected = 0.9f64.powi(j as i32);
            assert!((table.get(j).unwrap() - expected).abs() < 0.03, "lag {j}");
        }
    }

    #[test]
    fn orthogonality_on_ar1_data() {
        let alpha = 0.9;
        let p = Ar1Params::new(alpha).unwrap();
        let acf = AutocorrFn::Ar1 { alpha };
        let tr = gen_ar1(&p, 400_000, 33).unwrap();
        let mut rng = SignalRng::from_seed(1);
        let trials = 20_000;
        let m = 4;
        let mut sums = [0.0; 4];
        let mut sq = [0.0; 4];
        let mut err_sq = 0.0;
        let mut var_sum = 0.0;
        let mut t0 = 0;
        for _ in 0..trials {
            let mut entries = Vec::new();
            let mut t = t0;
            for _ in 0..m {
                entries.push((t, tr.values[t]));
                t += 1 + (rng.uniform() * 4.0) as usize;
            }
            let s = SamplingState::new(entries.clone()).unwrap();
            let h = 1 + (rng.uniform() * 5.0) as usize;
            let target = s.last().0 + h;
            let (x_hat, v) = glp_predict(&s, h, &acf).unwrap();
            let e = tr.values[target] - x_hat;
            for k in 0..m {
                let prod = entries[m - 1 - k].1 * e;
                sums[k] += prod;
                sq[k] += prod * prod;
            }
            err_sq += e * e;
            var_sum += v;
            t0 = target + 1;
        }
        let n = trials as f64;
        for k in 0..m {
            let mean = sums[k] / n;
            let se = ((sq[k] / n - mean * mean) / n).sqrt();
            assert!(mean.abs() <= 3.0 * se, "k={k} mean={mean} se={se}");
        }
        assert!((err_sq / n - var_sum / n).abs() < 0.05 * (var_sum / n));
    }
}
