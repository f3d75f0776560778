//! Experiment orchestration: traces per seed, samplers per sweep point,
//! reconstruction and distortion, aggregated into rate-distortion points.

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use tans_core::dp::{sc_reconstruct, sc_value_iteration, AdpConfig, DpConfig, PolicyTable, QualityMode, QualitySign};
use tans_core::greedy::{ar1_greedy_increment, ar1_root, thm4_bounds, CostParams, RegimeClass, StateEstimate};
use tans_core::prediction::AutocorrFn;
use tans_core::reconstruct::{
    distortion_total, reconstruct_clc, reconstruct_glp, reconstruct_nclc, AcfMode, EvalScope, Measure,
};
use tans_core::sampling::{
    replay_times, run_sampler, AdpMarkovSampler, ConstantIncrement, DpSampler, GenieGreedy, GreedyAr1,
    GreedyMarkovSampler, ModifiedUniform, SampleSet, SamplingFunction,
};
use tans_core::signals::{gen_ar1, gen_binary_hmm, gen_markov_ar1, SignalTrace};

use crate::spec::{AcfSpec, ExperimentKind, ExperimentSpec, Model, ReconSpec, SamplerSpec, SeriesSpec, SignSpec};

pub fn generate(model: &Model, length: usize, seed: u64) -> Result<SignalTrace> {
    Ok(match model {
        Model::Ar1(p) => gen_ar1(p, length, seed)?,
        Model::MarkovAr1(p) => gen_markov_ar1(p, length, seed)?,
        Model::BinaryHmm(p) => gen_binary_hmm(p, length, seed)?,
    })
}

/// One sweep point of a series, with anything shared across seeds solved
/// up front.
#[derive(Debug, Clone)]
pub struct PreparedPoint {
    pub rho: Option<f64>,
    pub rate: Option<f64>,
    pub cost: Option<CostParams>,
    pub policy: Option<PolicyTable>,
}

pub fn prepare_points(spec: &ExperimentSpec, series: &SeriesSpec) -> Result<Vec<PreparedPoint>> {
    let model = spec.signal.model()?;
    match &series.sampler {
        SamplerSpec::Uniform { rates } => Ok(rates
            .values("sampler.rates")?
            .into_iter()
            .map(|r| PreparedPoint {
                rho: None,
                rate: Some(r),
                cost: None,
                policy: None,
            })
            .collect()),
        SamplerSpec::Constant { .. } => Ok(vec![PreparedPoint {
            rho: None,
            rate: None,
            cost: None,
            policy: None,
        }]),
        SamplerSpec::DpSourceCoding {
            beta,
            t_max,
            override_t_max,
        } => {
            let Model::BinaryHmm(p) = model else {
                bail!("sampler: dp_source_coding needs a binary_hmm signal");
            };
            let cfg = DpConfig::new(*beta, *t_max)
                .context("sampler")?
                .with_override(*override_t_max);
            spec.cost
                .rhos()?
                .into_iter()
                .map(|rho| {
                    let policy = sc_value_iteration(&p, rho, &cfg).context("sampler.t_max")?;
                    Ok(PreparedPoint {
                        rho: Some(rho),
                        rate: None,
                        cost: Some(spec.cost.params(rho)?),
                        policy: Some(policy),
                    })
                })
                .collect()
        }
        _ => spec
            .cost
            .rhos()?
            .into_iter()
            .map(|rho| {
                Ok(PreparedPoint {
                    rho: Some(rho),
                    rate: None,
                    cost: Some(spec.cost.params(rho)?),
                    policy: None,
                })
            })
            .collect(),
    }
}

pub fn build_sampler<'a>(
    model: &Model,
    sampler: &SamplerSpec,
    point: &PreparedPoint,
    trace: &'a SignalTrace,
) -> Result<Box<dyn SamplingFunction + Send + 'a>> {
    let cost = || point.cost.context("cost.rho: required by this sampler");
    let markov = || match model {
        Model::MarkovAr1(p) => Ok(*p),
        _ => bail!("sampler: needs a markov_ar1 signal"),
    };
    Ok(match sampler {
        SamplerSpec::Uniform { .. } => Box::new(ModifiedUniform::new(point.rate.context("sampler.rates")?)?),
        SamplerSpec::Constant { increment } => Box::new(ConstantIncrement::new(*increment)?),
        SamplerSpec::GreedyAr1 => {
            let Model::Ar1(p) = model else {
                bail!("sampler: greedy_ar1 needs an ar1 signal");
            };
            Box::new(GreedyAr1::new(p.alpha(), &cost()?)?)
        }
        SamplerSpec::GreedyMarkov { m } => Box::new(GreedyMarkovSampler::new(markov()?, cost()?, *m)?),
        SamplerSpec::GenieGreedy => Box::new(GenieGreedy::new(markov()?, cost()?, &trace.hidden_states)?),
        SamplerSpec::DpSourceCoding { .. } => Box::new(DpSampler::new(
            point.policy.clone().context("sampler: DP policy was not solved")?,
        )),
        SamplerSpec::AdpMarkov {
            m,
            beta,
            gamma,
            sign,
            draws,
            draw_seed,
        } => {
            let mut cfg = AdpConfig::new(*beta, *gamma).context("sampler")?;
            cfg.sign = match sign {
                SignSpec::Reward => QualitySign::Reward,
                SignSpec::Literal => QualitySign::Literal,
            };
            if let Some(draws) = draws {
                cfg.mode = QualityMode::MonteCarlo {
                    draws: *draws,
                    seed: *draw_seed,
                };
            }
            Box::new(AdpMarkovSampler::new(markov()?, cost()?, cfg, *m)?)
        }
    })
}

pub fn reconstruct(model: &Model, recon: &ReconSpec, set: &SampleSet, trace: &SignalTrace) -> Result<Vec<f64>> {
    let len = trace.len();
    Ok(match recon {
        ReconSpec::Glp {
            m,
            acf,
            window,
            max_lag,
        } => {
            let mode = match (acf, model) {
                (AcfSpec::Model, Model::Ar1(p)) => AcfMode::Model(AutocorrFn::Ar1 { alpha: p.alpha() }),
                (AcfSpec::Estimated, _) => AcfMode::Estimated {
                    window: *window,
                    max_lag: *max_lag,
                },
                (AcfSpec::Conditional, Model::MarkovAr1(p)) => AcfMode::Conditional(*p),
                (AcfSpec::KnownRegime, Model::MarkovAr1(p)) => AcfMode::KnownRegime {
                    params: *p,
                    hidden: &trace.hidden_states,
                },
                _ => bail!("reconstruction.acf: not available for this signal model"),
            };
            reconstruct_glp(set, *m, &mode, len)?
        }
        ReconSpec::Clc => reconstruct_clc(set, len)?,
        ReconSpec::Nclc => reconstruct_nclc(set, len)?,
        ReconSpec::MostProbable => sc_reconstruct(&set.samples, len)?,
    })
}

pub fn measure_for(model: &Model, series: &SeriesSpec) -> Measure {
    match series.measure {
        Some(m) => m.into(),
        None if matches!(model, Model::BinaryHmm(_)) => Measure::Hamming,
        None => Measure::Mse,
    }
}

/// Regime estimator behaviour over one run, for states whose estimate is
/// a pure regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimatorStats {
    pub states: usize,
    pub regime_states: usize,
    pub transition_states: usize,
    pub pe_min: f64,
    pub pe_max: f64,
    pub pe_mean: f64,
    /// Regime-class estimates that disagree with the true class.
    pub misclassified: usize,
}

impl EstimatorStats {
    pub fn misclassification_rate(&self) -> f64 {
        if self.regime_states == 0 {
            0.0
        } else {
            self.misclassified as f64 / self.regime_states as f64
        }
    }
}

/// True class of the state ending at sample `i`: the regime governing
/// every step of the most recent interval (and the step into `t_{i-1}`
/// when the window holds an earlier interval), else a transition.
pub fn true_class(set: &SampleSet, i: usize, hidden: &[u8]) -> RegimeClass {
    let (t_prev, t_last) = (set.samples[i - 1].0, set.samples[i].0);
    let first = if set.init_count >= 3 && t_prev > 0 {
        t_prev - 1
    } else {
        t_prev
    };
    let a = hidden[first];
    if hidden[first..t_last].iter().all(|&h| h == a) {
        RegimeClass::from_regime(a)
    } else {
        RegimeClass::Transition
    }
}

fn estimator_stats(set: &SampleSet, trace: &SignalTrace) -> Option<EstimatorStats> {
    if trace.hidden_states.is_empty() || set.init_count < 2 {
        return None;
    }
    let mut stats = EstimatorStats {
        states: 0,
        regime_states: 0,
        transition_states: 0,
        pe_min: f64::INFINITY,
        pe_max: f64::NEG_INFINITY,
        pe_mean: 0.0,
        misclassified: 0,
    };
    for (k, est) in set.estimates.iter().enumerate() {
        let StateEstimate { theta_hat, p_error } = (*est)?;
        stats.states += 1;
        if theta_hat == RegimeClass::Transition {
            stats.transition_states += 1;
            continue;
        }
        // increment k was chosen from the state ending at sample init+k-1
        let i = set.init_count + k - 1;
        stats.regime_states += 1;
        stats.pe_min = stats.pe_min.min(p_error);
        stats.pe_max = stats.pe_max.max(p_error);
        stats.pe_mean += p_error;
        if true_class(set, i, &trace.hidden_states) != theta_hat {
            stats.misclassified += 1;
        }
    }
    if stats.regime_states == 0 {
        return None;
    }
    stats.pe_mean /= stats.regime_states as f64;
    Some(stats)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub rate: f64,
    pub distortion: f64,
    /// `(distortion sum + ρ Σ 1/T_i) / horizon`, when a rate award applies.
    pub cost: Option<f64>,
    pub samples: usize,
    pub horizon: usize,
    pub estimator: Option<EstimatorStats>,
}

pub struct SeedRun {
    pub set: SampleSet,
    pub recon: Vec<f64>,
    pub outcome: SeedOutcome,
}

/// Sample, reconstruct and score one trace.
pub fn run_seed(model: &Model, series: &SeriesSpec, point: &PreparedPoint, trace: &SignalTrace) -> Result<SeedRun> {
    let mut f = build_sampler(model, &series.sampler, point, trace)?;
    let set = run_sampler(&trace.values, f.as_mut(), trace.seed)?;
    if set.horizon() == 0 {
        bail!("signal.length: too short for a single post-initialization sample");
    }
    let recon = reconstruct(model, &series.reconstruction, &set, trace)?;
    let scope = EvalScope::of(&set, series.exclude_sample_times);
    let total = distortion_total(&trace.values, &recon, measure_for(model, series), &scope, &set)?;
    let horizon = set.horizon();
    let cost = point.rho.map(|rho| {
        let award: f64 = set.increments.iter().map(|&t| rho / t as f64).sum();
        (total.sum + award) / horizon as f64
    });
    let outcome = SeedOutcome {
        seed: trace.seed,
        rate: set.rate(),
        distortion: total.mean(),
        cost,
        samples: set.samples.len(),
        horizon,
        estimator: estimator_stats(&set, trace),
    };
    Ok(SeedRun { set, recon, outcome })
}

/// Decode the sampling times of `set` from its values with a fresh sampler
/// and the initialization times; error if they differ from the encoder's.
pub fn check_replay(
    model: &Model,
    series: &SeriesSpec,
    point: &PreparedPoint,
    trace: &SignalTrace,
    set: &SampleSet,
) -> Result<()> {
    let mut f = build_sampler(model, &series.sampler, point, trace)?;
    let init: Vec<usize> = set.samples[..set.init_count].iter().map(|s| s.0).collect();
    let decoded = replay_times(&set.values(), &init, f.as_mut())?;
    let encoded = set.times();
    if let Some(k) = decoded.iter().zip(&encoded).position(|(d, e)| d != e) {
        bail!(
            "decoder time {} differs from encoder time {} at sample {k}",
            decoded[k],
            encoded[k]
        );
    }
    if decoded.len() != encoded.len() {
        bail!(
            "decoder recovered {} sampling times, encoder took {}",
            decoded.len(),
            encoded.len()
        );
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RdPoint {
    pub rho: Option<f64>,
    pub rate: f64,
    pub distortion: f64,
    pub stderr_rate: f64,
    pub stderr_distortion: f64,
    pub cost: Option<f64>,
    pub stderr_cost: Option<f64>,
    pub sampler: String,
    pub recon: String,
    pub seeds: usize,
    #[serde(skip)]
    pub per_seed: Vec<SeedOutcome>,
}

/// Mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn aggregate(series: &SeriesSpec, point: &PreparedPoint, per_seed: Vec<SeedOutcome>) -> RdPoint {
    let pick = |f: fn(&SeedOutcome) -> f64| mean_stderr(&per_seed.iter().map(f).collect::<Vec<_>>());
    let (rate, stderr_rate) = pick(|s| s.rate);
    let (distortion, stderr_distortion) = pick(|s| s.distortion);
    let (cost, stderr_cost) = if point.rho.is_some() {
        let (c, e) = pick(|s| s.cost.unwrap_or(f64::NAN));
        (Some(c), Some(e))
    } else {
        (None, None)
    };
    let sampler = match (&series.sampler, point.rate) {
        (SamplerSpec::Uniform { .. }, Some(r)) => format!("uniform(R={r})"),
        (s, _) => s.id(),
    };
    RdPoint {
        rho: point.rho,
        rate,
        distortion,
        stderr_rate,
        stderr_distortion,
        cost,
        stderr_cost,
        sampler: series.name.clone().unwrap_or(sampler),
        recon: series.reconstruction.id(),
        seeds: per_seed.len(),
        per_seed,
    }
}

/// Analytic curve point for one estimator error probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticPoint {
    pub pe: f64,
    pub rho: f64,
    pub rate: f64,
    pub distortion: f64,
}

/// Collapsed bounds (`pe_low = pe_up = pe`) across the ρ sweep.
pub fn analytic_curves(spec: &ExperimentSpec) -> Result<Vec<AnalyticPoint>> {
    let Some(analytic) = &spec.analytic else {
        return Ok(Vec::new());
    };
    let Model::MarkovAr1(params) = spec.signal.model()? else {
        bail!("analytic: curves need a markov_ar1 signal");
    };
    let mut out = Vec::new();
    for &pe in &analytic.pe {
        for rho in spec.cost.rhos()? {
            let b = thm4_bounds(&params, &spec.cost.params(rho)?, pe, pe).context("analytic")?;
            out.push(AnalyticPoint {
                pe,
                rho,
                rate: b.rate_low,
                distortion: b.dist_low,
            });
        }
    }
    Ok(out)
}

/// Greedy AR(1) increment next to the real root of the cost difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootPoint {
    pub rho: f64,
    pub t_star: usize,
    /// Absent when `1 - α² >= ρ / 2`.
    pub t_root: Option<f64>,
    /// `T* ∈ {⌊T_root⌋, ⌊T_root⌋ + 1}`.
    pub within_one: Option<bool>,
}

pub fn increment_roots(spec: &ExperimentSpec) -> Result<Vec<RootPoint>> {
    let Model::Ar1(p) = spec.signal.model()? else {
        bail!("signal.model: increment_root needs an ar1 signal");
    };
    spec.cost
        .rhos()?
        .into_iter()
        .map(|rho| {
            let t_star = ar1_greedy_increment(p.alpha(), &spec.cost.params(rho)?)?;
            let t_root = ar1_root(p.alpha(), rho).ok();
            let within_one = t_root.map(|r| {
                let fl = r.floor() as usize;
                t_star == fl || t_star == fl + 1
            });
            Ok(RootPoint {
                rho,
                t_star,
                t_root,
                within_one,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ExperimentOutput {
    pub points: Vec<RdPoint>,
    pub analytic: Vec<AnalyticPoint>,
    pub roots: Vec<RootPoint>,
}

/// Run every series over every seed; `jobs = None` uses all cores.
pub fn run_experiment(spec: &ExperimentSpec, jobs: Option<usize>) -> Result<ExperimentOutput> {
    spec.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().context("--jobs")?;
    pool.install(|| run_in_pool(spec))
}

fn run_in_pool(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    if spec.kind == ExperimentKind::IncrementRoot {
        return Ok(ExperimentOutput {
            roots: increment_roots(spec)?,
            ..Default::default()
        });
    }
    let model = spec.signal.model()?;
    let series = spec.all_series();
    let mut points = Vec::new();
    if !series.is_empty() {
        let traces: Vec<SignalTrace> = spec
            .signal
            .seed_list()?
            .into_par_iter()
            .map(|seed| generate(&model, spec.signal.length, seed))
            .collect::<Result<_>>()?;
        let mut jobs = Vec::new();
        for (k, s) in series.iter().enumerate() {
            for p in prepare_points(spec, s).with_context(|| format!("series[{k}]"))? {
                jobs.push((k, s, p));
            }
        }
        let results: Vec<Vec<SeedOutcome>> = jobs
            .par_iter()
            .map(|(k, s, p)| {
                traces
                    .par_iter()
                    .map(|tr| run_seed(&model, s, p, tr).map(|r| r.outcome))
                    .collect::<Result<Vec<_>>>()
                    .with_context(|| format!("series[{k}]"))
            })
            .collect::<Result<_>>()?;
        points = jobs
            .iter()
            .zip(results)
            .map(|((_, s, p), per_seed)| aggregate(s, p, per_seed))
            .collect();
    }
    Ok(ExperimentOutput {
        points,
        analytic: analytic_curves(spec)?,
        roots: Vec::new(),
    })
}

/// Default measure label used in manifests.
pub fn measure_label(model: &Model, series: &SeriesSpec) -> &'static str {
    match measure_for(model, series) {
        Measure::Mse => "mse",
        Measure::Hamming => "hamming",
    }
}
