//! Experiment spec files (TOML).
//!
//! ```toml
//! kind = "rate_distortion"          # or "increment_root"
//!
//! [signal]
//! model = "markov_ar1"              # ar1 | markov_ar1 | binary_hmm
//! alpha0 = 0.01
//! alpha1 = 0.99
//! p = 0.001                         # or p01 / p10
//! length = 100000
//! seed_count = 20                   # or seeds = [..]
//! base_seed = 1
//!
//! [cost]
//! rho = { min = 0.1, max = 100.0, count = 16 }   # or a list
//! t_up = 50
//!
//! [[series]]
//! sampler = { kind = "greedy_markov", m = 10 }
//! reconstruction = { kind = "glp", m = 10, acf = "conditional" }
//!
//! [analytic]
//! pe = [0.0, 0.05]
//!
//! [output]
//! csv = "out/fig6.csv"
//! ```
//!
//! A single `[sampler]` + `[reconstruction]` pair may replace `[[series]]`.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tans_core::greedy::CostParams;
use tans_core::reconstruct::Measure;
use tans_core::signals::{Ar1Params, BinaryHmmParams, MarkovAr1Params};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    #[default]
    RateDistortion,
    /// Greedy AR(1) increment against the real root of the cost difference.
    IncrementRoot,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub kind: ExperimentKind,
    pub signal: SignalSpec,
    #[serde(default)]
    pub cost: CostSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reconstruction: Option<ReconSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<SeriesSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analytic: Option<AnalyticSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Ar1,
    MarkovAr1,
    BinaryHmm,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSpec {
    pub model: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha1: Option<f64>,
    /// Symmetric switching probability (sets both `p01` and `p10`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p01: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p10: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps1: Option<f64>,
    #[serde(default = "default_length")]
    pub length: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(default = "default_seed_count")]
    pub seed_count: usize,
    #[serde(default = "default_base_seed")]
    pub base_seed: u64,
}

fn default_length() -> usize {
    100_000
}
fn default_seed_count() -> usize {
    20
}
fn default_base_seed() -> u64 {
    1
}

/// Parsed signal model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Ar1(Ar1Params),
    MarkovAr1(MarkovAr1Params),
    BinaryHmm(BinaryHmmParams),
}

fn need(v: Option<f64>, path: &str) -> Result<f64> {
    v.with_context(|| format!("{path}: required for this signal model"))
}

impl SignalSpec {
    pub fn model(&self) -> Result<Model> {
        Ok(match self.model {
            ModelKind::Ar1 => Model::Ar1(Ar1Params::new(need(self.alpha, "signal.alpha")?).context("signal.alpha")?),
            ModelKind::MarkovAr1 => {
                let a0 = need(self.alpha0, "signal.alpha0")?;
                let a1 = need(self.alpha1, "signal.alpha1")?;
                let (p01, p10) = match (self.p, self.p01, self.p10) {
                    (Some(p), None, None) => (p, p),
                    (None, Some(a), Some(b)) => (a, b),
                    _ => bail!("signal.p: give either `p` or both `p01` and `p10`"),
                };
                Model::MarkovAr1(MarkovAr1Params::new(a0, a1, p01, p10).context("signal (markov_ar1 parameters)")?)
            }
            ModelKind::BinaryHmm => Model::BinaryHmm(
                BinaryHmmParams::new(need(self.eps0, "signal.eps0")?, need(self.eps1, "signal.eps1")?)
                    .context("signal (binary_hmm parameters)")?,
            ),
        })
    }

    /// Seeds to run, in order.
    pub fn seed_list(&self) -> Result<Vec<u64>> {
        let seeds = match &self.seeds {
            Some(list) => list.clone(),
            None => (0..self.seed_count as u64)
                .map(|k| self.base_seed.wrapping_add(k))
                .collect(),
        };
        if seeds.is_empty() {
            bail!("signal.seeds: at least one seed is required");
        }
        Ok(seeds)
    }

    /// Replace the seed base, keeping the number of seeds.
    pub fn override_seed(&mut self, base: u64) {
        let count = self.seeds.as_ref().map_or(self.seed_count, Vec::len);
        self.seeds = None;
        self.seed_count = count;
        self.base_seed = base;
    }
}

/// A list of values or `count` log-spaced values in `[min, max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sweep {
    List(Vec<f64>),
    LogRange {
        min: f64,
        max: f64,
        #[serde(default = "default_sweep_count")]
        count: usize,
    },
}

fn default_sweep_count() -> usize {
    16
}

impl Sweep {
    pub fn values(&self, path: &str) -> Result<Vec<f64>> {
        let v = match self {
            Sweep::List(v) => v.clone(),
            Sweep::LogRange { min, max, count } => {
                if !(*min > 0.0 && max >= min) || *count == 0 {
                    bail!("{path}: need 0 < min <= max and count >= 1");
                }
                if *count == 1 {
                    vec![*min]
                } else {
                    let (lo, hi) = (min.ln(), max.ln());
                    let last = *count - 1;
                    (0..*count)
                        .map(|k| match k {
                            0 => *min,
                            k if k == last => *max,
                            k => (lo + (hi - lo) * k as f64 / last as f64).exp(),
                        })
                        .collect()
                }
            }
        };
        if v.is_empty() {
            bail!("{path}: empty sweep");
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<Sweep>,
    #[serde(default = "default_t_up")]
    pub t_up: usize,
    #[serde(default = "default_sigma")]
    pub sigma_max_sq: f64,
}

fn default_t_up() -> usize {
    tans_core::greedy::DEFAULT_T_UP
}
fn default_sigma() -> f64 {
    1.0
}

impl Default for CostSpec {
    fn default() -> Self {
        Self {
            rho: None,
            t_up: default_t_up(),
            sigma_max_sq: default_sigma(),
        }
    }
}

impl CostSpec {
    pub fn rhos(&self) -> Result<Vec<f64>> {
        self.rho
            .as_ref()
            .context("cost.rho: required by this experiment")?
            .values("cost.rho")
    }

    pub fn params(&self, rho: f64) -> Result<CostParams> {
        CostParams::with_limits(rho, self.sigma_max_sq, self.t_up).context("cost")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignSpec {
    #[default]
    Literal,
    Reward,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SamplerSpec {
    /// Modified uniform sampling swept over rates.
    Uniform {
        rates: Sweep,
    },
    Constant {
        increment: usize,
    },
    GreedyAr1,
    GreedyMarkov {
        #[serde(default = "default_m")]
        m: usize,
    },
    GenieGreedy,
    DpSourceCoding {
        beta: f64,
        t_max: usize,
        #[serde(default)]
        override_t_max: bool,
    },
    AdpMarkov {
        #[serde(default = "default_m")]
        m: usize,
        beta: f64,
        gamma: f64,
        #[serde(default)]
        sign: SignSpec,
        /// Monte-Carlo draws for the expected quality; absent means the
        /// predicted-value state alone.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        draws: Option<usize>,
        #[serde(default)]
        draw_seed: u64,
    },
}

fn default_m() -> usize {
    10
}

impl SamplerSpec {
    pub fn id(&self) -> String {
        match self {
            SamplerSpec::Uniform { .. } => "uniform".into(),
            SamplerSpec::Constant { increment } => format!("constant(T={increment})"),
            SamplerSpec::GreedyAr1 => "greedy_ar1".into(),
            SamplerSpec::GreedyMarkov { m } => format!("greedy_markov(m={m})"),
            SamplerSpec::GenieGreedy => "genie_greedy".into(),
            SamplerSpec::DpSourceCoding { beta, .. } => format!("dp_source_coding(beta={beta})"),
            SamplerSpec::AdpMarkov { m, beta, gamma, .. } => format!("adp_markov(m={m};beta={beta};gamma={gamma})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcfSpec {
    /// The signal's own AR(1) model.
    #[default]
    Model,
    Estimated,
    Conditional,
    KnownRegime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReconSpec {
    Glp {
        #[serde(default = "default_glp_m")]
        m: usize,
        #[serde(default)]
        acf: AcfSpec,
        #[serde(default = "default_window")]
        window: usize,
        #[serde(default = "default_max_lag")]
        max_lag: usize,
    },
    Clc,
    Nclc,
    /// Hold the last sampled value (most-probable fill for binary chains).
    MostProbable,
}

fn default_glp_m() -> usize {
    1
}
fn default_window() -> usize {
    1000
}
fn default_max_lag() -> usize {
    200
}

impl ReconSpec {
    pub fn id(&self) -> String {
        match self {
            ReconSpec::Glp { m, acf, .. } => {
                let a = match acf {
                    AcfSpec::Model => "model",
                    AcfSpec::Estimated => "estimated",
                    AcfSpec::Conditional => "conditional",
                    AcfSpec::KnownRegime => "known_regime",
                };
                format!("glp(m={m};acf={a})")
            }
            ReconSpec::Clc => "clc".into(),
            ReconSpec::Nclc => "nclc".into(),
            ReconSpec::MostProbable => "most_probable".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureSpec {
    Mse,
    Hamming,
}

impl From<MeasureSpec> for Measure {
    fn from(m: MeasureSpec) -> Self {
        match m {
            MeasureSpec::Mse => Measure::Mse,
            MeasureSpec::Hamming => Measure::Hamming,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub sampler: SamplerSpec,
    pub reconstruction: ReconSpec,
    /// Defaults to Hamming for binary signals and MSE otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    #[serde(default)]
    pub exclude_sample_times: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticSpec {
    pub pe: Vec<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).context("spec does not match the schema")?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    /// All series, with a top-level `[sampler]`/`[reconstruction]` pair
    /// first.
    pub fn all_series(&self) -> Vec<SeriesSpec> {
        let mut out = Vec::new();
        if let (Some(s), Some(r)) = (&self.sampler, &self.reconstruction) {
            out.push(SeriesSpec {
                name: None,
                sampler: s.clone(),
                reconstruction: r.clone(),
                measure: None,
                exclude_sample_times: false,
            });
        }
        out.extend(self.series.iter().cloned());
        out
    }

    pub fn validate(&self) -> Result<()> {
        let model = self.signal.model()?;
        self.signal.seed_list()?;
        if self.signal.length < 2 {
            bail!("signal.length: must be at least 2");
        }
        if self.sampler.is_some() != self.reconstruction.is_some() {
            bail!("sampler/reconstruction: give both sections or neither");
        }
        match self.kind {
            ExperimentKind::IncrementRoot => {
                if !matches!(model, Model::Ar1(_)) {
                    bail!("signal.model: increment_root needs an ar1 signal");
                }
                for r in self.cost.rhos()? {
                    self.cost.params(r)?;
                }
            }
            ExperimentKind::RateDistortion => {
                let series = self.all_series();
                if series.is_empty() && self.analytic.is_none() {
                    bail!("series: nothing to run (add [[series]] or [analytic])");
                }
                for (k, s) in series.iter().enumerate() {
                    validate_series(s, &model, &self.cost).with_context(|| format!("series[{k}]"))?;
                }
                if let Some(a) = &self.analytic {
                    let Model::MarkovAr1(p) = model else {
                        bail!("analytic: curves need a markov_ar1 signal");
                    };
                    if !p.is_symmetric() {
                        bail!("analytic: curves need p01 = p10");
                    }
                    if a.pe.iter().any(|pe| !(0.0..=1.0).contains(pe)) {
                        bail!("analytic.pe: probabilities must lie in [0, 1]");
                    }
                    for r in self.cost.rhos()? {
                        self.cost.params(r)?;
                    }
                }
            }
        }
        Ok(())
    }
}

fn validate_series(s: &SeriesSpec, model: &Model, cost: &CostSpec) -> Result<()> {
    let markov = matches!(model, Model::MarkovAr1(_));
    let binary = matches!(model, Model::BinaryHmm(_));
    match &s.sampler {
        SamplerSpec::Uniform { rates } => {
            for r in rates.values("sampler.rates")? {
                if !(r > 0.0 && r <= 1.0) {
                    bail!("sampler.rates: {r} is not in (0, 1]");
                }
            }
        }
        SamplerSpec::Constant { increment } => {
            if *increment == 0 {
                bail!("sampler.increment: must be at least 1");
            }
        }
        SamplerSpec::GreedyAr1 => {
            if !matches!(model, Model::Ar1(_)) {
                bail!("sampler: greedy_ar1 needs an ar1 signal");
            }
            cost.rhos()?;
        }
        SamplerSpec::GreedyMarkov { m } | SamplerSpec::AdpMarkov { m, .. } => {
            if !markov {
                bail!("sampler: needs a markov_ar1 signal");
            }
            if *m < 2 {
                bail!("sampler.m: regime estimation needs m >= 2");
            }
            cost.rhos()?;
        }
        SamplerSpec::GenieGreedy => {
            if !markov {
                bail!("sampler: genie_greedy needs a markov_ar1 signal");
            }
            cost.rhos()?;
        }
        SamplerSpec::DpSourceCoding { beta, t_max, .. } => {
            if !binary {
                bail!("sampler: dp_source_coding needs a binary_hmm signal");
            }
            if !(*beta > 0.0 && *beta < 1.0) {
                bail!("sampler.beta: must lie in (0, 1)");
            }
            if *t_max == 0 {
                bail!("sampler.t_max: must be at least 1");
            }
            cost.rhos()?;
        }
    }
    if let SamplerSpec::AdpMarkov { beta, gamma, draws, .. } = &s.sampler {
        if !(*beta >= 0.0 && *beta < 1.0) {
            bail!("sampler.beta: must lie in [0, 1)");
        }
        if !(*gamma >= 0.0) {
            bail!("sampler.gamma: must be >= 0");
        }
        if *draws == Some(0) {
            bail!("sampler.draws: must be at least 1");
        }
    }
    match &s.reconstruction {
        ReconSpec::Glp { m, acf, window, .. } => {
            if *m == 0 {
                bail!("reconstruction.m: must be at least 1");
            }
            match acf {
                AcfSpec::Model if !matches!(model, Model::Ar1(_)) => {
                    bail!("reconstruction.acf: `model` needs an ar1 signal")
                }
                AcfSpec::Conditional | AcfSpec::KnownRegime if !markov => {
                    bail!("reconstruction.acf: needs a markov_ar1 signal")
                }
                AcfSpec::Estimated if *window < 2 => bail!("reconstruction.window: must be at least 2"),
                _ => {}
            }
        }
        ReconSpec::MostProbable if !binary => bail!("reconstruction: most_probable needs a binary_hmm signal"),
        _ => {}
    }
    if s.measure == Some(MeasureSpec::Hamming) && !binary {
        bail!("measure: hamming needs a binary_hmm signal");
    }
    Ok(())
}
